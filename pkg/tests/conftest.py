"""Shared test helpers: fixture builders, schema validation, and the
acceptance-criteria result collector."""
from __future__ import annotations

from contextlib import contextmanager

import jsonschema
import pytest

from modelarena.common import MediaType, Task
from modelarena.museum import Museum, MuseumEntry
from modelarena.service import ServiceConfig, api_schema, create_app
from modelarena.store import now_ms

# -- acceptance reporting -----------------------------------------------------

ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@contextmanager
def criterion(name: str):
    """Record one acceptance criterion's pass/fail for the terminal summary."""
    try:
        yield
    except BaseException:
        ACCEPTANCE_RESULTS.append((name, "FAIL"))
        raise
    else:
        ACCEPTANCE_RESULTS.append((name, "PASS"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{status:4s} {name}")


# -- museum and service builders ---------------------------------------------

# model ids chosen to never collide with URIs or prompt text, so anonymity
# checks can grep payloads for them
MODELS = ("quokka-v2", "zebrafish-xl")


def build_museum(
    models: tuple[str, ...] = MODELS,
    task: Task = Task.TEXT_TO_IMAGE,
    n_prompts: int = 3,
    media: MediaType = MediaType.IMAGE,
) -> Museum:
    entries = []
    ext = "mp4" if media is MediaType.VIDEO else "png"
    for p in range(n_prompts):
        pid = f"p{p}"
        for k, model in enumerate(models):
            entries.append(
                MuseumEntry(
                    task=task,
                    prompt_id=pid,
                    prompt_text=f"prompt number {p}",
                    model_id=model,
                    artifact_uri=f"media/{pid}-{k}.{ext}",
                    media_type=media,
                    source_image_ref=(
                        f"media/{pid}-src.png" if task is Task.IMAGE_EDITING else None
                    ),
                )
            )
    return Museum(entries)


@pytest.fixture
def arena(tmp_path):
    """Factory for a TestClient over a fresh service; closes stores via app."""
    from fastapi.testclient import TestClient

    made = []

    def factory(museum=None, store=None, clock=now_ms, **config_overrides):
        config_overrides.setdefault("vote_log", str(tmp_path / f"log{len(made)}.jsonl"))
        config = ServiceConfig(**config_overrides)
        app = create_app(
            config,
            museum=museum if museum is not None else build_museum(),
            store=store,
            clock=clock,
        )
        client = TestClient(app)
        client.__enter__()  # run lifespan so shutdown closes the store
        made.append(client)
        return client

    yield factory
    for client in made:
        client.__exit__(None, None, None)


# -- API schema validation ----------------------------------------------------

_SCHEMA = api_schema()


def endpoint_schema(name: str, kind: str = "response") -> dict:
    sub = dict(_SCHEMA["endpoints"][name][kind])
    sub["$defs"] = _SCHEMA["$defs"]
    return sub


def validate_payload(payload, name: str, kind: str = "response") -> None:
    jsonschema.validate(payload, endpoint_schema(name, kind))


def validate_error(payload) -> None:
    jsonschema.validate(payload, _SCHEMA["error"])
