"""HTTP arena service: anonymous battle sampling, voting, reveal,
leaderboards, and head-to-head analytics.

The service wires the museum (content pool), the vote store (durable log),
and the rating core behind a small JSON API under /v1.  Anonymity is
enforced at the edge: sample responses never carry model identities; those
live only in the store and come back in the vote or reveal response.  A vote
counts exactly when the battle was not revealed first.

Leaderboards are recomputed lazily: each counted vote marks the task dirty
and the next read refits.  Battle sampling is deterministic for a fixed
configured seed and balancing history, so a frozen service always serves
the same next battle (with a fresh id).
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .common import Task, parse_task
from .museum import (
    InMemoryPairHistory,
    Museum,
    NoEligiblePairError,
    PairingStrategy,
    ingest_manifest,
)
from .ratings import (
    BattleOutcome,
    BothBadPolicy,
    RatingConfig,
    average_win_rate,
    battle_count_matrix,
    bootstrap_confidence_interval,
    build_pairwise_counts,
    fit_bradley_terry,
    win_fraction_matrix,
)
from .store import (
    Battle,
    DenylistFilter,
    DuplicateVoteError,
    Prompt,
    SafetyFilter,
    SafetyPolicy,
    UnknownBattleError,
    VoteStore,
    moderate_prompt,
    now_ms,
)

MATRIX_KINDS = ("win_fraction", "battle_count", "average_win_rate")
OUTCOME_VALUES = tuple(o.value for o in BattleOutcome)


class ConfigError(ValueError):
    pass


def api_schema() -> dict:
    """The shipped wire-format contract for every /v1 endpoint."""
    from importlib import resources

    text = (
        resources.files("modelarena").joinpath("data/api_schema.json").read_text("utf-8")
    )
    return json.loads(text)


@dataclass(frozen=True)
class ServiceConfig:
    """Runtime settings; every field can come from the config file or env."""

    vote_log: str
    manifest: str | None = None
    host: str = "127.0.0.1"
    port: int = 8080
    rating: RatingConfig = field(default_factory=RatingConfig)
    bootstrap_rounds: int = 100
    bootstrap_seed: int = 0
    safety_policy: SafetyPolicy = SafetyPolicy.ALL
    sampling_strategy: PairingStrategy = PairingStrategy.LEAST_BATTLED_PAIR
    sample_seed: int = 0
    battle_ttl_ms: int = 3_600_000

    def __post_init__(self) -> None:
        if not self.vote_log:
            raise ConfigError("vote_log: required")
        if not (0 < self.port < 65536):
            raise ConfigError(f"port: {self.port} out of range")
        if self.bootstrap_rounds < 1:
            raise ConfigError("bootstrap_rounds: must be at least 1")
        if self.battle_ttl_ms < 1:
            raise ConfigError("battle_ttl_ms: must be positive")


def _coerce(name: str, value, kind):
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def load_service_config(path: str | Path | None = None) -> ServiceConfig:
    """Read the JSON config file, then apply ARENA_* environment overrides.

    Relative paths in the file resolve against the file's directory.
    """
    raw: dict = {}
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        base = path.parent
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"config file: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"config file: invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file: top level must be an object")

    def pick(name: str, default=None):
        env = os.environ.get("ARENA_" + name.upper())
        if env is not None:
            return env
        return raw.get(name, default)

    def pick_path(name: str, default=None):
        value = pick(name, default)
        if value is None:
            return None
        value = str(value)
        return value if os.path.isabs(value) else str(base / value)

    rating_raw = raw.get("rating", {})
    if not isinstance(rating_raw, dict):
        raise ConfigError("rating: must be an object")

    def pick_rating(name: str, default):
        env = os.environ.get("ARENA_" + name.upper())
        if env is not None:
            return env
        return rating_raw.get(name, default)

    try:
        bothbad = BothBadPolicy(str(pick_rating("bothbad", "tie")))
    except ValueError:
        raise ConfigError("bothbad: must be 'tie' or 'discard'") from None
    try:
        rating = RatingConfig(
            alpha=_coerce("alpha", pick_rating("alpha", 400.0), float),
            anchor=_coerce("anchor", pick_rating("anchor", 1000.0), float),
            k_factor=_coerce("k_factor", pick_rating("k_factor", 32.0), float),
            bothbad_policy=bothbad,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    try:
        safety = SafetyPolicy(str(pick("safety_policy", "all")))
    except ValueError:
        raise ConfigError("safety_policy: must be 'all' or 'safe_only'") from None
    try:
        strategy = PairingStrategy(str(pick("sampling_strategy", "least_battled")))
    except ValueError:
        raise ConfigError(
            "sampling_strategy: must be 'uniform' or 'least_battled'"
        ) from None

    vote_log = pick_path("vote_log")
    if not vote_log:
        raise ConfigError("vote_log: required")
    return ServiceConfig(
        vote_log=vote_log,
        manifest=pick_path("manifest"),
        host=str(pick("host", "127.0.0.1")),
        port=_coerce("port", pick("port", 8080), int),
        rating=rating,
        bootstrap_rounds=_coerce("bootstrap_rounds", pick("bootstrap_rounds", 100), int),
        bootstrap_seed=_coerce("bootstrap_seed", pick("bootstrap_seed", 0), int),
        safety_policy=safety,
        sampling_strategy=strategy,
        sample_seed=_coerce("sample_seed", pick("sample_seed", 0), int),
        battle_ttl_ms=_coerce("battle_ttl_ms", pick("battle_ttl_ms", 3_600_000), int),
    )


class ApiError(Exception):
    """Maps to a structured {code, message} JSON error response."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _derive_seed(base_seed: int, history: InMemoryPairHistory) -> int:
    payload = json.dumps([base_seed, history.snapshot()], ensure_ascii=False)
    return int.from_bytes(hashlib.sha256(payload.encode("utf-8")).digest()[:8], "big")


class ArenaState:
    """Everything mutable behind the handlers, guarded by one lock."""

    def __init__(
        self,
        config: ServiceConfig,
        store: VoteStore,
        museum: Museum,
        safety_filter: SafetyFilter,
        clock: Callable[[], int],
    ):
        self.config = config
        self.store = store
        self.museum = museum
        self.safety_filter = safety_filter
        self.clock = clock
        self.history = InMemoryPairHistory()
        self.expires_at: dict[str, int] = {}
        self.lock = threading.Lock()
        self._leaderboards: dict[Task, dict] = {}
        self._dirty: set[Task] = set()

    # -- battles -----------------------------------------------------------

    def sample(self, task: Task, strategy: PairingStrategy | None) -> dict:
        with self.lock:
            try:
                sample = self.museum.sample_battle(
                    task=task,
                    strategy=strategy or self.config.sampling_strategy,
                    history=self.history,
                    seed=_derive_seed(self.config.sample_seed, self.history),
                )
            except NoEligiblePairError as exc:
                raise ApiError(503, "unavailable", str(exc)) from None
            if self.store.get_prompt(sample.prompt_id) is None:
                prompt = Prompt(
                    id=sample.prompt_id,
                    task=task,
                    text=sample.prompt_text,
                    source_image_ref=sample.source_image_ref,
                )
                try:
                    prompt = moderate_prompt(prompt, self.safety_filter)
                except Exception:
                    pass  # stays unchecked; safe-only consumers will skip it
                self.store.add_prompt(prompt)
            created = self.clock()
            battle = self.store.create_battle(
                Battle(
                    id=uuid.uuid4().hex,
                    task=task,
                    prompt_id=sample.prompt_id,
                    model_a=sample.sealed.model_a,
                    model_b=sample.sealed.model_b,
                    output_a=sample.output_a,
                    output_b=sample.output_b,
                    created_at=created,
                )
            )
            expires = created + self.config.battle_ttl_ms
            self.expires_at[battle.id] = expires
        public = sample.public_fields()
        return {
            "battle_id": battle.id,
            "task": public["task"],
            "prompt_id": public["prompt_id"],
            "prompt": public["prompt_text"],
            "source_image_ref": public["source_image_ref"],
            "media_type": public["media_type"],
            "output_a_uri": public["output_a_uri"],
            "output_b_uri": public["output_b_uri"],
            "expires_at": expires,
        }

    def vote(self, battle_id: str, outcome: BattleOutcome) -> dict:
        with self.lock:
            try:
                battle = self.store.get_battle(battle_id)
            except UnknownBattleError as exc:
                raise ApiError(404, "not_found", str(exc)) from None
            deadline = self.expires_at.get(battle_id)
            if deadline is not None and self.clock() > deadline:
                raise ApiError(409, "expired", f"battle {battle_id!r} has expired")
            try:
                vote = self.store.record_vote(battle_id, outcome, at=self.clock())
            except DuplicateVoteError as exc:
                raise ApiError(409, "conflict", str(exc)) from None
            if vote.counted:
                self.history.record(battle.prompt_id, battle.model_a, battle.model_b)
                self._dirty.add(battle.task)
        return {
            "counted": vote.counted,
            "reveal": {"model_a": battle.model_a, "model_b": battle.model_b},
        }

    def reveal(self, battle_id: str) -> dict:
        with self.lock:
            try:
                battle = self.store.reveal(battle_id)
            except UnknownBattleError as exc:
                raise ApiError(404, "not_found", str(exc)) from None
        return {"model_a": battle.model_a, "model_b": battle.model_b}

    # -- analytics ---------------------------------------------------------

    def leaderboard(self, task: Task) -> dict:
        with self.lock:
            cached = self._leaderboards.get(task)
            if cached is not None and task not in self._dirty:
                return cached
            battles = self.store.load_counted_votes(task, self.config.safety_policy)
            models = {m for b in battles for m in (b.model_a, b.model_b)}
            if len(models) < 2:
                payload = {
                    "task": task.value,
                    "status": "need counted votes between at least 2 models",
                    "entries": [],
                }
            else:
                table = bootstrap_confidence_interval(
                    battles,
                    rounds=self.config.bootstrap_rounds,
                    seed=self.config.bootstrap_seed,
                    config=self.config.rating,
                )
                payload = {
                    "task": task.value,
                    "status": "ok",
                    "entries": [
                        {
                            "model": m,
                            "rating": table.entries[m].rating,
                            "ci_lower": table.entries[m].ci_lower,
                            "ci_upper": table.entries[m].ci_upper,
                            "battles": table.entries[m].battle_count,
                        }
                        for m in table.sorted_models()
                    ],
                }
            self._leaderboards[task] = payload
            self._dirty.discard(task)
            return payload

    def stats(self, task: Task, kind: str, include_ties: bool) -> dict:
        order = [entry["model"] for entry in self.leaderboard(task)["entries"]]
        battles = self.store.load_counted_votes(task, self.config.safety_policy)
        if len(order) < 2:
            empty: dict = {"task": task.value, "kind": kind, "models": []}
            empty["values" if kind == "average_win_rate" else "rows"] = []
            return empty
        if kind == "average_win_rate":
            table = fit_bradley_terry(
                build_pairwise_counts(battles, self.config.rating), self.config.rating
            )
            rates = average_win_rate(table, alpha=self.config.rating.alpha)
            return {
                "task": task.value,
                "kind": kind,
                "models": order,
                "values": [rates[m] for m in order],
            }
        if kind == "win_fraction":
            matrix = win_fraction_matrix(battles).reordered(order)
        else:
            matrix = battle_count_matrix(battles, include_ties=include_ties).reordered(
                order
            )
        rows = [
            [None if value != value else float(value) for value in row]
            for row in matrix.values.tolist()
        ]
        return {"task": task.value, "kind": kind, "models": order, "rows": rows}

    # -- museum browsing ---------------------------------------------------

    def museum_prompts(self, task: Task) -> dict:
        prompts = []
        for prompt_id in self.museum.prompt_ids(task):
            group = self.museum.group(task, prompt_id)
            any_entry = next(iter(group.values()))
            prompts.append({"prompt_id": prompt_id, "prompt_text": any_entry.prompt_text})
        return {"task": task.value, "prompts": prompts}

    def museum_group(self, task: Task, prompt_id: str) -> dict:
        group = self.museum.group(task, prompt_id)
        if not group:
            raise ApiError(404, "not_found", f"no museum group {prompt_id!r}")
        any_entry = next(iter(group.values()))
        return {
            "task": task.value,
            "prompt_id": prompt_id,
            "prompt_text": any_entry.prompt_text,
            "source_image_ref": any_entry.source_image_ref,
            "entries": [
                {
                    "model_id": model_id,
                    "artifact_uri": entry.artifact_uri,
                    "media_type": entry.media_type.value,
                }
                for model_id, entry in sorted(group.items())
            ],
        }


def _parse_task_or_400(value: str) -> Task:
    try:
        return parse_task(value)
    except ValueError as exc:
        raise ApiError(400, "bad_request", str(exc)) from None


def create_app(
    config: ServiceConfig,
    museum: Museum | None = None,
    store: VoteStore | None = None,
    safety_filter: SafetyFilter | None = None,
    clock: Callable[[], int] = now_ms,
) -> FastAPI:
    """Build the service; owns the store (and closes it on shutdown) unless
    an already-open one is injected."""
    owns_store = store is None
    if store is None:
        store = VoteStore(config.vote_log)
    if museum is None:
        museum = ingest_manifest(config.manifest) if config.manifest else Museum([])
    state = ArenaState(
        config=config,
        store=store,
        museum=museum,
        safety_filter=safety_filter or DenylistFilter(),
        clock=clock,
    )

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        try:
            yield
        finally:
            if owns_store:
                store.close()

    app = FastAPI(title="modelarena", openapi_url=None, lifespan=lifespan)
    app.state.arena = state

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "bad_request", "message": str(exc)}
        )

    @app.post("/v1/battles/sample")
    def sample_battle(body: dict):
        task = _parse_task_or_400(str(body.get("task", "")))
        strategy = None
        if "strategy" in body and body["strategy"] is not None:
            try:
                strategy = PairingStrategy(str(body["strategy"]))
            except ValueError:
                legal = ", ".join(s.value for s in PairingStrategy)
                raise ApiError(
                    400, "bad_request", f"strategy must be one of: {legal}"
                ) from None
        return state.sample(task, strategy)

    @app.post("/v1/battles/{battle_id}/vote")
    def vote(battle_id: str, body: dict):
        raw = body.get("outcome")
        try:
            outcome = BattleOutcome(raw)
        except ValueError:
            legal = ", ".join(OUTCOME_VALUES)
            raise ApiError(
                400, "bad_request", f"outcome must be one of: {legal}"
            ) from None
        return state.vote(battle_id, outcome)

    @app.post("/v1/battles/{battle_id}/reveal")
    def reveal(battle_id: str):
        return state.reveal(battle_id)

    @app.get("/v1/leaderboard/{task}")
    def leaderboard(task: str):
        return state.leaderboard(_parse_task_or_400(task))

    @app.get("/v1/stats/{task}/{kind}")
    def stats(task: str, kind: str, include_ties: bool = False):
        if kind not in MATRIX_KINDS:
            raise ApiError(
                400,
                "bad_request",
                f"matrix must be one of: {', '.join(MATRIX_KINDS)}",
            )
        return state.stats(_parse_task_or_400(task), kind, include_ties)

    @app.get("/v1/museum/{task}/prompts")
    def museum_prompts(task: str):
        return state.museum_prompts(_parse_task_or_400(task))

    @app.get("/v1/museum/{task}/prompts/{prompt_id}")
    def museum_group(task: str, prompt_id: str):
        return state.museum_group(_parse_task_or_400(task), prompt_id)

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    return app


def run_service(config: ServiceConfig) -> None:
    """Serve until interrupted; the shutdown hook flushes the vote log."""
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
