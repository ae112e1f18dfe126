"""Precomputed output pool serving anonymous battles.

A museum is ingested once from a line-delimited manifest of
(task, prompt, model, output) tuples and is immutable afterwards, so
concurrent sampling is safe.  Sampling picks a prompt group and a model pair,
optionally steering toward the least-battled pair so vote coverage evens out
across pair combinations.  Model identities travel in a sealed section of the
sample; the user-facing payload is built from the public fields only.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Protocol

from .common import MediaType, Task, parse_task


class ManifestError(ValueError):
    pass


class NoEligiblePairError(RuntimeError):
    pass


class PairingStrategy(Enum):
    UNIFORM_PAIR = "uniform"
    LEAST_BATTLED_PAIR = "least_battled"


@dataclass(frozen=True)
class MuseumEntry:
    task: Task
    prompt_id: str
    prompt_text: str
    model_id: str
    artifact_uri: str
    media_type: MediaType
    source_image_ref: str | None = None

    def __post_init__(self) -> None:
        expect_video = self.task is Task.TEXT_TO_VIDEO
        if (self.media_type is MediaType.VIDEO) != expect_video:
            raise ValueError(
                f"media type {self.media_type.value} inconsistent with task "
                f"{self.task.value}"
            )
        if self.task is Task.IMAGE_EDITING and not self.source_image_ref:
            raise ValueError("editing entries need a source_image_ref")


@dataclass(frozen=True)
class SealedPair:
    """Model identities, kept out of user-facing payloads until reveal."""

    model_a: str
    model_b: str


@dataclass(frozen=True)
class BattleSample:
    task: Task
    prompt_id: str
    prompt_text: str
    source_image_ref: str | None
    media_type: MediaType
    output_a: str
    output_b: str
    sealed: SealedPair

    def public_fields(self) -> dict:
        """The anonymity-safe subset; never includes model identities."""
        return {
            "task": self.task.value,
            "prompt_id": self.prompt_id,
            "prompt_text": self.prompt_text,
            "source_image_ref": self.source_image_ref,
            "media_type": self.media_type.value,
            "output_a_uri": self.output_a,
            "output_b_uri": self.output_b,
        }


class PairHistory(Protocol):
    def count(self, prompt_id: str, model_a: str, model_b: str) -> int:
        """Battles already played between the pair for this prompt group."""


class InMemoryPairHistory:
    """Pair-battle counter keyed by (prompt group, unordered pair)."""

    def __init__(self) -> None:
        self._counts: dict[tuple[str, tuple[str, str]], int] = {}

    @staticmethod
    def _key(prompt_id: str, a: str, b: str) -> tuple[str, tuple[str, str]]:
        return prompt_id, tuple(sorted((a, b)))  # type: ignore[return-value]

    def count(self, prompt_id: str, model_a: str, model_b: str) -> int:
        return self._counts.get(self._key(prompt_id, model_a, model_b), 0)

    def record(self, prompt_id: str, model_a: str, model_b: str) -> None:
        key = self._key(prompt_id, model_a, model_b)
        self._counts[key] = self._counts.get(key, 0) + 1

    def snapshot(self) -> list[list]:
        """Stable, serializable view of all nonzero counts."""
        return sorted(
            [pid, a, b, n] for (pid, (a, b)), n in self._counts.items() if n
        )


class Museum:
    def __init__(self, entries: list[MuseumEntry]):
        self._groups: dict[tuple[Task, str], dict[str, MuseumEntry]] = {}
        for entry in entries:
            group = self._groups.setdefault((entry.task, entry.prompt_id), {})
            if entry.model_id in group:
                raise ManifestError(
                    f"duplicate entry for ({entry.task.value}, {entry.prompt_id}, "
                    f"{entry.model_id})"
                )
            group[entry.model_id] = entry

    def __len__(self) -> int:
        return sum(len(g) for g in self._groups.values())

    def tasks(self) -> list[Task]:
        return sorted({task for task, _ in self._groups}, key=lambda t: t.value)

    def prompt_ids(self, task: Task) -> list[str]:
        return sorted(pid for t, pid in self._groups if t is task)

    def group(self, task: Task, prompt_id: str) -> dict[str, MuseumEntry]:
        return dict(self._groups.get((task, prompt_id), {}))

    def _eligible_groups(self, task: Task) -> list[str]:
        return sorted(
            pid
            for (t, pid), group in self._groups.items()
            if t is task and len(group) >= 2
        )

    def sample_battle(
        self,
        task: Task,
        strategy: PairingStrategy,
        history: PairHistory,
        seed: int,
    ) -> BattleSample:
        """Draw an anonymous battle: a prompt group, a model pair, random sides.

        Uniform strategy picks the pair uniformly within a uniformly chosen
        group; least-battled picks a minimal-count pair there (ties broken at
        random).  Deterministic for a fixed seed and history.
        """
        eligible = self._eligible_groups(task)
        if not eligible:
            raise NoEligiblePairError(f"no prompt group with 2+ models for {task.value}")
        rng = random.Random(seed)
        prompt_id = eligible[rng.randrange(len(eligible))]
        group = self._groups[(task, prompt_id)]
        pairs = list(combinations(sorted(group), 2))
        if strategy is PairingStrategy.LEAST_BATTLED_PAIR:
            counts = [history.count(prompt_id, a, b) for a, b in pairs]
            floor = min(counts)
            pairs = [p for p, c in zip(pairs, counts) if c == floor]
        model_a, model_b = pairs[rng.randrange(len(pairs))]
        if rng.random() < 0.5:
            model_a, model_b = model_b, model_a
        left, right = group[model_a], group[model_b]
        return BattleSample(
            task=task,
            prompt_id=prompt_id,
            prompt_text=left.prompt_text,
            source_image_ref=left.source_image_ref,
            media_type=left.media_type,
            output_a=left.artifact_uri,
            output_b=right.artifact_uri,
            sealed=SealedPair(model_a=model_a, model_b=model_b),
        )


def ingest_manifest(path: str | Path) -> Museum:
    """Build a museum from a line-delimited manifest.

    Each line holds task, prompt_id, prompt_text, model_id, artifact_uri,
    media_type (plus source_image_ref for editing entries).  Malformed lines
    and duplicate (task, prompt, model) keys are rejected with the offending
    line number or key.
    """
    entries: list[MuseumEntry] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                entries.append(
                    MuseumEntry(
                        task=parse_task(row["task"]),
                        prompt_id=row["prompt_id"],
                        prompt_text=row["prompt_text"],
                        model_id=row["model_id"],
                        artifact_uri=row["artifact_uri"],
                        media_type=MediaType(row["media_type"]),
                        source_image_ref=row.get("source_image_ref"),
                    )
                )
            except ManifestError:
                raise
            except (ValueError, KeyError, TypeError) as exc:
                raise ManifestError(f"{path}:{lineno}: bad manifest line: {exc}") from exc
    return Museum(entries)
