"""Durable battle and vote storage.

The store is an append-only log: one JSON object per line, UTF-8, with a
`record_type` of "prompt", "battle", or "vote".  Line order is authoritative;
a battle's state changes are recorded by re-appending the battle with its new
state, and replaying the file from the top rebuilds the in-memory index
exactly.  Nothing is ever rewritten or deleted, which keeps the log diff-able
and lets any consumer reconstruct state deterministically.

Writes are serialized through a single lock; reads can proceed concurrently
and observe a consistent prefix.
"""
from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterator, Protocol

from .common import Task, parse_task
from .ratings import BattleOutcome, BattleRecord


class BattleState(Enum):
    OPEN = "open"
    VOTED = "voted"
    REVEALED = "revealed"


class SafetyPolicy(Enum):
    SAFE_ONLY = "safe_only"
    ALL = "all"


@dataclass(frozen=True)
class Prompt:
    id: str
    task: Task
    text: str
    source_image_ref: str | None = None
    safety: str = "unchecked"  # "unchecked" | "safe" | "unsafe"
    safety_category: str | None = None

    def __post_init__(self) -> None:
        if self.task is Task.IMAGE_EDITING and not self.source_image_ref:
            raise ValueError(f"editing prompt {self.id!r} needs a source image")
        if self.task is not Task.IMAGE_EDITING and self.source_image_ref:
            raise ValueError(f"prompt {self.id!r} must not carry a source image")
        if self.safety not in ("unchecked", "safe", "unsafe"):
            raise ValueError(f"bad safety value {self.safety!r}")
        if (self.safety == "unsafe") != (self.safety_category is not None):
            raise ValueError("safety_category must be set exactly when unsafe")


@dataclass(frozen=True)
class Battle:
    id: str
    task: Task
    prompt_id: str
    model_a: str
    model_b: str
    output_a: str
    output_b: str
    state: BattleState = BattleState.OPEN
    created_at: int = 0  # UTC milliseconds

    def __post_init__(self) -> None:
        if self.model_a == self.model_b:
            raise ValueError(f"battle {self.id!r} pairs a model with itself")


@dataclass(frozen=True)
class Vote:
    battle_id: str
    outcome: BattleOutcome
    voted_at: int
    counted: bool


class SafetyFilter(Protocol):
    def classify(self, text: str) -> str | None:
        """Return a category label for unsafe text, None when safe."""


DEFAULT_DENYLIST: dict[str, tuple[str, ...]] = {
    "sexual content": ("nsfw", "nude", "explicit sex", "porn"),
    "violent crimes": ("murder", "massacre", "beheading", "torture"),
    "sex-related crimes": ("rape", "molest"),
}


class DenylistFilter:
    """Case-insensitive substring filter mapping categories to term lists."""

    def __init__(self, denylist: dict[str, tuple[str, ...]] | None = None):
        self.denylist = dict(DEFAULT_DENYLIST if denylist is None else denylist)

    def classify(self, text: str) -> str | None:
        lowered = text.lower()
        for category in sorted(self.denylist):
            if any(term in lowered for term in self.denylist[category]):
                return category
        return None


def moderate_prompt(prompt: Prompt, safety_filter: SafetyFilter) -> Prompt:
    """Resolve an unchecked prompt to safe/unsafe via the filter.

    A filter failure propagates and the prompt stays unchecked; unchecked
    prompts are never treated as safe downstream.
    """
    if prompt.safety != "unchecked":
        raise ValueError(f"prompt {prompt.id!r} already moderated")
    category = safety_filter.classify(prompt.text)
    if category is None:
        return replace(prompt, safety="safe", safety_category=None)
    return replace(prompt, safety="unsafe", safety_category=category)


def now_ms() -> int:
    return int(time.time() * 1000)


class UnknownBattleError(KeyError):
    def __str__(self) -> str:  # drop KeyError's repr-quoting
        return str(self.args[0]) if self.args else "unknown battle"


class DuplicateVoteError(RuntimeError):
    pass


class VoteStore:
    """Append-only log of prompts, battles, and votes with an in-memory index."""

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._lock = threading.Lock()
        self._prompts: dict[str, Prompt] = {}
        self._battles: dict[str, Battle] = {}
        self._votes: dict[str, Vote] = {}
        self._vote_order: list[str] = []
        if self._path.exists():
            self._replay()
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self._path, "a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            self._file.flush()
            os.fsync(self._file.fileno())
            self._file.close()

    def __enter__(self) -> "VoteStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- log plumbing ------------------------------------------------------

    def _replay(self) -> None:
        with open(self._path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    self._apply(record)
                except (ValueError, KeyError) as exc:
                    raise ValueError(
                        f"{self._path}:{lineno}: bad log record: {exc}"
                    ) from exc

    def _apply(self, record: dict) -> None:
        kind = record["record_type"]
        if kind == "prompt":
            prompt = Prompt(
                id=record["id"],
                task=parse_task(record["task"]),
                text=record["text"],
                source_image_ref=record.get("source_image_ref"),
                safety=record.get("safety", "unchecked"),
                safety_category=record.get("safety_category"),
            )
            self._prompts[prompt.id] = prompt
        elif kind == "battle":
            battle = Battle(
                id=record["id"],
                task=parse_task(record["task"]),
                prompt_id=record["prompt_id"],
                model_a=record["model_a"],
                model_b=record["model_b"],
                output_a=record["output_a"],
                output_b=record["output_b"],
                state=BattleState(record["state"]),
                created_at=record["created_at"],
            )
            self._battles[battle.id] = battle
        elif kind == "vote":
            vote = Vote(
                battle_id=record["battle_id"],
                outcome=BattleOutcome(record["outcome"]),
                voted_at=record["voted_at"],
                counted=record["counted"],
            )
            self._votes[vote.battle_id] = vote
            self._vote_order.append(vote.battle_id)
        else:
            raise ValueError(f"unknown record_type {kind!r}")

    def _append(self, record: dict) -> None:
        self._file.write(json.dumps(record, ensure_ascii=False) + "\n")
        self._file.flush()

    @staticmethod
    def _prompt_record(prompt: Prompt) -> dict:
        return {
            "record_type": "prompt",
            "id": prompt.id,
            "task": prompt.task.value,
            "text": prompt.text,
            "source_image_ref": prompt.source_image_ref,
            "safety": prompt.safety,
            "safety_category": prompt.safety_category,
        }

    @staticmethod
    def _battle_record(battle: Battle) -> dict:
        return {
            "record_type": "battle",
            "id": battle.id,
            "task": battle.task.value,
            "prompt_id": battle.prompt_id,
            "model_a": battle.model_a,
            "model_b": battle.model_b,
            "output_a": battle.output_a,
            "output_b": battle.output_b,
            "state": battle.state.value,
            "created_at": battle.created_at,
        }

    # -- writes ------------------------------------------------------------

    def add_prompt(self, prompt: Prompt) -> Prompt:
        with self._lock:
            existing = self._prompts.get(prompt.id)
            if existing is not None:
                return existing
            self._append(self._prompt_record(prompt))
            self._prompts[prompt.id] = prompt
            return prompt

    def create_battle(self, battle: Battle) -> Battle:
        with self._lock:
            if battle.id in self._battles:
                raise ValueError(f"battle id {battle.id!r} already exists")
            if battle.state is not BattleState.OPEN:
                raise ValueError("new battles must start open")
            self._append(self._battle_record(battle))
            self._battles[battle.id] = battle
            return battle

    def reveal(self, battle_id: str) -> Battle:
        """Mark identities as revealed; idempotent, allowed before or after a vote."""
        with self._lock:
            battle = self._require_battle(battle_id)
            if battle.state is BattleState.REVEALED:
                return battle
            battle = replace(battle, state=BattleState.REVEALED)
            self._append(self._battle_record(battle))
            self._battles[battle_id] = battle
            return battle

    def record_vote(
        self, battle_id: str, outcome: BattleOutcome, at: int | None = None
    ) -> Vote:
        """Store the single vote for a battle.

        The vote counts exactly when the battle was not revealed at vote
        time; a counted vote also moves the battle to the voted state.
        """
        at = now_ms() if at is None else at
        with self._lock:
            battle = self._require_battle(battle_id)
            if battle_id in self._votes:
                raise DuplicateVoteError(f"battle {battle_id!r} already has a vote")
            counted = battle.state is not BattleState.REVEALED
            vote = Vote(battle_id=battle_id, outcome=outcome, voted_at=at, counted=counted)
            self._append(
                {
                    "record_type": "vote",
                    "battle_id": vote.battle_id,
                    "outcome": vote.outcome.value,
                    "voted_at": vote.voted_at,
                    "counted": vote.counted,
                }
            )
            self._votes[battle_id] = vote
            self._vote_order.append(battle_id)
            if counted:
                battle = replace(battle, state=BattleState.VOTED)
                self._append(self._battle_record(battle))
                self._battles[battle_id] = battle
            return vote

    # -- reads -------------------------------------------------------------

    def _require_battle(self, battle_id: str) -> Battle:
        try:
            return self._battles[battle_id]
        except KeyError:
            raise UnknownBattleError(f"no battle {battle_id!r}") from None

    def get_battle(self, battle_id: str) -> Battle:
        return self._require_battle(battle_id)

    def get_prompt(self, prompt_id: str) -> Prompt | None:
        return self._prompts.get(prompt_id)

    def get_vote(self, battle_id: str) -> Vote | None:
        return self._votes.get(battle_id)

    def battles(self) -> Iterator[Battle]:
        return iter(list(self._battles.values()))

    def prompts(self) -> Iterator[Prompt]:
        return iter(list(self._prompts.values()))

    def votes(self) -> Iterator[Vote]:
        return iter([self._votes[b] for b in self._vote_order])

    def _counted(
        self, task: Task | None, safety_policy: SafetyPolicy
    ) -> list[tuple[Vote, Battle, Prompt | None]]:
        rows = []
        for vote in self.votes():
            if not vote.counted:
                continue
            battle = self._battles[vote.battle_id]
            if task is not None and battle.task is not task:
                continue
            prompt = self._prompts.get(battle.prompt_id)
            if safety_policy is SafetyPolicy.SAFE_ONLY:
                if prompt is None or prompt.safety != "safe":
                    continue
            rows.append((vote, battle, prompt))
        rows.sort(key=lambda row: (row[0].voted_at, row[0].battle_id))
        return rows

    def load_counted_votes(
        self,
        task: Task | None = None,
        safety_policy: SafetyPolicy = SafetyPolicy.ALL,
    ) -> list[BattleRecord]:
        """Counted votes as rating-ready records, ordered by (voted_at, battle id)."""
        return [
            BattleRecord(model_a=b.model_a, model_b=b.model_b, outcome=v.outcome)
            for v, b, _ in self._counted(task, safety_policy)
        ]

    def counted_votes(
        self,
        task: Task | None = None,
        safety_policy: SafetyPolicy = SafetyPolicy.ALL,
    ) -> list[tuple[Vote, Battle]]:
        """Counted votes with their battles, for consumers that need battle ids."""
        return [(v, b) for v, b, _ in self._counted(task, safety_policy)]

    def export_bench(self, task: Task, path: str | Path) -> int:
        """Write the release file of safe, counted votes for a task.

        First line is metadata; the export carries no voter identifiers and
        its timestamp is derived from the data, so re-exporting an unchanged
        store is byte-identical.  Returns the record count.
        """
        rows = self._counted(task, SafetyPolicy.SAFE_ONLY)
        exported_at = max((v.voted_at for v, _, _ in rows), default=None)
        lines = [
            json.dumps(
                {"task": task.value, "exported_at": exported_at, "count": len(rows)},
                ensure_ascii=False,
            )
        ]
        for vote, battle, prompt in rows:
            lines.append(
                json.dumps(
                    {
                        "prompt": prompt.text if prompt else "",
                        "task": battle.task.value,
                        "model_a": battle.model_a,
                        "model_b": battle.model_b,
                        "output_a": battle.output_a,
                        "output_b": battle.output_b,
                        "outcome": vote.outcome.value,
                    },
                    ensure_ascii=False,
                )
            )
        target = Path(path)
        tmp = target.with_suffix(target.suffix + ".tmp")
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        os.replace(tmp, target)
        return len(rows)


def load_bench_file(path: str | Path) -> list[BattleRecord]:
    """Read a bench export back into rating-ready records."""
    records: list[BattleRecord] = []
    with open(path, encoding="utf-8") as handle:
        header = json.loads(handle.readline())
        if "count" not in header:
            raise ValueError(f"{path}: missing bench metadata line")
        for line in handle:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            records.append(
                BattleRecord(
                    model_a=row["model_a"],
                    model_b=row["model_b"],
                    outcome=BattleOutcome(row["outcome"]),
                )
            )
    return records
