"""Automatic-judge tooling: prompt templates, response parsing, score
aggregation, and correlation of judge scores with human votes.

Judges score one generated output at a time on two aspects: how well it
follows the prompt (one score) and perceptual quality (naturalness and
artifacts, two scores).  The overall score is the geometric mean of the
semantic score and the quality score.  Correlation against human votes uses
signed vote encoding (+1 left, -1 right, 0 otherwise) against left-minus-right
score differences.

External judge calls go through a small client interface with record/replay:
tests and offline runs replay archived responses, live calls are opt-in.
"""
from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .common import Task
from .ratings import BattleOutcome

SUBSCORES = ("semantics", "quality", "overall")


class JudgeAspect(Enum):
    SEMANTIC_CONSISTENCY = "semantic_consistency"
    PERCEPTUAL_QUALITY = "perceptual_quality"


_EXPECTED_ARITY = {
    JudgeAspect.SEMANTIC_CONSISTENCY: 1,
    JudgeAspect.PERCEPTUAL_QUALITY: 2,
}

_TEMPLATE_FILES = {
    (Task.TEXT_TO_VIDEO, JudgeAspect.SEMANTIC_CONSISTENCY):
        "text_to_video_semantic_consistency.txt",
    (Task.TEXT_TO_VIDEO, JudgeAspect.PERCEPTUAL_QUALITY):
        "text_to_video_perceptual_quality.txt",
}


class JudgeParseError(ValueError):
    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class ScoreValidationError(ValueError):
    pass


@dataclass(frozen=True)
class JudgeTemplate:
    task: Task
    aspect: JudgeAspect
    body: str

    def __post_init__(self) -> None:
        has_placeholder = "<prompt>" in self.body
        if self.aspect is JudgeAspect.SEMANTIC_CONSISTENCY and not has_placeholder:
            raise ValueError("semantic-consistency template needs a <prompt> slot")
        if self.aspect is JudgeAspect.PERCEPTUAL_QUALITY and has_placeholder:
            raise ValueError("perceptual-quality template must not take a prompt")


def load_template(task: Task, aspect: JudgeAspect) -> JudgeTemplate:
    """Load one of the shipped template data files."""
    try:
        filename = _TEMPLATE_FILES[(task, aspect)]
    except KeyError:
        raise KeyError(f"no shipped template for ({task.value}, {aspect.value})") from None
    body = (
        resources.files("modelarena")
        .joinpath("data/templates")
        .joinpath(filename)
        .read_text(encoding="utf-8")
    )
    return JudgeTemplate(task=task, aspect=aspect, body=body)


def render_judge_prompt(template: JudgeTemplate, prompt_text: str) -> str:
    """Substitute the prompt placeholder; byte-stable for identical inputs."""
    return template.body.replace("<prompt>", prompt_text)


@dataclass(frozen=True)
class JudgeResponse:
    raw: str
    score: tuple[float, ...]
    reasoning: str


def parse_judge_response(raw: str, aspect: JudgeAspect) -> JudgeResponse:
    """Extract the first well-formed score object from a judge reply.

    Tolerates surrounding prose and code fences; the object must carry
    "score" (a number or list of numbers in [0, 10], with the arity the
    aspect requires) and "reasoning".
    """
    decoder = json.JSONDecoder()
    found = None
    for i, ch in enumerate(raw):
        if ch != "{":
            continue
        try:
            obj, _ = decoder.raw_decode(raw, i)
        except ValueError:
            continue
        if isinstance(obj, dict) and "score" in obj and "reasoning" in obj:
            found = obj
            break
    if found is None:
        raise JudgeParseError("no parsable score object in judge reply", raw=raw)
    score = found["score"]
    if isinstance(score, (int, float)) and not isinstance(score, bool):
        score = [score]
    if not isinstance(score, list) or not all(
        isinstance(s, (int, float)) and not isinstance(s, bool) for s in score
    ):
        raise ScoreValidationError(f"score must be a list of numbers, got {score!r}")
    expected = _EXPECTED_ARITY[aspect]
    if len(score) != expected:
        raise ScoreValidationError(
            f"{aspect.value} expects {expected} score(s), got {len(score)}"
        )
    if not all(0 <= s <= 10 for s in score):
        raise ScoreValidationError(f"scores must lie in [0, 10], got {score!r}")
    return JudgeResponse(
        raw=raw, score=tuple(float(s) for s in score), reasoning=str(found["reasoning"])
    )


@dataclass(frozen=True)
class SubScores:
    semantics: float
    quality: float
    overall: float

    def __post_init__(self) -> None:
        for name in ("semantics", "quality", "overall"):
            value = getattr(self, name)
            if not 0 <= value <= 10:
                raise ScoreValidationError(f"{name} out of [0, 10]: {value}")
        if abs(self.overall - math.sqrt(self.semantics * self.quality)) > 1e-9:
            raise ScoreValidationError("overall must be the geometric mean")

    def get(self, subscore: str) -> float:
        if subscore not in SUBSCORES:
            raise ValueError(f"unknown subscore {subscore!r}")
        return getattr(self, subscore)


def aggregate_scores(semantics: float, naturalness: float, artifacts: float) -> SubScores:
    """Collapse the three judge scores into semantics/quality/overall.

    Quality averages naturalness and artifacts; overall is the geometric
    mean of semantics and quality.
    """
    for name, value in (
        ("semantics", semantics),
        ("naturalness", naturalness),
        ("artifacts", artifacts),
    ):
        if not (isinstance(value, (int, float)) and 0 <= value <= 10):
            raise ScoreValidationError(f"{name} out of [0, 10]: {value!r}")
    quality = (naturalness + artifacts) / 2.0
    return SubScores(
        semantics=float(semantics),
        quality=quality,
        overall=math.sqrt(semantics * quality),
    )


def encode_vote(outcome: BattleOutcome) -> int:
    """Signed preference: +1 left wins, -1 right wins, 0 for tie or both-bad."""
    if outcome is BattleOutcome.A_WINS:
        return 1
    if outcome is BattleOutcome.B_WINS:
        return -1
    return 0


def pearson_correlation(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Sample Pearson r, or None when either input has zero variance."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError(f"length mismatch: {xs.shape} vs {ys.shape}")
    if xs.ndim != 1 or len(xs) < 2:
        raise ValueError("need two same-length sequences of at least 2 points")
    xd = xs - xs.mean()
    yd = ys - ys.mean()
    sx = math.sqrt(float(xd @ xd))
    sy = math.sqrt(float(yd @ yd))
    if sx == 0.0 or sy == 0.0:
        return None
    r = float(xd @ yd) / (sx * sy)
    return max(-1.0, min(1.0, r))


def correlate_metric_with_votes(
    scores: Mapping[tuple[str, str], SubScores],
    votes: Sequence[tuple[str, BattleOutcome]],
    subscore: str,
) -> float | None:
    """Correlate encoded votes with left-minus-right score differences.

    `scores` maps (battle_id, side) to SubScores with side "a" (left) or
    "b" (right); every voted battle must have both sides scored.
    """
    missing = sorted(
        {
            bid
            for bid, _ in votes
            if (bid, "a") not in scores or (bid, "b") not in scores
        }
    )
    if missing:
        raise ValueError(f"missing judge scores for battles: {', '.join(missing)}")
    x = [float(encode_vote(outcome)) for _, outcome in votes]
    y = [
        scores[(bid, "a")].get(subscore) - scores[(bid, "b")].get(subscore)
        for bid, _ in votes
    ]
    return pearson_correlation(x, y)


# -- score fixtures and the correlation report --------------------------------


def load_score_fixture(
    path: str | Path, default_metric: str | None = None
) -> dict[str, dict[tuple[str, str], SubScores]]:
    """Read line-delimited judge scores, grouped by metric name.

    Records carry battle_id, side ("a"/"b"), semantics, naturalness,
    artifacts, and optionally a metric label; unlabeled records fall under
    `default_metric` (default: the file stem).
    """
    path = Path(path)
    fallback = default_metric or path.stem
    by_metric: dict[str, dict[tuple[str, str], SubScores]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                side = row["side"]
                if side not in ("a", "b"):
                    raise ValueError(f"side must be 'a' or 'b', got {side!r}")
                scores = aggregate_scores(
                    row["semantics"], row["naturalness"], row["artifacts"]
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad score record: {exc}") from exc
            metric = row.get("metric", fallback)
            by_metric.setdefault(metric, {})[(row["battle_id"], side)] = scores
    return by_metric


@dataclass
class CorrelationReport:
    """r per metric, task, and subscore; None marks undefined correlations."""

    cells: dict[str, dict[Task, dict[str, float | None]]]

    def format_table(self) -> str:
        tasks = sorted(
            {t for per_metric in self.cells.values() for t in per_metric},
            key=lambda t: t.value,
        )
        header = ["metric"] + [
            f"{task.value}/{sub}" for task in tasks for sub in SUBSCORES
        ]
        widths = [max(len(header[0]), *(len(m) for m in self.cells))] + [
            max(len(h), 8) for h in header[1:]
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        for metric in sorted(self.cells):
            row = [metric]
            for task in tasks:
                for sub in SUBSCORES:
                    value = self.cells[metric].get(task, {}).get(sub)
                    row.append("n/a" if value is None else f"{value:+.4f}")
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
        return "\n".join(lines)


def correlation_report(
    scores_by_metric: Mapping[str, Mapping[tuple[str, str], SubScores]],
    votes_by_task: Mapping[Task, Sequence[tuple[str, BattleOutcome]]],
    subscores: Iterable[str] = SUBSCORES,
) -> CorrelationReport:
    cells: dict[str, dict[Task, dict[str, float | None]]] = {}
    for metric, scores in scores_by_metric.items():
        cells[metric] = {}
        for task, votes in votes_by_task.items():
            cells[metric][task] = {
                sub: correlate_metric_with_votes(scores, votes, sub)
                for sub in subscores
            }
    return CorrelationReport(cells=cells)


# -- judge clients ------------------------------------------------------------


class JudgeClient(Protocol):
    def evaluate(self, prompt: str, media: Sequence[str]) -> str:
        """Send a rendered prompt plus media references; return the raw reply."""


class FrameExtractor(Protocol):
    def frames(self, artifact_uri: str) -> list[str]:
        """Image-frame references for a media artifact."""


class StaticFrameIndex:
    """Frame lookup backed by a precomputed uri -> frames mapping."""

    def __init__(self, index: Mapping[str, Sequence[str]] | None = None):
        self._index = {k: list(v) for k, v in (index or {}).items()}

    def frames(self, artifact_uri: str) -> list[str]:
        return list(self._index.get(artifact_uri, [artifact_uri]))


def _request_key(prompt: str, media: Sequence[str]) -> str:
    payload = json.dumps([prompt, list(media)], ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ReplayMissError(KeyError):
    pass


class ReplayJudgeClient:
    """Serves judge replies from a recorded archive; unknown requests fail."""

    def __init__(self, archive_path: str | Path):
        self._responses: dict[str, str] = {}
        path = Path(archive_path)
        if path.exists():
            with open(path, encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if line:
                        record = json.loads(line)
                        self._responses[record["key"]] = record["response"]

    def evaluate(self, prompt: str, media: Sequence[str]) -> str:
        key = _request_key(prompt, media)
        try:
            return self._responses[key]
        except KeyError:
            raise ReplayMissError(f"no recorded reply for request {key}") from None


class RecordingJudgeClient:
    """Wraps a live client and archives every exchange for later replay."""

    def __init__(self, inner: JudgeClient, archive_path: str | Path):
        self._inner = inner
        self._path = Path(archive_path)
        self._lock = threading.Lock()

    def evaluate(self, prompt: str, media: Sequence[str]) -> str:
        response = self._inner.evaluate(prompt, media)
        record = {
            "key": _request_key(prompt, media),
            "prompt": prompt,
            "media": list(media),
            "response": response,
        }
        with self._lock, open(self._path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        return response


def judge_output(
    client: JudgeClient,
    template: JudgeTemplate,
    prompt_text: str,
    media: Sequence[str],
    frame_extractor: FrameExtractor | None = None,
) -> JudgeResponse:
    """Render, call the judge over (possibly frame-expanded) media, parse."""
    rendered = render_judge_prompt(template, prompt_text)
    if frame_extractor is not None:
        expanded: list[str] = []
        for ref in media:
            expanded.extend(frame_extractor.frames(ref))
    else:
        expanded = list(media)
    return parse_judge_response(client.evaluate(rendered, expanded), template.aspect)
