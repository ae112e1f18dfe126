"""Rating mathematics for pairwise battles.

Two estimators are provided over the same battle records:

* an online Elo replay, where ratings move after every battle and the final
  numbers depend on battle order, and
* a batch Bradley-Terry maximum-likelihood fit over aggregated win counts,
  which is order-free and is what leaderboards should use.

Both share the base-10 logistic win model: the probability that ``i`` beats
``j`` is ``1 / (1 + 10**((R_j - R_i) / alpha))``.  Confidence bounds come from
resampling the battle log with replacement and refitting; the reported
interval is the min/max fitted rating across rounds.

Everything here is a pure function of its inputs.  Randomness only enters
through explicit seeds, so every result is reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import expit

LN10 = math.log(10.0)


class BattleOutcome(Enum):
    """The four legal verdicts on a battle; values are the wire strings."""

    A_WINS = "leftvote"
    B_WINS = "rightvote"
    TIE = "tievote"
    BOTH_BAD = "bothbad_vote"


class BothBadPolicy(Enum):
    AS_TIE = "tie"
    DISCARD = "discard"


@dataclass(frozen=True)
class RatingConfig:
    """Knobs for both rating paths.

    alpha is the logistic scale (400 gives the familiar chess-like scale),
    k_factor the online step size, anchor the mean rating after centering a
    Bradley-Terry fit.  regularization is a tiny L2 pull (on the natural-log
    parameter scale) that keeps the fit finite when some model never loses;
    it is only applied when the win graph is not strongly connected.
    """

    alpha: float = 400.0
    anchor: float = 1000.0
    k_factor: float = 32.0
    initial_rating: float = 1000.0
    convergence_tol: float = 1e-8
    max_iterations: int = 1000
    bothbad_policy: BothBadPolicy = BothBadPolicy.AS_TIE
    regularization: float = 1e-6

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.k_factor > 0:
            raise ValueError("k_factor must be positive")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.regularization < 0:
            raise ValueError("regularization must be nonnegative")


@dataclass(frozen=True)
class BattleRecord:
    """One judged battle: an unordered model pair plus the verdict."""

    model_a: str
    model_b: str
    outcome: BattleOutcome
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.model_a == self.model_b:
            raise ValueError(f"battle pairs a model with itself: {self.model_a!r}")
        if not (self.weight >= 0 and math.isfinite(self.weight)):
            raise ValueError("weight must be finite and nonnegative")


@dataclass
class PairwiseCounts:
    """Weighted win matrix: w[i][j] counts i beating j, on `models` order."""

    models: list[str]
    w: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.models)
        self.w = np.asarray(self.w, dtype=float)
        if len(set(self.models)) != n:
            raise ValueError("duplicate model ids")
        if self.w.shape != (n, n):
            raise ValueError(f"w must be {n}x{n}, got {self.w.shape}")
        if not np.all(np.isfinite(self.w)) or np.any(self.w < 0):
            raise ValueError("counts must be finite and nonnegative")
        if np.any(np.diagonal(self.w) != 0):
            raise ValueError("diagonal of w must be zero")

    def index(self) -> dict[str, int]:
        return {m: i for i, m in enumerate(self.models)}


@dataclass
class RatingEntry:
    rating: float
    ci_lower: float | None = None
    ci_upper: float | None = None
    battle_count: int = 0
    component: int = 0


@dataclass
class RatingTable:
    """Per-model ratings with optional bootstrap bounds."""

    entries: dict[str, RatingEntry] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def rating(self, model: str) -> float:
        return self.entries[model].rating

    def sorted_models(self) -> list[str]:
        """Model ids ordered by rating descending, ties broken by id."""
        return sorted(self.entries, key=lambda m: (-self.entries[m].rating, m))


class ConvergenceError(RuntimeError):
    """The solver ran out of iterations; `best_fit` holds the best iterate."""

    def __init__(self, message: str, best_fit: RatingTable):
        super().__init__(message)
        self.best_fit = best_fit


def expected_score(r_i: float, r_j: float, alpha: float = 400.0) -> float:
    """Probability that a player rated r_i beats one rated r_j."""
    if not (math.isfinite(r_i) and math.isfinite(r_j)):
        raise ValueError("ratings must be finite")
    if not (math.isfinite(alpha) and alpha > 0):
        raise ValueError("alpha must be positive and finite")
    return 1.0 / (1.0 + 10.0 ** ((r_j - r_i) / alpha))


def outcome_score(outcome: BattleOutcome, policy: BothBadPolicy) -> float | None:
    """Match score S for the left model; None means the record is discarded."""
    if outcome is BattleOutcome.A_WINS:
        return 1.0
    if outcome is BattleOutcome.B_WINS:
        return 0.0
    if outcome is BattleOutcome.TIE:
        return 0.5
    return 0.5 if policy is BothBadPolicy.AS_TIE else None


def elo_update(
    r_i: float,
    r_j: float,
    outcome: BattleOutcome,
    config: RatingConfig = RatingConfig(),
) -> tuple[float, float]:
    """One online Elo step; returns the pair's new ratings.

    The update is exactly zero-sum: the loser's expectation is computed as
    the complement of the winner's, so rating mass is conserved to within
    floating-point rounding of the shared delta.
    """
    s = outcome_score(outcome, config.bothbad_policy)
    if s is None:
        return r_i, r_j
    e_i = expected_score(r_i, r_j, config.alpha)
    e_j = 1.0 - e_i
    return (
        r_i + config.k_factor * (s - e_i),
        r_j + config.k_factor * ((1.0 - s) - e_j),
    )


def replay_online_elo(
    battles: Iterable[BattleRecord],
    config: RatingConfig = RatingConfig(),
) -> RatingTable:
    """Apply elo_update over battles in sequence order.

    Record weights are ignored here: each record is one match.  Discarded
    records (BothBad under the discard policy) register the models at the
    initial rating but move nothing and do not count as battles.
    """
    ratings: dict[str, float] = {}
    played: dict[str, int] = {}
    for battle in battles:
        for model in (battle.model_a, battle.model_b):
            ratings.setdefault(model, config.initial_rating)
            played.setdefault(model, 0)
        if outcome_score(battle.outcome, config.bothbad_policy) is None:
            continue
        r_a, r_b = elo_update(
            ratings[battle.model_a], ratings[battle.model_b], battle.outcome, config
        )
        ratings[battle.model_a] = r_a
        ratings[battle.model_b] = r_b
        played[battle.model_a] += 1
        played[battle.model_b] += 1
    return RatingTable(
        entries={
            m: RatingEntry(rating=r, battle_count=played[m]) for m, r in ratings.items()
        }
    )


def build_pairwise_counts(
    battles: Iterable[BattleRecord],
    config: RatingConfig = RatingConfig(),
) -> PairwiseCounts:
    """Aggregate battles into the win matrix the Bradley-Terry fit consumes.

    Every vote is duplicated, then each tie (and BothBad under the as-tie
    policy) sends one of its two copies to each direction.  A decisive vote
    therefore adds 2x its weight to one cell; a tie adds 1x to both cells.
    """
    battles = list(battles)
    models = sorted({m for b in battles for m in (b.model_a, b.model_b)})
    index = {m: i for i, m in enumerate(models)}
    w = np.zeros((len(models), len(models)))
    for battle in battles:
        i, j = index[battle.model_a], index[battle.model_b]
        s = outcome_score(battle.outcome, config.bothbad_policy)
        if s is None:
            continue
        if s == 1.0:
            w[i, j] += 2.0 * battle.weight
        elif s == 0.0:
            w[j, i] += 2.0 * battle.weight
        else:
            w[i, j] += battle.weight
            w[j, i] += battle.weight
    return PairwiseCounts(models=models, w=w)


def _log_likelihood(theta: np.ndarray, w: np.ndarray, lam: float) -> float:
    diffs = theta[:, None] - theta[None, :]
    # log sigmoid, stable for large negative differences
    log_p = -np.logaddexp(0.0, -diffs)
    value = float((w * log_p).sum())
    if lam:
        value -= 0.5 * lam * float(theta @ theta)
    return value


def _solve_component(
    w: np.ndarray,
    tol_theta: float,
    max_iterations: int,
    lam: float,
) -> tuple[np.ndarray, bool]:
    """Damped Newton ascent on the (optionally regularized) log-likelihood.

    Works in natural-log parameters kept mean-zero; returns (theta, converged).
    """
    m = w.shape[0]
    theta = np.zeros(m)
    best = theta.copy()
    best_gap = math.inf
    for _ in range(max_iterations):
        diffs = theta[:, None] - theta[None, :]
        p = expit(diffs)
        grad = (w * (1.0 - p)).sum(axis=1) - (w.T * p).sum(axis=1)
        if lam:
            grad -= lam * theta
        gap = float(np.abs(grad).max())
        if gap < best_gap:
            best_gap = gap
            best = theta.copy()
        if gap <= tol_theta:
            return theta, True

        curvature = (w + w.T) * p * (1.0 - p)
        np.fill_diagonal(curvature, 0.0)
        hessian = np.diag(curvature.sum(axis=1)) - curvature
        # ridge keeps the system solvable along the all-ones null direction
        ridge = lam + 1e-10 * max(1.0, float(hessian.diagonal().max()))
        hessian[np.diag_indices(m)] += ridge
        try:
            step = np.linalg.solve(hessian, grad)
        except np.linalg.LinAlgError:
            step = grad / max(float(hessian.diagonal().max()), 1.0)

        objective = _log_likelihood(theta, w, lam)
        slope = float(grad @ step)
        if slope <= 0:  # not an ascent direction; fall back to the gradient
            step = grad / max(float(hessian.diagonal().max()), 1.0)
            slope = float(grad @ step)
        t = 1.0
        moved = False
        for _ in range(60):
            candidate = theta + t * step
            candidate -= candidate.mean()
            if _log_likelihood(candidate, w, lam) >= objective + 1e-4 * t * slope:
                theta = candidate
                moved = True
                break
            t *= 0.5
        if not moved:
            break  # flat to machine precision; report the best iterate
    return best, False


def _weak_components(w: np.ndarray) -> list[np.ndarray]:
    """Index groups of the undirected comparison graph, ordered by first member."""
    _, labels = connected_components(w + w.T > 0, directed=False)
    order: dict[int, int] = {}
    for label in labels:
        order.setdefault(int(label), len(order))
    groups: list[list[int]] = [[] for _ in range(len(order))]
    for i, label in enumerate(labels):
        groups[order[int(label)]].append(i)
    return [np.asarray(g) for g in groups]


def _is_strongly_connected(w: np.ndarray) -> bool:
    n_strong, _ = connected_components(w > 0, directed=True, connection="strong")
    return n_strong == 1


def fit_bradley_terry(
    counts: PairwiseCounts,
    config: RatingConfig = RatingConfig(),
) -> RatingTable:
    """Maximum-likelihood ratings from a pairwise win matrix.

    Solves for the ratings maximizing sum(W_ij * log P(i beats j)) under the
    base-10 logistic model, by damped Newton iteration until every partial
    derivative (on the rating scale) is within convergence_tol.  Ratings are
    centered so each connected component has mean `anchor`; entries carry the
    component index, and no ordering across components is implied.

    When a component's win digraph is not strongly connected the MLE is
    unbounded (someone never lost); those components are fit with the
    config's tiny L2 regularization instead, which is deterministic and
    documented but no longer the exact MLE.
    """
    n = len(counts.models)
    if n < 2:
        raise ValueError("need at least 2 models to fit ratings")
    scale = LN10 / config.alpha
    tol_theta = config.convergence_tol / scale
    ratings = np.full(n, config.anchor)
    component_of = np.zeros(n, dtype=int)
    failed: list[int] = []

    for comp_idx, members in enumerate(_weak_components(counts.w)):
        component_of[members] = comp_idx
        if len(members) == 1:
            continue
        sub = counts.w[np.ix_(members, members)]
        lam = 0.0 if _is_strongly_connected(sub) else config.regularization
        theta, converged = _solve_component(sub, tol_theta, config.max_iterations, lam)
        local = theta / scale
        ratings[members] = local + (config.anchor - local.mean())
        if not converged:
            failed.append(comp_idx)

    row = counts.w.sum(axis=1)
    col = counts.w.sum(axis=0)
    table = RatingTable(
        entries={
            m: RatingEntry(
                rating=float(ratings[i]),
                battle_count=int(round((row[i] + col[i]) / 2.0)),
                component=int(component_of[i]),
            )
            for i, m in enumerate(counts.models)
        }
    )
    if failed:
        raise ConvergenceError(
            f"no convergence within {config.max_iterations} iterations "
            f"(components {failed})",
            best_fit=table,
        )
    return table


def bootstrap_confidence_interval(
    battles: Sequence[BattleRecord],
    rounds: int = 100,
    seed: int = 0,
    config: RatingConfig = RatingConfig(),
) -> RatingTable:
    """Point fit plus min/max rating bounds over resampled refits.

    Each round resamples len(battles) records with replacement and refits;
    a model's bounds are the lowest and highest rating it received across
    rounds.  A model absent from every resample degenerates to a zero-width
    interval at its point estimate.  Fully reproducible for a fixed seed.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    battles = list(battles)
    point = fit_bradley_terry(build_pairwise_counts(battles, config), config)
    n = len(battles)
    rng = np.random.default_rng(seed)
    sampled: dict[str, list[float]] = {m: [] for m in point.entries}
    for _ in range(rounds):
        for attempt in range(100):
            idx = rng.integers(0, n, size=n)
            resample = [battles[i] for i in idx]
            models = {m for b in resample for m in (b.model_a, b.model_b)}
            if len(models) >= 2:
                break
        else:
            raise RuntimeError("could not draw a resample with at least 2 models")
        refit = fit_bradley_terry(build_pairwise_counts(resample, config), config)
        for model, entry in refit.entries.items():
            sampled[model].append(entry.rating)
    for model, entry in point.entries.items():
        values = sampled[model]
        entry.ci_lower = min(values) if values else entry.rating
        entry.ci_upper = max(values) if values else entry.rating
    return point


@dataclass
class LabeledMatrix:
    """A square matrix with model ids on both axes; NaN marks undefined cells."""

    models: list[str]
    values: np.ndarray

    def cell(self, model_a: str, model_b: str) -> float:
        index = {m: i for i, m in enumerate(self.models)}
        return float(self.values[index[model_a], index[model_b]])

    def reordered(self, order: Sequence[str]) -> "LabeledMatrix":
        index = {m: i for i, m in enumerate(self.models)}
        idx = np.asarray([index[m] for m in order])
        return LabeledMatrix(models=list(order), values=self.values[np.ix_(idx, idx)])

    def to_csv(self) -> str:
        """CSV with header row/column of model ids; undefined cells are empty."""
        lines = ["model," + ",".join(self.models)]
        for i, model in enumerate(self.models):
            cells = [_format_number(v) for v in self.values[i]]
            lines.append(model + "," + ",".join(cells))
        return "\n".join(lines) + "\n"


def _format_number(value: float) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if math.isnan(value):
        return ""
    if float(value).is_integer():
        return str(int(value))
    return format(float(value), ".6g")


def win_fraction_matrix(battles: Iterable[BattleRecord]) -> LabeledMatrix:
    """Head-to-head win fractions over decisive battles only.

    cell(i, j) = wins of i over j / decisive battles between them, unweighted;
    ties and BothBad votes are excluded, and pairs with no decisive battle
    are NaN.  Defined cells satisfy cell(i, j) + cell(j, i) = 1.
    """
    battles = list(battles)
    models = sorted({m for b in battles for m in (b.model_a, b.model_b)})
    index = {m: i for i, m in enumerate(models)}
    wins = np.zeros((len(models), len(models)))
    for battle in battles:
        i, j = index[battle.model_a], index[battle.model_b]
        if battle.outcome is BattleOutcome.A_WINS:
            wins[i, j] += 1
        elif battle.outcome is BattleOutcome.B_WINS:
            wins[j, i] += 1
    decisive = wins + wins.T
    with np.errstate(invalid="ignore"):
        fractions = np.where(decisive > 0, wins / np.where(decisive > 0, decisive, 1), np.nan)
    np.fill_diagonal(fractions, np.nan)
    return LabeledMatrix(models=models, values=fractions)


def battle_count_matrix(
    battles: Iterable[BattleRecord], include_ties: bool = False
) -> LabeledMatrix:
    """Symmetric battle counts per pair; ties and BothBad drop out by default."""
    battles = list(battles)
    models = sorted({m for b in battles for m in (b.model_a, b.model_b)})
    index = {m: i for i, m in enumerate(models)}
    counts = np.zeros((len(models), len(models)), dtype=int)
    decisive = (BattleOutcome.A_WINS, BattleOutcome.B_WINS)
    for battle in battles:
        if not include_ties and battle.outcome not in decisive:
            continue
        i, j = index[battle.model_a], index[battle.model_b]
        counts[i, j] += 1
        counts[j, i] += 1
    return LabeledMatrix(models=models, values=counts)


def average_win_rate(table: RatingTable, alpha: float = 400.0) -> dict[str, float]:
    """Mean predicted win probability of each model against all the others."""
    models = sorted(table.entries)
    if len(models) < 2:
        raise ValueError("need at least 2 models for average win rates")
    result: dict[str, float] = {}
    for m in models:
        others = [
            expected_score(table.rating(m), table.rating(o), alpha)
            for o in models
            if o != m
        ]
        result[m] = float(np.mean(others))
    return result


def leaderboard_csv(table: RatingTable) -> str:
    """Leaderboard serialization: rating-descending, 6 significant digits."""
    lines = ["model,rating,ci_lower,ci_upper,battles"]
    for model in table.sorted_models():
        e = table.entries[model]
        lines.append(
            ",".join(
                [
                    model,
                    format(e.rating, ".6g"),
                    "" if e.ci_lower is None else format(e.ci_lower, ".6g"),
                    "" if e.ci_upper is None else format(e.ci_upper, ".6g"),
                    str(e.battle_count),
                ]
            )
        )
    return "\n".join(lines) + "\n"
