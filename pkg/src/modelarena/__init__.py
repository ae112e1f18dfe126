"""Arena-style ranking of generative models from pairwise human votes.

The package covers the full loop: serving anonymous side-by-side battles
from a precomputed content pool, durably logging votes, fitting Elo and
Bradley-Terry ratings with bootstrap confidence intervals, head-to-head
analytics, a synthetic-vote validation harness, and tooling to correlate
automatic judge scores with the human votes.
"""
from .common import MediaType, Task, parse_task
from .judging import (
    JudgeAspect,
    JudgeParseError,
    JudgeResponse,
    JudgeTemplate,
    ScoreValidationError,
    SubScores,
    aggregate_scores,
    correlate_metric_with_votes,
    encode_vote,
    load_score_fixture,
    load_template,
    parse_judge_response,
    pearson_correlation,
    render_judge_prompt,
)
from .museum import (
    BattleSample,
    InMemoryPairHistory,
    ManifestError,
    Museum,
    MuseumEntry,
    NoEligiblePairError,
    PairingStrategy,
    SealedPair,
    ingest_manifest,
)
from .ratings import (
    BattleOutcome,
    BattleRecord,
    BothBadPolicy,
    ConvergenceError,
    LabeledMatrix,
    PairwiseCounts,
    RatingConfig,
    RatingEntry,
    RatingTable,
    average_win_rate,
    battle_count_matrix,
    bootstrap_confidence_interval,
    build_pairwise_counts,
    elo_update,
    expected_score,
    fit_bradley_terry,
    leaderboard_csv,
    replay_online_elo,
    win_fraction_matrix,
)
from .service import ConfigError, ServiceConfig, api_schema, create_app, load_service_config
from .simulate import (
    RecoveryReport,
    SyntheticPopulation,
    imbalance_fixture,
    parse_model_spec,
    recovery_experiment,
    simulate_votes,
)
from .store import (
    Battle,
    BattleState,
    DenylistFilter,
    DuplicateVoteError,
    Prompt,
    SafetyPolicy,
    UnknownBattleError,
    Vote,
    VoteStore,
    load_bench_file,
    moderate_prompt,
)

__version__ = "0.1.0"

__all__ = [
    "BattleOutcome",
    "BattleRecord",
    "BattleSample",
    "BattleState",
    "Battle",
    "BothBadPolicy",
    "ConfigError",
    "ConvergenceError",
    "DenylistFilter",
    "DuplicateVoteError",
    "InMemoryPairHistory",
    "JudgeAspect",
    "JudgeParseError",
    "JudgeResponse",
    "JudgeTemplate",
    "LabeledMatrix",
    "ManifestError",
    "MediaType",
    "Museum",
    "MuseumEntry",
    "NoEligiblePairError",
    "PairingStrategy",
    "PairwiseCounts",
    "Prompt",
    "RatingConfig",
    "RatingEntry",
    "RatingTable",
    "RecoveryReport",
    "SafetyPolicy",
    "ScoreValidationError",
    "SealedPair",
    "ServiceConfig",
    "SubScores",
    "SyntheticPopulation",
    "Task",
    "UnknownBattleError",
    "Vote",
    "VoteStore",
    "aggregate_scores",
    "api_schema",
    "average_win_rate",
    "battle_count_matrix",
    "bootstrap_confidence_interval",
    "build_pairwise_counts",
    "correlate_metric_with_votes",
    "create_app",
    "elo_update",
    "encode_vote",
    "expected_score",
    "fit_bradley_terry",
    "imbalance_fixture",
    "ingest_manifest",
    "leaderboard_csv",
    "load_bench_file",
    "load_score_fixture",
    "load_service_config",
    "load_template",
    "moderate_prompt",
    "parse_judge_response",
    "parse_model_spec",
    "parse_task",
    "pearson_correlation",
    "recovery_experiment",
    "render_judge_prompt",
    "replay_online_elo",
    "simulate_votes",
    "win_fraction_matrix",
    "__version__",
]
