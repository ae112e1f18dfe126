"""Command-line entry points: rank, heatmap, simulate, correlate, serve.

Every command is deterministic given its input files and flags; randomness
enters only through explicit seed flags with documented defaults.  Output
CSV uses '.' as the decimal separator and 6 significant digits.  Exit codes:
0 success, 1 internal error, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .common import Task, parse_task
from .judging import SUBSCORES, correlate_metric_with_votes, load_score_fixture
from .museum import PairingStrategy
from .ratings import (
    BattleRecord,
    BothBadPolicy,
    RatingConfig,
    average_win_rate,
    battle_count_matrix,
    bootstrap_confidence_interval,
    build_pairwise_counts,
    fit_bradley_terry,
    leaderboard_csv,
    win_fraction_matrix,
)
from .simulate import SyntheticPopulation, parse_model_spec, recovery_experiment
from .store import SafetyPolicy, VoteStore, load_bench_file

_EPILOG = "CSV output uses '.' as the decimal separator and 6 significant digits."


def _write_text(path: str | Path, text: str) -> None:
    """Atomic write: no partial file is left behind on failure."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _load_votes(
    path: str, task: Task | None, safety: SafetyPolicy
) -> list[BattleRecord]:
    """Read battles from either a vote log or a bench export file.

    The two formats are sniffed from the first line: log records carry
    record_type, bench files start with a metadata line carrying count.
    """
    file = Path(path)
    if not file.exists():
        raise ValueError(f"no such vote file: {path}")
    first = ""
    with open(file, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                first = line
                break
    if not first:
        return []
    try:
        head = json.loads(first)
    except ValueError as exc:
        raise ValueError(f"{path}: not line-delimited JSON: {exc}") from None
    if isinstance(head, dict) and "record_type" in head:
        store = VoteStore(file)
        try:
            return store.load_counted_votes(task, safety)
        finally:
            store.close()
    if isinstance(head, dict) and "count" in head:
        if task is not None and head.get("task") != task.value:
            raise ValueError(
                f"{path}: bench file holds {head.get('task')!r} votes, not {task.value!r}"
            )
        return load_bench_file(file)
    raise ValueError(f"{path}: unrecognized vote file format")


def _rating_config(args: argparse.Namespace) -> RatingConfig:
    return RatingConfig(bothbad_policy=BothBadPolicy(args.bothbad))


def cmd_rank(args: argparse.Namespace) -> int:
    task = parse_task(args.task)
    config = _rating_config(args)
    battles = _load_votes(args.votes, task, SafetyPolicy(args.safety))
    if not battles:
        print("no counted votes", file=sys.stderr)
        return 2
    models = {m for b in battles for m in (b.model_a, b.model_b)}
    if len(models) < 2:
        print("need counted votes between at least 2 models", file=sys.stderr)
        return 2
    table = bootstrap_confidence_interval(
        battles, rounds=args.rounds, seed=args.seed, config=config
    )
    csv = leaderboard_csv(table)
    print(csv, end="")
    _write_text(args.out, csv)
    return 0


def cmd_heatmap(args: argparse.Namespace) -> int:
    task = parse_task(args.task)
    config = _rating_config(args)
    battles = _load_votes(args.votes, task, SafetyPolicy(args.safety))
    models = sorted({m for b in battles for m in (b.model_a, b.model_b)})
    if len(models) < 2:
        csv = "model\n"
    else:
        table = fit_bradley_terry(build_pairwise_counts(battles, config), config)
        order = table.sorted_models()
        if args.kind == "winfrac":
            csv = win_fraction_matrix(battles).reordered(order).to_csv()
        elif args.kind == "count":
            csv = (
                battle_count_matrix(battles, include_ties=args.include_ties)
                .reordered(order)
                .to_csv()
            )
        else:
            rates = average_win_rate(table, alpha=config.alpha)
            lines = ["model,average_win_rate"]
            lines += [f"{m},{rates[m]:.6g}" for m in order]
            csv = "\n".join(lines) + "\n"
    print(csv, end="")
    if args.out:
        _write_text(args.out, csv)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    pop = SyntheticPopulation(
        true_ratings=parse_model_spec(args.models),
        tie_rate=args.tie_rate,
        bothbad_rate=args.bothbad_rate,
        noise=args.noise,
    )
    pairing = (
        PairingStrategy.LEAST_BATTLED_PAIR
        if args.pairing == "balanced"
        else PairingStrategy.UNIFORM_PAIR
    )
    report = recovery_experiment(
        pop,
        n=args.n,
        pairing=pairing,
        seeds=list(range(args.seed_base, args.seed_base + args.seeds)),
        config=RatingConfig(),
        workers=args.workers,
    )
    print(report.format_summary())
    if args.report:
        report.write_records(args.report)
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    scores_by_metric = load_score_fixture(args.scores)
    store = VoteStore(args.votes)
    try:
        voted = store.counted_votes()
    finally:
        store.close()
    votes_by_task: dict[Task, list[tuple[str, object]]] = {}
    for vote, battle in voted:
        votes_by_task.setdefault(battle.task, []).append(
            (vote.battle_id, vote.outcome)
        )
    cells: dict = {}
    for metric, scores in scores_by_metric.items():
        cells[metric] = {}
        for task, votes in votes_by_task.items():
            # tasks the metric does not cover at all stay blank
            if not any(
                (bid, side) in scores for bid, _ in votes for side in ("a", "b")
            ):
                continue
            cells[metric][task] = {
                sub: correlate_metric_with_votes(scores, votes, sub)
                for sub in SUBSCORES
            }
    tasks = sorted(
        {t for per_metric in cells.values() for t in per_metric}, key=lambda t: t.value
    )
    if not tasks:
        print("no overlapping battles between scores and votes", file=sys.stderr)
        return 2
    header = ["metric"] + [t.value for t in tasks]
    rows = [header]
    for metric in sorted(cells):
        row = [metric]
        for t in tasks:
            value = cells[metric].get(t, {}).get(args.subscore)
            row.append("n/a" if value is None else f"{value:+.4f}")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    if args.report:
        lines = [
            json.dumps(
                {
                    "metric": metric,
                    "task": t.value,
                    "subscore": sub,
                    "r": cells[metric][t][sub],
                }
            )
            for metric in sorted(cells)
            for t in sorted(cells[metric], key=lambda t: t.value)
            for sub in SUBSCORES
        ]
        _write_text(args.report, "\n".join(lines) + "\n")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import load_service_config, run_service

    config = load_service_config(args.config)
    try:
        run_service(config)
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelarena",
        description="Rank generative models from pairwise human votes.",
        epilog=_EPILOG,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    tasks = [t.value for t in Task]

    rank = sub.add_parser("rank", help="Bradley-Terry leaderboard with bootstrap CI")
    rank.add_argument("--votes", required=True, help="vote log or bench export file")
    rank.add_argument("--task", required=True, choices=tasks)
    rank.add_argument("--rounds", type=int, default=100, help="bootstrap rounds (default 100)")
    rank.add_argument("--bothbad", choices=["tie", "discard"], default="tie")
    rank.add_argument("--seed", type=int, default=0, help="bootstrap seed (default 0)")
    rank.add_argument("--safety", choices=["all", "safe_only"], default="all")
    rank.add_argument("--out", default="leaderboard.csv", help="CSV output path")
    rank.set_defaults(func=cmd_rank)

    heatmap = sub.add_parser("heatmap", help="head-to-head matrices as CSV")
    heatmap.add_argument("--votes", required=True)
    heatmap.add_argument("--task", required=True, choices=tasks)
    heatmap.add_argument("--kind", required=True, choices=["winfrac", "count", "avgwin"])
    heatmap.add_argument("--include-ties", action="store_true")
    heatmap.add_argument("--bothbad", choices=["tie", "discard"], default="tie")
    heatmap.add_argument("--safety", choices=["all", "safe_only"], default="all")
    heatmap.add_argument("--out", default=None, help="optional CSV output path")
    heatmap.set_defaults(func=cmd_heatmap)

    simulate = sub.add_parser("simulate", help="recovery experiment on synthetic votes")
    simulate.add_argument("--models", required=True, help="name:rating,name:rating,...")
    simulate.add_argument("--n", type=int, required=True, help="votes per seed")
    simulate.add_argument("--seeds", type=int, required=True, help="number of seeds")
    simulate.add_argument("--seed-base", type=int, default=0, help="first seed (default 0)")
    simulate.add_argument("--pairing", choices=["uniform", "balanced"], default="uniform")
    simulate.add_argument("--tie-rate", type=float, default=0.0)
    simulate.add_argument("--bothbad-rate", type=float, default=0.0)
    simulate.add_argument("--noise", type=float, default=0.0)
    simulate.add_argument("--workers", type=int, default=None)
    simulate.add_argument("--report", default=None, help="line-delimited report path")
    simulate.set_defaults(func=cmd_simulate)

    correlate = sub.add_parser("correlate", help="judge-vs-human correlation table")
    correlate.add_argument("--scores", required=True, help="judge score fixture file")
    correlate.add_argument("--votes", required=True, help="vote log file")
    correlate.add_argument("--subscore", required=True, choices=list(SUBSCORES))
    correlate.add_argument("--report", default=None)
    correlate.set_defaults(func=cmd_correlate)

    serve = sub.add_parser("serve", help="run the arena HTTP service")
    serve.add_argument("--config", required=True, help="JSON config file")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
