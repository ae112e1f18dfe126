"""Acceptance gate.

Each test checks one release criterion end to end and registers a pass/fail
line in the terminal summary (see conftest.criterion).  Tolerances here are
the shipped contract; tighten them only with an oracle to back it up.
"""
import json
import math
import random
import time

import pytest

from modelarena.cli import main as cli_main
from modelarena.common import Task
from modelarena.judging import (
    aggregate_scores,
    correlate_metric_with_votes,
    encode_vote,
    pearson_correlation,
)
from modelarena.museum import PairingStrategy
from modelarena.ratings import (
    BattleOutcome,
    BattleRecord,
    bootstrap_confidence_interval,
    build_pairwise_counts,
    expected_score,
    fit_bradley_terry,
    leaderboard_csv,
    replay_online_elo,
    win_fraction_matrix,
)
from modelarena.simulate import (
    SyntheticPopulation,
    imbalance_fixture,
    recovery_experiment,
    simulate_votes,
)
from modelarena.store import VoteStore

from conftest import criterion
from test_ratings import fd_gradient_max, two_player

FIVE_MODELS = SyntheticPopulation(
    true_ratings={f"m{k}": 1200.0 - 100.0 * k for k in range(5)},
    tie_rate=0.1,
)


def test_expected_score_worked_example():
    with criterion("expected score: E(1200 vs 1100, alpha=400) = 0.6401 +/- 1e-4"):
        assert expected_score(1200, 1100, 400) == pytest.approx(0.6401, abs=1e-4)


def test_online_elo_conserves_rating_mass():
    with criterion("online Elo conserves total rating over 10k votes (drift < 1e-6)"):
        battles = simulate_votes(FIVE_MODELS, 10_000, seed=7)
        table = replay_online_elo(battles)
        total = sum(table.rating(m) for m in table.entries)
        assert abs(total - 1000.0 * len(table.entries)) < 1e-6


def test_two_player_closed_form_gap():
    with criterion("two-player 3:1 record fits a gap of 400*log10(3) +/- 0.5"):
        table = fit_bradley_terry(build_pairwise_counts(two_player(3, 1)))
        gap = table.rating("a") - table.rating("b")
        assert gap == pytest.approx(400 * math.log10(3), abs=0.5)


def test_tie_votes_split_into_half_wins():
    with criterion("ties split into half-wins: (A beats B) -> (2,0), (tie) -> (1,1)"):
        win = build_pairwise_counts([BattleRecord("A", "B", BattleOutcome.A_WINS)])
        assert win.w[0, 1] == 2.0 and win.w[1, 0] == 0.0
        tie = build_pairwise_counts([BattleRecord("A", "B", BattleOutcome.TIE)])
        assert tie.w[0, 1] == 1.0 and tie.w[1, 0] == 1.0


def test_fit_is_order_invariant():
    with criterion("fit agrees within 1e-6 across 100 shuffles of a 1000-vote log"):
        battles = simulate_votes(FIVE_MODELS, 1_000, seed=3)
        reference = fit_bradley_terry(build_pairwise_counts(battles))
        rng = random.Random(12345)
        for _ in range(100):
            rng.shuffle(battles)
            table = fit_bradley_terry(build_pairwise_counts(battles))
            for m in reference.entries:
                assert abs(table.rating(m) - reference.rating(m)) <= 1e-6


def test_gradient_vanishes_at_the_fit():
    with criterion(
        "finite-difference gradient at every fit <= 10x convergence tolerance"
    ):
        fixtures = [
            two_player(3, 1),
            two_player(2, 1, ties=1),
            simulate_votes(FIVE_MODELS, 2_000, seed=5),
            imbalance_fixture(),
        ]
        for battles in fixtures:
            counts = build_pairwise_counts(battles)
            table = fit_bradley_terry(counts)
            assert fd_gradient_max(counts, table) <= 1e-7


def test_rating_recovery_from_synthetic_votes():
    with criterion(
        "recovery: 5 models, 100-pt gaps, 2000 votes -> >=95/100 seeds exact, "
        "spearman >= 0.9, < 60 s"
    ):
        pop = SyntheticPopulation(
            true_ratings={f"m{k}": 1200.0 - 100.0 * k for k in range(5)}
        )
        start = time.monotonic()
        report = recovery_experiment(
            pop,
            n=2_000,
            pairing=PairingStrategy.UNIFORM_PAIR,
            seeds=list(range(100)),
            workers=4,
        )
        elapsed = time.monotonic() - start
        exact = sum(r.exact_order for r in report.results)
        assert exact >= 95
        assert report.rank_correlation >= 0.9
        assert elapsed < 60.0


def test_bootstrap_reproducible_and_well_shaped():
    with criterion(
        "bootstrap CIs: bit-identical under a fixed seed, lower <= upper, "
        "degenerate fixture has zero width"
    ):
        battles = simulate_votes(FIVE_MODELS, 400, seed=9)
        one = bootstrap_confidence_interval(battles, rounds=100, seed=4)
        two = bootstrap_confidence_interval(battles, rounds=100, seed=4)
        assert one.entries == two.entries  # exact float equality, not approx
        for entry in one.entries.values():
            assert entry.ci_lower <= entry.ci_upper
            assert entry.ci_lower <= entry.rating <= entry.ci_upper
        same = [BattleRecord("a", "b", BattleOutcome.TIE)] * 50
        degenerate = bootstrap_confidence_interval(same, rounds=100, seed=4)
        for entry in degenerate.entries.values():
            assert entry.ci_upper - entry.ci_lower == 0.0


def test_top_rated_model_may_lose_its_head_to_head():
    with criterion(
        "skewed pairing fixture: leader outrates the runner-up yet wins under "
        "half of their direct battles"
    ):
        battles = imbalance_fixture()
        table = fit_bradley_terry(build_pairwise_counts(battles))
        first, second = table.sorted_models()[:2]
        assert table.rating(first) > table.rating(second)
        head_to_head = win_fraction_matrix(battles).cell(first, second)
        assert head_to_head < 0.5


def test_reveal_forfeits_the_vote(arena):
    with criterion(
        "service: reveal-then-vote is not counted and leaves the leaderboard "
        "unchanged; vote-then-reveal is counted"
    ):
        client = arena()
        for outcome in ("leftvote", "rightvote"):
            sample = client.post(
                "/v1/battles/sample", json={"task": "text_to_image"}
            ).json()
            vote = client.post(
                f"/v1/battles/{sample['battle_id']}/vote", json={"outcome": outcome}
            )
            assert vote.json()["counted"] is True
            reveal = client.post(f"/v1/battles/{sample['battle_id']}/reveal")
            assert reveal.json() == vote.json()["reveal"]
        board = client.get("/v1/leaderboard/text_to_image").json()
        sample = client.post(
            "/v1/battles/sample", json={"task": "text_to_image"}
        ).json()
        client.post(f"/v1/battles/{sample['battle_id']}/reveal")
        vote = client.post(
            f"/v1/battles/{sample['battle_id']}/vote", json={"outcome": "leftvote"}
        )
        assert vote.json()["counted"] is False
        assert client.get("/v1/leaderboard/text_to_image").json() == board


def _brute_pearson(xs, ys):
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = math.fsum((x - mx) ** 2 for x in xs)
    vy = math.fsum((y - my) ** 2 for y in ys)
    return cov / math.sqrt(vx * vy)


def test_pearson_against_brute_force():
    with criterion(
        "pearson: matches the brute-force formula within 1e-12; perfect "
        "agreement r=1; shuffled judge |r| < 0.1"
    ):
        rng = random.Random(99)
        for _ in range(20):
            xs = [rng.gauss(0, 1) for _ in range(100)]
            ys = [rng.gauss(0, 1) for _ in range(100)]
            assert pearson_correlation(xs, ys) == pytest.approx(
                _brute_pearson(xs, ys), abs=1e-12
            )
        votes = [rng.choice((BattleOutcome.A_WINS, BattleOutcome.B_WINS)) for _ in range(200)]
        encoded = [encode_vote(v) for v in votes]
        agreeing = [2.5 * x for x in encoded]
        assert pearson_correlation(encoded, agreeing) == pytest.approx(1.0, abs=1e-12)
        shuffled = list(encoded)
        rng.shuffle(shuffled)
        votes_1k = [
            rng.choice((BattleOutcome.A_WINS, BattleOutcome.B_WINS, BattleOutcome.TIE))
            for _ in range(1_000)
        ]
        judge = [rng.gauss(0, 1) for _ in range(1_000)]
        r = pearson_correlation([encode_vote(v) for v in votes_1k], judge)
        assert abs(r) < 0.1


def test_overall_score_is_the_geometric_mean():
    with criterion(
        "overall = sqrt(semantics * quality): (9, 4, 4) -> 6 exactly; zero "
        "annihilates; perfect scores stay 10"
    ):
        scores = aggregate_scores(semantics=9, naturalness=4, artifacts=4)
        assert scores.quality == 4.0
        assert scores.overall == 6.0
        assert aggregate_scores(0, 7, 9).overall == 0.0
        assert aggregate_scores(10, 10, 10).overall == 10.0


def test_vote_log_replay_reproduces_the_leaderboard(arena, tmp_path):
    with criterion("replaying the vote log reproduces the leaderboard CSV exactly"):
        client = arena()
        outcomes = ["leftvote", "rightvote", "leftvote", "tievote", "bothbad_vote"]
        for outcome in outcomes:
            sample = client.post(
                "/v1/battles/sample", json={"task": "text_to_image"}
            ).json()
            client.post(
                f"/v1/battles/{sample['battle_id']}/vote", json={"outcome": outcome}
            )

        def board_csv(store):
            battles = store.load_counted_votes(Task.TEXT_TO_IMAGE)
            return leaderboard_csv(
                bootstrap_confidence_interval(battles, rounds=100, seed=0)
            )

        state = client.app.state.arena
        original = board_csv(state.store)
        copy = tmp_path / "replayed.jsonl"
        copy.write_bytes(open(state.config.vote_log, "rb").read())
        fresh = VoteStore(copy)
        try:
            assert board_csv(fresh).encode() == original.encode()
        finally:
            fresh.close()


def test_bench_export_feeds_rank(tmp_path, capsys, monkeypatch):
    with criterion(
        "[informational] exported bench files ingest through `rank` and yield "
        "a model ordering"
    ):
        monkeypatch.chdir(tmp_path)
        from test_cli import THREE_TO_ONE, make_log

        log = make_log(tmp_path / "votes.jsonl", THREE_TO_ONE)
        store = VoteStore(log)
        bench = tmp_path / "bench.jsonl"
        count = store.export_bench(Task.TEXT_TO_IMAGE, bench)
        store.close()
        assert count == 4
        code = cli_main(
            ["rank", "--votes", str(bench), "--task", "text_to_image",
             "--out", str(tmp_path / "board.csv")]
        )
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        ordering = [line.split(",")[0] for line in lines[1:]]
        assert len(ordering) == 2
