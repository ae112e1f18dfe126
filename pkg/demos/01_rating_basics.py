"""Rating fundamentals: expected scores, online Elo, and Bradley-Terry fits.

Everything here runs on tiny hand-made vote sets so each number can be
checked against the closed forms printed alongside it.
"""
import math

from modelarena import (
    BattleOutcome,
    BattleRecord,
    build_pairwise_counts,
    expected_score,
    fit_bradley_terry,
    leaderboard_csv,
    replay_online_elo,
)


def main() -> None:
    print("== expected score ==")
    e = expected_score(1200, 1100, alpha=400)
    print(f"a 100-point favourite wins with probability {e:.4f}")
    print(f"complement check: {e:.4f} + {1 - e:.4f} = {e + (1 - e):.1f}")

    print()
    print("== online Elo ==")
    # six votes, played one at a time in arrival order
    votes = [
        BattleRecord("otter", "ibis", BattleOutcome.A_WINS),
        BattleRecord("otter", "ibis", BattleOutcome.A_WINS),
        BattleRecord("ibis", "marmot", BattleOutcome.B_WINS),
        BattleRecord("otter", "marmot", BattleOutcome.TIE),
        BattleRecord("marmot", "ibis", BattleOutcome.A_WINS),
        BattleRecord("otter", "ibis", BattleOutcome.B_WINS),
    ]
    table = replay_online_elo(votes)
    for model in table.sorted_models():
        print(f"  {model:8s} {table.rating(model):8.2f}")
    total = sum(table.rating(m) for m in table.entries)
    print(f"rating mass is conserved: total = {total:.6f} (3 models x 1000)")

    print()
    print("== tie splitting ==")
    counts = build_pairwise_counts(
        [
            BattleRecord("a", "b", BattleOutcome.A_WINS),
            BattleRecord("a", "b", BattleOutcome.TIE),
        ]
    )
    # one decisive vote doubles to (2, 0); one tie contributes (1, 1)
    print(f"weighted win counts for a>b: {counts.w[0, 1]:.0f}")
    print(f"weighted win counts for b>a: {counts.w[1, 0]:.0f}")

    print()
    print("== Bradley-Terry closed form ==")
    record = [BattleRecord("a", "b", BattleOutcome.A_WINS)] * 3 + [
        BattleRecord("a", "b", BattleOutcome.B_WINS)
    ]
    table = fit_bradley_terry(build_pairwise_counts(record))
    gap = table.rating("a") - table.rating("b")
    print(f"3:1 record  -> fitted gap {gap:.4f}")
    print(f"closed form -> 400*log10(3) = {400 * math.log10(3):.4f}")

    print()
    print("== leaderboard CSV ==")
    print(leaderboard_csv(table), end="")


if __name__ == "__main__":
    main()
