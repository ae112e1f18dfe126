"""Automated judges: prompt templates, response parsing, and how well the
judge scores track human votes.

The "judge" here is scripted, so the demo runs offline, but the plumbing is
exactly what a live multimodal model would go through.
"""
import random

from modelarena import (
    BattleOutcome,
    JudgeAspect,
    Task,
    aggregate_scores,
    encode_vote,
    load_template,
    parse_judge_response,
    pearson_correlation,
    render_judge_prompt,
)
from modelarena.judging import correlation_report


def main() -> None:
    print("== the judge sees a fixed instruction with the prompt inlined ==")
    template = load_template(Task.TEXT_TO_VIDEO, JudgeAspect.SEMANTIC_CONSISTENCY)
    rendered = render_judge_prompt(template, "a red bicycle leaning on a fence")
    for line in rendered.splitlines()[:6]:
        print(f"  {line}")
    print("  ...")

    print()
    print("== replies are parsed leniently ==")
    reply = """Sure! Looking at the frames I can see a bicycle, but it is
blue rather than red.

```json
{"score": 6.5, "reasoning": "object correct, colour wrong"}
```"""
    response = parse_judge_response(reply, JudgeAspect.SEMANTIC_CONSISTENCY)
    print(f"  score={response.score}  reasoning={response.reasoning!r}")
    quality = parse_judge_response(
        '{"score": [7, 9], "reasoning": "clean but slightly plastic"}',
        JudgeAspect.PERCEPTUAL_QUALITY,
    )
    print(f"  quality pair (naturalness, artifacts) = {quality.score}")

    print()
    print("== aggregation punishes one-sided outputs ==")
    for semantics, naturalness, artifacts in ((9, 4, 4), (9, 9, 9), (0, 10, 10)):
        scores = aggregate_scores(semantics, naturalness, artifacts)
        print(
            f"  semantics={semantics} quality={scores.quality:>4.1f}"
            f" -> overall={scores.overall:.2f}"
        )

    print()
    print("== correlating a noisy judge with human votes ==")
    rng = random.Random(7)
    votes, scores = [], {}
    for k in range(300):
        bid = f"battle{k:03d}"
        # the left output is truly better in 60% of battles
        left_better = rng.random() < 0.6
        human = BattleOutcome.A_WINS if left_better else BattleOutcome.B_WINS
        if rng.random() < 0.1:
            human = BattleOutcome.TIE  # humans shrug sometimes
        votes.append((bid, human))
        for side in ("a", "b"):
            good = (side == "a") == left_better
            base = 8.0 if good else 4.0
            s = min(10.0, max(0.0, rng.gauss(base, 1.5)))
            n = min(10.0, max(0.0, rng.gauss(base, 1.5)))
            scores[(bid, side)] = aggregate_scores(s, n, n)
    report = correlation_report(
        {"scripted-judge": scores}, {Task.TEXT_TO_VIDEO: votes}
    )
    print(report.format_table())

    encoded = [encode_vote(outcome) for _, outcome in votes]
    diffs = [
        scores[(bid, "a")].overall - scores[(bid, "b")].overall for bid, _ in votes
    ]
    print()
    print(
        "  (same thing by hand: r ="
        f" {pearson_correlation(encoded, diffs):+.4f} on the overall subscore)"
    )


if __name__ == "__main__":
    main()
