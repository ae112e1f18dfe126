"""Confidence intervals and head-to-head analytics.

The second half shows the case that motivates model ratings in the first
place: with skewed pairing counts, raw win fractions and fitted ratings can
disagree about who is best, and the ratings are the ones to trust.
"""
from modelarena import (
    average_win_rate,
    battle_count_matrix,
    bootstrap_confidence_interval,
    build_pairwise_counts,
    fit_bradley_terry,
    imbalance_fixture,
    win_fraction_matrix,
)
from modelarena.simulate import SyntheticPopulation, simulate_votes


def main() -> None:
    pop = SyntheticPopulation(
        true_ratings={"heron": 1120.0, "gecko": 1050.0, "vole": 950.0, "skink": 880.0},
        tie_rate=0.15,
    )
    battles = simulate_votes(pop, 600, seed=2)
    print(f"simulated {len(battles)} votes from 4 models with known gaps")

    print()
    print("== bootstrap confidence intervals (100 resampling rounds) ==")
    table = bootstrap_confidence_interval(battles, rounds=100, seed=0)
    for model in table.sorted_models():
        entry = table.entries[model]
        print(
            f"  {model:6s} {entry.rating:7.1f}"
            f"  [{entry.ci_lower:7.1f}, {entry.ci_upper:7.1f}]"
            f"  over {entry.battle_count} battles"
        )

    order = table.sorted_models()
    print()
    print("== head-to-head matrices (rows ordered by rating) ==")
    print("decisive win fraction, row beats column:")
    print(win_fraction_matrix(battles).reordered(order).to_csv())
    print("battle counts (ties excluded by default):")
    print(battle_count_matrix(battles).reordered(order).to_csv())
    rates = average_win_rate(table)
    print("predicted average win rate against the field:")
    for model in order:
        print(f"  {model:6s} {rates[model]:.3f}")

    print()
    print("== when win fractions mislead ==")
    skewed = imbalance_fixture()
    fitted = fit_bradley_terry(build_pairwise_counts(skewed))
    first, second = fitted.sorted_models()[:2]
    head = win_fraction_matrix(skewed).cell(first, second)
    print(f"the fixture pairs '{first}' mostly against a much weaker model")
    print(f"  rating({first}) = {fitted.rating(first):.1f}")
    print(f"  rating({second}) = {fitted.rating(second):.1f}")
    print(f"  yet winfrac({first} over {second}) = {head:.3f} < 0.5")
    print("the fit pools strength of schedule; the single cell does not")


if __name__ == "__main__":
    main()
