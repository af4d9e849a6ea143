"""Overstatements, error bounds, weight families, and the sample statistic."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from electaudit.discrepancy import (
    HandTally,
    WeightSpec,
    bound_e_plus,
    bound_fraction,
    bound_supermajority,
    bounds_e_plus,
    net_overstatement,
    overstatement,
    overstatement_rows,
    sample_statistic,
    total_overstatement,
    weight_apply,
    weight_invert,
)
from electaudit.errors import (
    BelowRange,
    EmptySample,
    NegativeCount,
    PrecinctMismatch,
)
from electaudit.model import apparent_outcome, pool_losers

VOTE_ROWS = st.lists(st.integers(0, 200), min_size=2, max_size=6)


def weight_families(b):
    return [
        WeightSpec.identity(),
        WeightSpec.per_opportunity(b),
        WeightSpec.thresholded(b, m=2),
    ]


# ------------------------------------------------------------ overstatement


def test_overstatement_combines_winner_and_loser_errors():
    # winner overcounted by 200 and loser undercounted by 300
    assert overstatement_rows((1000, 500), (800, 800), [0], [1]) == 500


def test_overstatement_zero_for_identical_tally(sausalito_grouped):
    pooled = sausalito_grouped
    p = pooled.precinct_index("3107")
    tally = HandTally("3107", pooled.reported_row(p), 583)
    assert overstatement(pooled, tally) == 0


def test_undervotes_converting_to_winner_votes_do_not_count():
    # three bucket entries become winner votes in the hand count
    reported = (40, 20, 10)
    actual = (43, 20, 7)
    assert overstatement_rows(reported, actual, [0], [1, 2]) == 0


def test_overstatement_requires_known_precinct(sausalito_grouped):
    with pytest.raises(PrecinctMismatch):
        overstatement(sausalito_grouped, HandTally("9999", (0,) * 6, 0))
    with pytest.raises(PrecinctMismatch):
        overstatement(sausalito_grouped, HandTally("3107", (0, 0), 0))


def test_hand_tally_rejects_negative_counts():
    with pytest.raises(NegativeCount):
        HandTally("p", (1, -2), 3)


def test_total_overstatement_sums():
    assert total_overstatement([]) == 0
    assert total_overstatement([0, 0, 0]) == 0
    assert total_overstatement([500]) == 500
    assert total_overstatement([1]) == 1


def test_net_overstatement_vote_shift():
    # 150 votes moved from the runner-up to the winner doubles up
    assert net_overstatement((800, 500, 150, 50), (650, 650, 150, 50), [0], [1, 2, 3]) == 300


def test_net_overstatement_invalid_counted_for_two():
    # 100 invalid ballots read as one vote each for the two winners
    assert net_overstatement((1100, 600, 500), (1000, 500, 500), [0, 1], [2]) == 200


def test_net_zero_when_totals_agree():
    assert net_overstatement((5, 4), (5, 4), [0], [1]) == 0


@given(
    st.lists(st.tuples(st.integers(0, 99), st.integers(0, 99)), min_size=2, max_size=6)
)
@settings(max_examples=250, deadline=None)
def test_net_never_exceeds_total(pairs):
    reported = [a for a, _ in pairs]
    actual = [b for _, b in pairs]
    winners, losers = [0], list(range(1, len(pairs)))
    net = net_overstatement(reported, actual, winners, losers)
    assert net <= overstatement_rows(reported, actual, winners, losers)


def test_net_never_exceeds_total_bulk():
    rng = random.Random(4242)
    for _ in range(1200):
        k = rng.randint(2, 7)
        n = rng.randint(1, 6)
        winners = [0]
        losers = list(range(1, k))
        rows = [
            ([rng.randint(0, 80) for _ in range(k)], [rng.randint(0, 80) for _ in range(k)])
            for _ in range(n)
        ]
        per_precinct = [
            overstatement_rows(rep, act, winners, losers) for rep, act in rows
        ]
        reported_totals = [sum(rep[i] for rep, _ in rows) for i in range(k)]
        actual_totals = [sum(act[i] for _, act in rows) for i in range(k)]
        net = net_overstatement(reported_totals, actual_totals, winners, losers)
        assert net <= total_overstatement(per_precinct)


@given(st.data())
@settings(max_examples=120, deadline=None)
def test_small_error_cannot_flip_outcome(data):
    """Perturbations worth less than the margin leave the winner set alone."""
    k = data.draw(st.integers(2, 5))
    reported = data.draw(
        st.lists(st.integers(0, 500), min_size=k, max_size=k).filter(
            lambda v: sorted(v)[-1] > sorted(v)[-2]
        )
    )
    order = sorted(range(k), key=lambda i: (-reported[i], i))
    winners, losers = order[:1], order[1:]
    margin = reported[order[0]] - reported[order[1]]

    actual = list(reported)
    budget = (margin - 1) // 2
    moves = data.draw(st.integers(0, budget))
    for _ in range(moves):
        i, j = data.draw(st.sampled_from(range(k))), data.draw(st.sampled_from(range(k)))
        if actual[i] > 0:
            actual[i] -= 1
            actual[j] += 1
    assert net_overstatement(reported, actual, winners, losers) < max(margin, 1)
    true_order = sorted(range(k), key=lambda i: (-actual[i], i))
    assert set(true_order[:1]) == set(winners)


# -------------------------------------------------------------- error bounds


def test_e_plus_bounds_depend_on_pooling(sausalito_flat, sausalito_grouped):
    p_flat = sausalito_flat.precinct_index("3001")
    p_grp = sausalito_grouped.precinct_index("3001")
    assert bound_e_plus(sausalito_flat, p_flat) == 2887
    assert bound_e_plus(sausalito_grouped, p_grp) == 2827


def test_fraction_bound_rounds_up(sausalito_grouped):
    lam = Fraction(2, 5)
    p1 = sausalito_grouped.precinct_index("3001")
    p2 = sausalito_grouped.precinct_index("3104")
    assert bound_fraction(sausalito_grouped, p1, lam) == 802
    assert bound_fraction(sausalito_grouped, p2, lam) == 680
    assert bound_fraction(sausalito_grouped, p1, 0) == 0


def test_supermajority_bound_values():
    assert bound_supermajority(100, 50, 150) == 100
    assert bound_supermajority(0, 0, 0) == 0
    assert bound_supermajority(90, 0, 90) == 90


def test_bounds_vector_has_method_tag(sausalito_grouped):
    vec = bounds_e_plus(sausalito_grouped)
    assert vec.method == "e_plus"
    assert len(vec.u) == 9
    assert all(x >= 0 for x in vec.u)


@given(data=st.data())
@settings(max_examples=150, deadline=None)
def test_overstatement_capped_by_e_plus(sausalito_grouped, data):
    """Any hand tally whose votes respect the cap stays under the bound."""
    pooled = sausalito_grouped
    p = data.draw(st.integers(0, pooled.N - 1))
    r_p = pooled.r[p]
    k = len(pooled.pseudo)
    cuts = sorted(data.draw(st.lists(st.integers(0, r_p), min_size=k - 1, max_size=k - 1)))
    actual = [b - a for a, b in zip([0] + cuts, cuts + [r_p])]
    total = sum(actual)
    assert total <= r_p
    tally = HandTally(pooled.precinct_ids[p], tuple(actual), -(-total // pooled.f))
    assert overstatement(pooled, tally) <= bound_e_plus(pooled, p)


def test_intra_group_shuffles_are_invisible(sausalito):
    """Swapping votes between the members of one pooled group leaves e alone."""
    pooled = pool_losers(sausalito)
    p = pooled.precinct_index("3106")
    row = sausalito.precincts[p]
    base = HandTally.from_real_counts(
        pooled,
        "3106",
        row.reported_votes,
        row.reported_undervotes,
        row.reported_invalid_ballots,
        row.reported_ballots,
    )
    # move 20 write-in votes onto Romanowsky: same pooled group
    shuffled_votes = list(row.reported_votes)
    shuffled_votes[4] += shuffled_votes[5]
    shuffled_votes[5] = 0
    shuffled = HandTally.from_real_counts(
        pooled,
        "3106",
        tuple(shuffled_votes),
        row.reported_undervotes,
        row.reported_invalid_ballots,
        row.reported_ballots,
    )
    assert overstatement(pooled, base) == 0
    assert overstatement(pooled, shuffled) == 0


# ------------------------------------------------------------------- weights


def test_weight_apply_reference_points():
    b = (1749, 100)
    assert weight_apply(WeightSpec.per_opportunity(b), 0, 1) == Fraction(1, 1749)
    assert weight_apply(WeightSpec.identity(), 0, 7) == 7
    assert weight_apply(WeightSpec.thresholded(b, m=2), 1, 52) == Fraction(1, 2)


def test_weight_invert_reference_points():
    assert weight_invert(WeightSpec.identity(), 0, 3) == 3
    assert weight_invert(WeightSpec.per_opportunity((1000,)), 0, Fraction(2, 1000)) == 2
    assert weight_invert(WeightSpec.thresholded((100,), m=2), 0, Fraction(1, 2)) == 52


def test_weight_invert_guards_below_zero():
    with pytest.raises(BelowRange):
        weight_invert(WeightSpec.identity(), 0, Fraction(-1, 2))


def test_weight_labels():
    assert WeightSpec.identity().label() == "identity"
    assert WeightSpec.per_opportunity((5,)).label() == "per-opportunity"
    assert WeightSpec.thresholded((5,), m=3).label() == "thresholded:3"


@given(
    st.integers(1, 2000),
    st.integers(0, 400),
    st.integers(0, 400),
    st.fractions(min_value=0, max_value=50),
)
@settings(max_examples=200, deadline=None)
def test_weight_galois_pair(b_p, z1, z2, t):
    for w in weight_families((b_p,)):
        lo, hi = sorted((z1, z2))
        assert w.apply(0, lo) <= w.apply(0, hi)
        assert w.apply(0, w.invert(0, t)) <= t
        assert w.invert(0, w.apply(0, z1)) >= z1


@given(st.integers(1, 2000), st.fractions(min_value=0, max_value=10), st.fractions(min_value=0, max_value=10))
@settings(max_examples=150, deadline=None)
def test_weight_inverse_monotone(b_p, t1, t2):
    lo, hi = sorted((t1, t2))
    for w in weight_families((b_p,)):
        assert w.invert(0, lo) <= w.invert(0, hi)


# ----------------------------------------------------------- test statistic


def test_sample_statistic_is_max():
    w = WeightSpec.identity()
    assert sample_statistic(w, {0: 3, 1: 9, 2: 1}) == 9


def test_sample_statistic_published_value():
    w = WeightSpec.per_opportunity((1749,))
    assert sample_statistic(w, {0: 1}) == Fraction(1, 1749)


def test_sample_statistic_rejects_empty():
    with pytest.raises(EmptySample):
        sample_statistic(WeightSpec.identity(), {})


def test_sample_statistic_all_clean_is_zero():
    w = WeightSpec.thresholded((100, 100), m=2)
    assert sample_statistic(w, {0: 0, 1: 0}) == 0
