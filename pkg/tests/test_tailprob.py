"""Worst-case tail probabilities, stratified bounds, and sample-size planning."""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from electaudit.discrepancy import WeightSpec, bounds_e_plus, custom_bounds
from electaudit.errors import SampleTooLarge, ZeroSampleCounty
from electaudit.tailprob import (
    TailQuery,
    compute_q,
    county_margin_threshold,
    evaluate_query,
    initial_sample_size,
    min_fraction_sample_size,
    per_county_pvalue,
    pi_diamond,
    pi_diamond_from_q,
    pi_star,
    pi_star_from_q,
    proportional_allocation,
    stratified_pvalue_proportional,
)

IDENTITY = WeightSpec.identity()


def random_instance(rng, max_n=12):
    N = rng.randint(1, max_n)
    u = [rng.randint(0, 20) for _ in range(N)]
    b = [rng.randint(1, 40) for _ in range(N)]
    fam = rng.choice(["identity", "per_opportunity", "thresholded"])
    w = {
        "identity": WeightSpec.identity(),
        "per_opportunity": WeightSpec.per_opportunity(b),
        "thresholded": WeightSpec.thresholded(b, m=2),
    }[fam]
    M = rng.randint(1, sum(u) + 2)
    t = Fraction(rng.randint(0, 30), rng.randint(1, 30))
    return u, w, M, t


# ----------------------------------------------------------------- compute_q


def test_q_for_sausalito(sausalito_grouped):
    u = bounds_e_plus(sausalito_grouped)
    w = WeightSpec.per_opportunity(sausalito_grouped.b)
    assert compute_q(Fraction(2, 1000), u, w, 86) == 8


def test_q_zero_when_bounds_cannot_reach_margin():
    assert compute_q(Fraction(1), (1, 1), IDENTITY, 5) == 0


def test_q_full_when_threshold_swallows_bounds():
    # w^-1(t) >= every u_p: capping changes nothing, all N stay feasible
    assert compute_q(Fraction(50), (3, 4, 5), IDENTITY, 10) == 3


# ------------------------------------------------------------------- pi_star


def test_single_precinct_audit_pvalue(sausalito_grouped):
    u = bounds_e_plus(sausalito_grouped)
    w = WeightSpec.per_opportunity(sausalito_grouped.b)
    assert pi_star(Fraction(57, 100_000), 1, u, w, 86) == Fraction(8, 9)


def test_pi_star_zero_branch():
    assert pi_star_from_q(8, 9, 9) == 0


def test_pi_star_rejects_oversized_sample():
    with pytest.raises(SampleTooLarge):
        pi_star_from_q(3, 11, 10)


def test_pi_star_matches_binomial_ratio():
    rng = random.Random(99)
    for _ in range(200):
        N = rng.randint(1, 400)
        q = rng.randint(0, N)
        n = rng.randint(1, N)
        expected = Fraction(math.comb(q, n), math.comb(N, n))
        assert pi_star_from_q(q, n, N) == expected


def test_evaluate_query_reports_mode(sausalito_grouped):
    u = bounds_e_plus(sausalito_grouped)
    w = WeightSpec.per_opportunity(sausalito_grouped.b)
    res = evaluate_query(TailQuery(Fraction(2, 1000), 3, u, w, 86))
    assert res.mode == "without_replacement"
    assert res.q == 8 and res.N == 9
    assert res.p_value == Fraction(math.comb(8, 3), math.comb(9, 3))
    star = evaluate_query(TailQuery(Fraction(2, 1000), 3, u, w, 86), "with_replacement")
    assert star.p_value == Fraction(8, 9) ** 3


# ---------------------------------------------------------------- pi_diamond


def test_pi_diamond_reference_cells():
    assert pi_diamond_from_q(3993, 78, 4123) == Fraction(3993, 4123) ** 78
    assert pi_diamond_from_q(0, 1, 9) == 0


def test_pi_diamond_exceeds_pi_star():
    rng = random.Random(7)
    for _ in range(300):
        N = rng.randint(1, 60)
        q = rng.randint(0, N)
        n = rng.randint(1, N)
        assert pi_star_from_q(q, n, N) <= pi_diamond_from_q(q, n, N)


@given(st.data())
@settings(max_examples=150, deadline=None)
def test_zero_pvalue_exactly_when_expected(data):
    N = data.draw(st.integers(1, 40))
    q = data.draw(st.integers(0, N))
    n = data.draw(st.integers(1, N))
    assert (pi_star_from_q(q, n, N) == 0) == (q < n)
    assert (pi_diamond_from_q(q, n, N) == 0) == (q == 0)


# -------------------------------------------------------------- monotonicity


@given(st.data())
@settings(max_examples=120, deadline=None)
def test_pvalue_monotone_in_sample_size_and_threshold(data):
    rng = random.Random(data.draw(st.integers(0, 10**9)))
    u, w, M, t = random_instance(rng)
    N = len(u)
    n1 = data.draw(st.integers(1, N))
    n2 = data.draw(st.integers(n1, N))
    assert pi_star(t, n2, u, w, M) <= pi_star(t, n1, u, w, M)
    assert pi_diamond(t, n2, u, w, M) <= pi_diamond(t, n1, u, w, M)
    t2 = t + data.draw(st.fractions(min_value=0, max_value=5))
    assert pi_star(t2, n1, u, w, M) >= pi_star(t, n1, u, w, M)


@given(st.data())
@settings(max_examples=120, deadline=None)
def test_pvalue_monotone_in_bounds_and_margin(data):
    rng = random.Random(data.draw(st.integers(0, 10**9)))
    u, w, M, t = random_instance(rng)
    n = rng.randint(1, len(u))
    bumped = list(u)
    bumped[rng.randrange(len(u))] += data.draw(st.integers(0, 10))
    assert pi_star(t, n, bumped, w, M) >= pi_star(t, n, u, w, M)
    M2 = M + data.draw(st.integers(0, 10))
    assert pi_star(t, n, u, w, M2) <= pi_star(t, n, u, w, M)


# ---------------------------------------------------------------- stratified


def test_proportional_allocation_reference_points():
    assert proportional_allocation(80, [50, 50]) == (40, 40)
    assert proportional_allocation(100, [30, 70]) == (30, 70)
    assert proportional_allocation(7, [12]) == (7,)


def test_stratified_equals_diamond_at_exact_allocation():
    u = custom_bounds([6] * 10)
    res = stratified_pvalue_proportional(
        Fraction(0), [5, 5], [5, 5], u, IDENTITY, 12
    )
    assert res.n_eff == 10
    assert res.p_value == pi_diamond(Fraction(0), 10, u, IDENTITY, 12)


def test_stratified_uses_minimum_sampling_fraction():
    u = custom_bounds([4] * 200)
    res = stratified_pvalue_proportional(
        Fraction(0), [5, 10], [100, 100], u, IDENTITY, 30
    )
    assert res.n_eff == 10


def test_stratified_zero_sample_county_warns():
    u = custom_bounds([4] * 20)
    with pytest.warns(ZeroSampleCounty):
        res = stratified_pvalue_proportional(
            Fraction(0), [0, 10], [10, 10], u, IDENTITY, 3
        )
    assert res.p_value == 1


def test_min_fraction_sample_size():
    assert min_fraction_sample_size([5, 10], [100, 100]) == 10
    assert min_fraction_sample_size([40, 40], [50, 50]) == 80


# ---------------------------------------------------------------- per-county


def test_county_margin_threshold_values():
    assert county_margin_threshold(86, 15_000, 15_000) == 86
    assert county_margin_threshold(443_196, 221_781, 2_217_818) == 44_319
    assert county_margin_threshold(100, 1, 1000) == 0


def test_per_county_pvalue_is_worst_county():
    q1 = TailQuery(Fraction(0), 1, custom_bounds([5, 5]), IDENTITY, 20)
    q2 = TailQuery(Fraction(0), 1, custom_bounds([9, 9, 9]), IDENTITY, 4)
    expected = max(
        pi_star(q.t, q.n, q.u, q.w, q.M) for q in (q1, q2)
    )
    assert per_county_pvalue([q1, q2]) == expected
    assert per_county_pvalue([q1]) == 0


# ------------------------------------------------------------- sample sizing


def test_initial_sample_size_sausalito(sausalito_grouped):
    u = bounds_e_plus(sausalito_grouped)
    w = WeightSpec.per_opportunity(sausalito_grouped.b)
    assert initial_sample_size(Fraction(2, 1000), Fraction(1, 100), u, w, 86) == 9
    assert initial_sample_size(Fraction(57, 100_000), Fraction(9, 10), u, w, 86) == 1


def test_initial_sample_size_trivial_when_margin_unreachable():
    assert initial_sample_size(Fraction(0), Fraction(1, 100), custom_bounds([1, 1]), IDENTITY, 5) == 1


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_initial_sample_size_is_minimal(data):
    rng = random.Random(data.draw(st.integers(0, 10**9)))
    u, w, M, t = random_instance(rng, max_n=20)
    alpha = Fraction(data.draw(st.integers(1, 99)), 100)
    n1 = initial_sample_size(t, alpha, u, w, M)
    N = len(u)
    assert 1 <= n1 <= N
    if pi_star(t, n1, u, w, M) >= alpha:
        assert n1 == N  # a full audit is the fallback answer
    if n1 > 1:
        assert pi_star(t, n1 - 1, u, w, M) >= alpha
