from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from offord.detector import (
    detect_structure,
    ilo_ratio_table,
    ilo_size_bound,
    outlier_order,
    planted_instance,
    validate_against_ilo,
)
from offord.errors import InputError
from offord.gap import Gap, is_proper
from offord.linear import rho_linear

from oracles import gap_images

F = Fraction


def assert_sound(rep, a, r_max, n_prime):
    assert set(rep.covered) | set(rep.exceptions) == set(range(len(a)))
    assert not set(rep.covered) & set(rep.exceptions)
    if not rep.found:
        return
    g = rep.gap
    assert g.is_symmetric and g.rank <= r_max
    assert is_proper(g)[0]
    images = {v for _, v in gap_images(0, g.generators, g.lower, g.upper)}
    assert all(a[i] in images for i in rep.covered)
    assert len(rep.exceptions) <= n_prime
    assert rep.gap_size == g.volume


def test_all_zero_gives_rank_zero():
    rep = detect_structure([0, 0, 0, 0])
    assert rep.found and rep.gap.rank == 0 and rep.covered == (0, 1, 2, 3) and rep.gap_size == 1


def test_gcd_generator():
    rep = detect_structure([3, 6, -9, 12])
    assert rep.gap == Gap.symmetric([3], [4])
    assert len(rep.covered) == 4


def test_planted_rank2_with_outliers():
    a, planted = planted_instance([1, 10], [3, 3], 20, outliers=[10**6, 10**6], seed=3)
    rep = detect_structure(a, r_max=2, n_prime=2)
    assert rep.found and rep.gap.rank <= 2
    assert set(rep.covered) >= set(range(20))
    assert rep.exceptions == (20, 21)
    assert_sound(rep, a, 2, 2)


def test_rational_elements_are_scaled():
    a = [F(1, 2), F(-3, 2), F(5, 2), 0]
    rep = detect_structure(a, r_max=1)
    assert rep.gap == Gap.symmetric([F(1, 2)], [5])


def test_preconditions():
    with pytest.raises(InputError):
        detect_structure([])
    with pytest.raises(InputError):
        detect_structure([1, 2], n_prime=2)
    with pytest.raises(InputError):
        detect_structure([1, 2], r_max=3)


def test_rank_cap_respected():
    a, _ = planted_instance([1, 100], [2, 2], 12, seed=1)
    rep = detect_structure(a, r_max=1)
    assert_sound(rep, a, 1, 0)


def test_outlier_order_is_by_distance_from_median_then_index():
    assert outlier_order([F(0), F(5), F(-5), F(1)]) == [1, 2, 3, 0]


def test_deterministic():
    a, _ = planted_instance([2, 15], [2, 3], 15, outliers=[999], seed=8)
    assert detect_structure(a, 2, 1) == detect_structure(a, 2, 1)


@settings(max_examples=60)
@given(
    st.lists(st.fractions(min_value=-50, max_value=50, max_denominator=3), min_size=1, max_size=10),
    st.integers(0, 2),
    st.integers(0, 3),
)
def test_soundness_on_arbitrary_input(a, r_max, n_prime):
    n_prime = min(n_prime, len(a) - 1)
    rep = detect_structure(a, r_max, n_prime)
    assert_sound(rep, tuple(F(x) for x in a), r_max, n_prime)
    assert rep.rho == rho_linear(a)[0]


@settings(max_examples=60)
@given(
    st.integers(1, 12),
    st.integers(13, 150),
    st.integers(0, 3),
    st.integers(0, 3),
    st.integers(5, 20),
    st.integers(0, 2),
    st.integers(0, 10**6),
)
def test_planted_completeness(g1, g2, m1, m2, size, n_out, seed):
    gap = Gap.symmetric([g1, g2], [m1, m2])
    if not is_proper(gap)[0]:
        gap = Gap.symmetric([g1], [m1])
    a, _ = planted_instance(gap.generators, gap.upper, size, outliers=[10**7 + i for i in range(n_out)], seed=seed)
    rep = detect_structure(a, 2, n_out)
    assert rep.found and len(rep.covered) >= len(a) - n_out
    assert_sound(rep, a, 2, n_out)


def test_validate_against_ilo():
    rep = detect_structure([0, 0, 0])
    cmp = validate_against_ilo(rep, [0, 0, 0])
    assert cmp.gap_size == 1 and cmp.ratio == 1 / cmp.ilo_size_bound
    missing = detect_structure([1, 1000, 10**6], r_max=0)
    assert not missing.found
    with pytest.raises(InputError):
        validate_against_ilo(missing, [1, 1000, 10**6])


def test_ilo_size_bound_values():
    assert ilo_size_bound(F(1, 8), 4, 2) == 2
    assert ilo_size_bound(F(1, 8), 0, 1) == 8
    assert abs(float(ilo_size_bound(F(1, 2), 2, 1)) - 2 / 2**0.5) < 1e-9


def test_ilo_ratio_table_rows():
    rows = ilo_ratio_table([8, 16, 32])
    assert [r["n"] for r in rows] == [8, 16, 32]
    for r in rows:
        assert F(r["ratio"]) == r["gap_size"] / F(r["ilo_size_bound"])
