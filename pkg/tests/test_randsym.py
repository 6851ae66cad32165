import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from offord.errors import BudgetError, DimensionError, InputError
from offord.numeric import bareiss_det, rank_exact
from offord.randsym import (
    RngSpec,
    bordered_det_identity,
    cofactor_matrix,
    conjecture_curve,
    kernel_height_check,
    odlyzko_count,
    principal_removal_index,
    qn_exact,
    qn_montecarlo,
    rank1_factor,
    rank_increase_experiment,
    sample_symmetric,
    sample_symmetric_batch,
    symmetric_sign_matrices,
    two_rows_curve,
    wilson_interval,
)

from oracles import cofactor_expansion_det, fraction_rank, span_sign_count

F = Fraction

# frozen from oracles.qn_naive (Leibniz determinants over every matrix)
QN_ORACLE = {1: F(0), 2: F(1, 2), 3: F(1, 2), 4: F(1, 2), 5: F(31, 64)}


def sign_vectors(n):
    return st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n)


def test_sample_symmetric_shape_and_determinism():
    a = sample_symmetric(5, RngSpec(9).generator(0))
    b = sample_symmetric(5, RngSpec(9).generator(0))
    assert a == b
    assert all(a[i][j] == a[j][i] and abs(a[i][j]) == 1 for i in range(5) for j in range(5))
    with pytest.raises(InputError):
        sample_symmetric(0, RngSpec(0).generator(0))


def test_sample_symmetric_entry_mean():
    batch = sample_symmetric_batch(3, 10**4, RngSpec(1).generator(0))
    assert abs(batch[:, 0, 1].mean()) <= 0.05


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_qn_exact_matches_oracle(n):
    est = qn_exact(n)
    assert est.q_hat == QN_ORACLE[n]
    assert est.total == 2 ** (n * (n + 1) // 2)
    assert est.q_hat == F(est.singular_count, est.total)


def test_qn_exact_batched_path_matches_plain_bareiss():
    for n in (2, 3, 4):
        singular = sum(bareiss_det(m) == 0 for m in symmetric_sign_matrices(n))
        assert qn_exact(n).singular_count == singular


def test_qn_exact_cap():
    with pytest.raises(BudgetError) as exc:
        qn_exact(8)
    assert exc.value.required == 2**36


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < F(1, 2) < hi
    assert abs(float(lo) - 0.4038) < 1e-3 and abs(float(hi) - 0.5962) < 1e-3
    assert wilson_interval(0, 10)[0] == 0
    assert wilson_interval(10, 10)[1] == 1
    with pytest.raises(InputError):
        wilson_interval(0, 0)


@given(st.integers(1, 10**6), st.data())
def test_wilson_contains_point_estimate(t, data):
    s = data.draw(st.integers(0, t))
    lo, hi = wilson_interval(s, t)
    assert 0 <= lo <= F(s, t) <= hi <= 1


def test_qn_montecarlo_examples():
    est = qn_montecarlo(2, 10**5, RngSpec(1))
    assert F(49, 100) <= est.q_hat <= F(51, 100)
    assert est.wilson_95_low <= est.q_hat <= est.wilson_95_high
    with pytest.raises(InputError):
        qn_montecarlo(2, 0, RngSpec(1))


def test_qn_montecarlo_is_reproducible():
    a = qn_montecarlo(6, 5000, RngSpec(7, 3))
    b = qn_montecarlo(6, 5000, RngSpec(7, 3))
    assert a == b
    assert RngSpec(7, 3).shares(5000) == [1667, 1667, 1666]


def test_qn_montecarlo_n10_report():
    est = qn_montecarlo(10, 20000, RngSpec(3))
    floor = two_rows_curve(10) / 2
    # reported only: the two-rows event is a lower-order heuristic, not a bound at n = 10
    assert est.total == 20000 and floor > 0 and conjecture_curve(10) == F(1, 1024)


def test_odlyzko_examples():
    assert odlyzko_count([[1, -1, 1, 1]]) == 2
    eye_like = [[1 if i == j else -1 for j in range(4)] for i in range(4)]
    assert rank_exact(eye_like) == 4 and odlyzko_count(eye_like) == 16
    rng = np.random.default_rng(4)
    while True:
        rows = (rng.integers(0, 2, size=(2, 6)) * 2 - 1).tolist()
        if fraction_rank(rows) == 2:
            break
    c = odlyzko_count(rows)
    assert c <= 4 and c == span_sign_count(rows, 6)
    with pytest.raises(InputError):
        odlyzko_count([[1, 2]])
    with pytest.raises(BudgetError):
        odlyzko_count([[1] * 30])


@settings(max_examples=60)
@given(st.integers(1, 7).flatmap(lambda n: st.lists(sign_vectors(n), min_size=1, max_size=4)))
def test_odlyzko_matches_enumeration(rows):
    n = len(rows[0])
    c = odlyzko_count(rows)
    assert c == span_sign_count(rows, n)
    assert c <= 2 ** fraction_rank(rows)


def test_rank_increase_examples():
    with pytest.raises(InputError):
        rank_increase_experiment(4, 3, 10, RngSpec(0))
    with pytest.raises(InputError):
        rank_increase_experiment(4, 0, 10, RngSpec(0))
    a = rank_increase_experiment(4, 2, 2000, RngSpec(5))
    b = rank_increase_experiment(4, 2, 2000, RngSpec(5))
    assert a == b and a.bound == F(3, 4)
    assert 0 <= a.jumps <= a.trials


def test_rank_increase_retry_budget_fails_loudly():
    # rank-1 6x6 sign matrices are rare: 2**6 / 2**21
    with pytest.raises(InputError):
        rank_increase_experiment(6, 1, 5, RngSpec(0), retry_budget=10)


def test_cofactor_examples():
    assert cofactor_matrix([[1, 1], [1, 1]]) == ((1, -1), (-1, 1))
    eye = [[int(i == j) for j in range(3)] for i in range(3)]
    assert cofactor_matrix(eye) == tuple(tuple(eye_row) for eye_row in eye)
    with pytest.raises(DimensionError):
        cofactor_matrix([[1, 2]])


@given(sign_vectors(9))
def test_cofactors_match_expansion_and_identity_3x3(bits):
    m = [bits[0:3], bits[3:6], bits[6:9]]
    m = [[m[min(i, j)][max(i, j)] for j in range(3)] for i in range(3)]
    cof = cofactor_matrix(m)
    for i, j in itertools.product(range(3), repeat=2):
        minor = [r[:j] + r[j + 1:] for k, r in enumerate(m) if k != i]
        assert cof[i][j] == (-1) ** (i + j) * cofactor_expansion_det(minor)
    for corner in (-1, 1):
        for x in itertools.product((-1, 1), repeat=3):
            direct, expansion = bordered_det_identity(m, corner, x, cof)
            assert direct == expansion


def test_squared_corner_form_of_bordered_identity_fails():
    # corner**2 * det(M) would ignore the corner's sign
    m = [[1, 1], [1, -1]]
    direct, expansion = bordered_det_identity(m, -1, (1, 1))
    assert direct == expansion
    cof = cofactor_matrix(m)
    squared = bareiss_det(m) - sum(cof[i][j] for i in range(2) for j in range(2))
    assert squared != direct


def test_rank1_factor_examples():
    assert rank1_factor([[1, -1], [-1, 1]]) == (1, -1)
    assert rank1_factor([[0, 0], [0, 0]]) == (0, 0)
    assert rank1_factor([[1, 0], [0, 1]]) is None
    assert rank1_factor([[-1, 1], [1, -1]]) is None  # -a_i a_j has no rational square root
    assert rank1_factor([[F(1, 4), F(1, 2)], [F(1, 2), 1]]) == (F(1, 2), 1)


@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=3), min_size=1, max_size=5))
def test_rank1_factor_roundtrip(a):
    c = [[x * y for y in a] for x in a]
    got = rank1_factor(c)
    assert got is not None
    assert all(got[i] * got[j] == c[i][j] for i in range(len(a)) for j in range(len(a)))
    nz = [v for v in got if v]
    assert not nz or nz[0] > 0


def test_principal_removal_index():
    m = [[1, 1, 1], [1, 1, 1], [1, 1, -1]]
    assert rank_exact(m) == 2
    i = principal_removal_index(m)
    sub = [r[:i] + r[i + 1:] for k, r in enumerate(m) if k != i]
    assert rank_exact(sub) >= 1
    with pytest.raises(InputError):
        principal_removal_index([[1, 0], [0, 1]])


def test_kernel_height_examples():
    kh = kernel_height_check([[1, 1], [1, 1]])
    assert kh.vector == (1, -1) and kh.max_num == 1 and kh.max_den == 1 and kh.hadamard_bound == 2
    with pytest.raises(InputError):
        kernel_height_check([[1, 1], [1, -1]])
    with pytest.raises(InputError):
        kernel_height_check([[2, 0], [0, 0]])


def test_kernel_heights_within_hadamard_bound():
    rng = np.random.default_rng(8)
    found = 0
    for n in range(2, 9):
        for _ in range(400):
            m = (rng.integers(0, 2, size=(n, n)) * 2 - 1).tolist()
            if bareiss_det(m) != 0:
                continue
            kh = kernel_height_check(m)
            assert max(kh.max_num, kh.max_den) <= kh.hadamard_bound
            assert kh.hadamard_bound ** 2 <= n**n
            assert all(sum(r[j] * kh.vector[j] for j in range(n)) == 0 for r in m)
            assert 1 in kh.vector
            found += 1
    assert found > 100
