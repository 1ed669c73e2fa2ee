import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, strategies as st

from onsagerkit.errors import DomainError, UsageError
from onsagerkit.exactmath import UniPoly
from onsagerkit.relation import (
    CRITICAL_X,
    estimate_magnetization,
    find_integer_relation,
    hermite_normal_form,
    lll_reduce,
    magnetization_derivative_reference,
    magnetization_ode_oracle,
    magnetization_reference,
    ode_from_relation,
    ode_labels,
    oracle_identity,
    oracle_value_rows,
    simultaneous_relation,
)


def norm2(v):
    return sum(a * a for a in v)


# -- lattice reduction


def test_lll_identity():
    eye = [[int(i == j) for j in range(4)] for i in range(4)]
    assert lll_reduce(eye) == eye


def test_lll_finds_short_vector():
    basis = [[1, 0, 10], [0, 1, 16]]
    planted = [8, -5, 0]  # kills the last column
    red = lll_reduce(basis)
    assert min(norm2(v) for v in red) <= norm2(planted)


def test_lll_golden_ratio_embedding():
    with mpmath.workdps(40):
        phi = (1 + mpmath.sqrt(5)) / 2
        S = mpmath.mpf(10) ** 30
        vals = [1, phi, phi**2]
        basis = [[int(i == j) for j in range(3)] + [int(mpmath.nint(S * v))]
                 for i, v in enumerate(vals)]
    red = lll_reduce(basis)
    first = red[0][:3]
    assert first in ([1, 1, -1], [-1, -1, 1])


def test_lll_rejects_dependent_rows():
    with pytest.raises(UsageError):
        lll_reduce([[1, 2, 3], [2, 4, 6]])


def test_hnf_basics():
    assert hermite_normal_form([[2, 0], [0, 3]]) == [[2, 0], [0, 3]]
    assert hermite_normal_form([[1, 1], [1, -1]]) == [[1, 1], [0, 2]]


# -- relation finding


def test_relation_log2_log4():
    with mpmath.workdps(30):
        rel = find_integer_relation([mpmath.log(2), mpmath.log(4)], 20)
    assert rel.coefficients == (2, -1)


def test_relation_golden_ratio():
    with mpmath.workdps(40):
        phi = (1 + mpmath.sqrt(5)) / 2
        rel = find_integer_relation([1, phi, phi**2], 30)
    assert rel.coefficients == (1, 1, -1)


@pytest.mark.parametrize("seed", range(5))
def test_no_relation_among_random_reals(seed):
    rng = random.Random(seed)
    assert find_integer_relation([rng.random() for _ in range(5)], 10) is None


def test_planted_degree3_simultaneous():
    planted = (3, -5, 2, 7)
    rng = random.Random(7)
    rows = []
    with mpmath.workdps(30):
        for _ in range(6):
            r = [mpmath.mpf(rng.random()) for _ in range(3)]
            last = -sum(c * v for c, v in zip(planted, r)) / planted[3]
            rows.append([mpmath.mpf(mpmath.nstr(v, 12)) for v in r + [last]])
    rel = simultaneous_relation(rows, 12)
    assert rel.coefficients == planted


def test_max_coeff_digits_cap():
    with mpmath.workdps(40):
        vals = [mpmath.mpf(1), mpmath.sqrt(2), mpmath.mpf(12345) * mpmath.sqrt(2) + 6789]
    assert find_integer_relation(vals, 30) is not None
    assert find_integer_relation(vals, 30, max_coeff_digits=3) is None


def test_relation_json_shape():
    with mpmath.workdps(30):
        rel = find_integer_relation([mpmath.log(2), mpmath.log(4)], 20)
    obj = rel.to_json()
    assert obj["coeffs"] == ["2", "-1"] and set(obj) == {"coeffs", "residual", "labels"}


# -- magnetization


def test_magnetization_reference_examples():
    assert magnetization_reference(CRITICAL_X) == 0
    assert magnetization_reference(2) == 0
    assert abs(magnetization_reference(3) - (175 / 256) ** 0.125) < 1e-15
    with pytest.raises(DomainError):
        magnetization_reference(1)


def test_magnetization_continuity_at_threshold():
    assert magnetization_reference(CRITICAL_X - 1e-9) == 0
    assert 0 <= magnetization_reference(CRITICAL_X + 1e-9) < 1e-1


def test_magnetization_increasing_and_bounded():
    xs = [CRITICAL_X + 0.01 * k for k in range(1, 400)]
    ms = [magnetization_reference(x) for x in xs]
    assert all(0 <= m < 1 for m in ms)
    assert all(a < b for a, b in zip(ms, ms[1:]))


def test_oracle_ode():
    a, b = magnetization_ode_oracle()
    assert a == UniPoly([0, 0, 0, -8])
    assert b == UniPoly([-1, 0, 6, 0, 0, 0, -6, 0, 1])
    assert oracle_identity(a, b).is_zero()
    assert a.gcd(b).degree == 0
    assert max(a.degree, b.degree) <= 10


def test_oracle_consistent_with_numerical_derivative():
    a, b = magnetization_ode_oracle()
    x, h = 3.0, 1e-5
    dm = (magnetization_reference(x + h) - magnetization_reference(x - h)) / (2 * h)
    assert abs(b(Fraction(3)) / a(Fraction(3)) + magnetization_reference(x) / dm) < 1e-5


def test_oracle_annihilates_reference_values():
    a, b = magnetization_ode_oracle()
    rng = random.Random(3)
    with mpmath.workdps(40):
        for _ in range(20):
            x = mpmath.mpf(CRITICAL_X + 0.1 + 5 * rng.random())
            m = magnetization_reference(x)
            dm = magnetization_derivative_reference(x)
            val = sum(c * x**i * m for i, c in enumerate(a.coeffs))
            val += sum(c * x**i * dm for i, c in enumerate(b.coeffs))
            assert abs(val) < mpmath.mpf(10) ** -30


def oracle_rows(digits, points):
    xs = [mpmath.mpf(3) + mpmath.mpf(k) / 3 for k in range(points)]
    return oracle_value_rows(xs, digits)


def test_ode_recovered_from_30_digits():
    rel = simultaneous_relation(oracle_rows(30, 8), 30, labels=ode_labels())
    assert rel is not None
    assert ode_from_relation(rel.coefficients) == magnetization_ode_oracle()


def test_ode_not_certified_from_6_digits():
    assert simultaneous_relation(oracle_rows(6, 8), 6) is None


def test_ode_from_relation_checks_shape():
    with pytest.raises(UsageError):
        ode_from_relation([1, 2, 3])


def test_estimate_subcritical_is_zero():
    est = estimate_magnetization(1.5, 10)
    assert abs(est.m) <= max(est.m_error, 1e-2)


def test_estimate_supercritical_close_to_reference():
    est = estimate_magnetization(3.0, 12)
    assert abs(est.m - magnetization_reference(3.0)) < 1e-2
    assert abs(est.dm - magnetization_derivative_reference(3.0)) < 2e-2


def test_estimate_step_halving():
    # the stencil error shrinks as the step drops (until finite-size effects take over)
    ref = magnetization_reference(4.0)
    e1 = abs(estimate_magnetization(4.0, 10, h=0.2).m - ref)
    e2 = abs(estimate_magnetization(4.0, 10, h=0.1).m - ref)
    assert e2 < e1


# -- properties


def exact_det(rows):
    m = [[Fraction(v) for v in r] for r in rows]
    n, det = len(m), Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


@st.composite
def int_bases(draw):
    n = draw(st.integers(2, 4))
    rows = draw(st.lists(st.lists(st.integers(-30, 30), min_size=n, max_size=n),
                         min_size=n, max_size=n))
    assume(exact_det(rows) != 0)
    return rows


@pytest.mark.property
@given(int_bases())
def test_lll_preserves_lattice(basis):
    red = lll_reduce(basis)
    assert hermite_normal_form(red) == hermite_normal_form(basis)


@pytest.mark.property
@given(int_bases())
def test_lll_output_is_reduced(basis):
    red = lll_reduce(basis)
    # size reduction and Lovasz condition via exact Gram-Schmidt
    n = len(red)
    bstar, mu = [], [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        v = [Fraction(x) for x in red[i]]
        for j in range(i):
            mu[i][j] = sum(Fraction(a) * b for a, b in zip(red[i], bstar[j])) / sum(
                b * b for b in bstar[j])
            v = [a - mu[i][j] * b for a, b in zip(v, bstar[j])]
        bstar.append(v)
    for i in range(n):
        for j in range(i):
            assert abs(mu[i][j]) <= Fraction(1, 2)
    for k in range(1, n):
        lhs = sum(b * b for b in bstar[k])
        rhs = (Fraction(3, 4) - mu[k][k - 1] ** 2) * sum(b * b for b in bstar[k - 1])
        assert lhs >= rhs


@pytest.mark.property
@given(
    st.lists(st.integers(-10**6, 10**6), min_size=3, max_size=3).filter(
        lambda c: c[2] != 0 and (c[0] or c[1])
    ),
    st.integers(0, 10**6),
)
def test_planted_relation_recovered(coeffs, seed):
    rng = random.Random(seed)
    with mpmath.workdps(50):
        v = [mpmath.mpf(rng.random()), mpmath.mpf(rng.random())]
        v.append(-(coeffs[0] * v[0] + coeffs[1] * v[1]) / coeffs[2])
        values = [mpmath.mpf(mpmath.nstr(x, 40)) for x in v]
        rel = find_integer_relation(values, 40)
    assert rel is not None
    # the found relation must certify the planted one: same vector up to gcd and sign
    g = math.gcd(*coeffs)
    planted = tuple(c // g for c in coeffs)
    assert rel.coefficients in (planted, tuple(-c for c in planted))


@pytest.mark.property
@given(st.permutations(list(range(8))))
def test_simultaneous_relation_permutation_invariant(perm):
    rows = _ROWS_20
    base = simultaneous_relation(rows, 20)
    shuffled = simultaneous_relation([rows[i] for i in perm], 20)
    assert base is not None and shuffled is not None
    assert base.coefficients == shuffled.coefficients


_ROWS_20 = oracle_rows(20, 8)
