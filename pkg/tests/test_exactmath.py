from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from onsagerkit.errors import DomainError, InconsistencyError, UsageError
from onsagerkit.exactmath import (
    TruncSeries,
    UniPoly,
    factor_rational,
    format_factored,
    interpolate_poly,
    series_compose,
    series_exp,
    series_inverse,
    series_log,
    series_mul,
    series_reverse,
    solve_linear,
    to_fraction,
)

small_q = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def S(coeffs, order):
    return TruncSeries(coeffs, order)


# -- scalars and polynomials


def test_to_fraction_refuses_floats():
    with pytest.raises(UsageError):
        to_fraction(0.5)
    assert to_fraction("3/6") == Fraction(1, 2)


def test_unipoly_strips_and_evaluates():
    p = UniPoly([1, 2, 0, 0])
    assert p.degree == 1
    assert p(Fraction(1, 2)) == 2
    assert UniPoly().degree == -1


def test_unipoly_divmod_and_gcd():
    a = UniPoly([-1, 0, 1])  # x^2 - 1
    b = UniPoly([1, 1])
    q, r = a.divmod(b)
    assert q == UniPoly([-1, 1]) and r.is_zero()
    assert a.gcd(UniPoly([2, 2])) == UniPoly([1, 1])


def test_unipoly_json_roundtrip():
    p = UniPoly([Fraction(1, 3), 0, -2])
    assert UniPoly.from_json(p.to_json()) == p


def test_factored_strings():
    r = UniPoly([0, 1])
    assert format_factored(r * UniPoly([1, 2]) ** 2, "r") == "r*(2*r+1)^2"
    assert format_factored(UniPoly([1, 1]) ** 3, "r") == "(r+1)^3"
    assert format_factored(UniPoly([0, -1, 0, 1]), "w") == "(w-1)*w*(w+1)"
    assert format_factored(UniPoly([1, 0, 1]) ** 2, "w") == "(w^2+1)^2"
    const, factors = factor_rational(UniPoly([0, 2, 0, -2]))
    assert const == -2 and len(factors) == 3


# -- series arithmetic


def test_series_mul_examples():
    assert series_mul(S([1, 1], 4), S([1, -1], 4)) == S([1, 0, -1], 4)
    assert series_mul(S([1, 0, 1], 4), S([1, 0, 1], 4)) == S([1, 0, 2, 0, 1], 4)
    f = S([0, 0, -1, 0, Fraction(3, 2)], 4)
    assert series_mul(f, TruncSeries.one(4)) == f


def test_series_order_mismatch_rejected():
    with pytest.raises(UsageError):
        series_mul(S([1], 3), S([1], 4))
    with pytest.raises(UsageError):
        S([1, 2, 3], 1)


def test_series_log_examples():
    assert series_log(TruncSeries.one(5)) == TruncSeries.zero(5)
    assert series_log(S([1, 0, 1], 8)) == S(
        [0, 0, 1, 0, Fraction(-1, 2), 0, Fraction(1, 3), 0, Fraction(-1, 4)], 8
    )
    inv = series_inverse(S([1, -1], 3))
    assert series_log(inv) == S([0, 1, Fraction(1, 2), Fraction(1, 3)], 3)
    with pytest.raises(DomainError):
        series_log(S([2, 1], 3))


def test_series_compose_examples():
    assert series_compose(S([0, 0, 1], 2), S([0, 2], 2)) == S([0, 0, 4], 2)
    with pytest.raises(DomainError):
        series_compose(S([0, 1], 2), S([1, 1], 2))


def test_series_reverse_examples():
    z = TruncSeries.variable(6)
    assert series_reverse(z) == z
    assert series_reverse(S([0, 2], 6)) == S([0, Fraction(1, 2)], 6)
    num = S([0, 2, 0, -2], 9)
    den = series_inverse(S([1, 0, 2, 0, 1], 9))
    w = series_reverse(series_mul(num, den))
    assert [w[k] for k in (1, 3, 5, 7, 9)] == [
        Fraction(1, 2), Fraction(3, 8), Fraction(22, 32), Fraction(211, 128), Fraction(2306, 512)
    ]
    with pytest.raises(DomainError):
        series_reverse(S([0, 0, 1], 4))


def test_series_json_roundtrip():
    f = S([0, Fraction(-1, 4), 3], 5)
    assert TruncSeries.from_json(f.to_json()) == f
    assert f.to_json() == {"order": 5, "coeffs": ["0", "-1/4", "3", "0", "0", "0"]}


# -- linear algebra and interpolation


def test_solve_linear_examples():
    sol = solve_linear([[1, 0], [0, 1]], [3, Fraction(1, 2)])
    assert sol.unique and sol.particular == (3, Fraction(1, 2))
    fam = solve_linear([[1, 1]], [0])
    assert fam.dimension == 1
    bad = solve_linear([[1, 1], [1, 1]], [0, 1])
    assert not bad.feasible


def test_interpolate_examples():
    assert interpolate_poly([(1, 1), (2, 4), (3, 9)], 2) == UniPoly([0, 0, 1])
    pts = [(N, Fraction(N * (9 + N), 2)) for N in range(121, 188, 11)]
    assert interpolate_poly(pts, 2) == UniPoly([0, Fraction(9, 2), Fraction(1, 2)])
    assert interpolate_poly([(1, 7), (5, 7)], 0) == UniPoly([7])


def test_interpolate_reports_offending_point():
    with pytest.raises(InconsistencyError) as exc:
        interpolate_poly([(1, 1), (2, 4), (3, 9), (4, 17)], 2)
    assert exc.value.point == (4, 17)
    with pytest.raises(UsageError):
        interpolate_poly([(1, 1), (1, 2)], 1)


# -- properties


@st.composite
def unit_series(draw, order=6):
    tail = draw(st.lists(small_q, min_size=order, max_size=order))
    return S([1] + tail, order)


@st.composite
def reversible_series(draw, order=6):
    g1 = draw(small_q.filter(lambda q: q != 0))
    tail = draw(st.lists(small_q, min_size=order - 1, max_size=order - 1))
    return S([0, g1] + tail, order)


@pytest.mark.property
@given(reversible_series())
def test_reverse_roundtrip(g):
    h = series_reverse(g)
    z = TruncSeries.variable(g.order)
    assert series_compose(g, h) == z
    assert series_compose(h, g) == z


@pytest.mark.property
@given(unit_series(), unit_series())
def test_log_of_product(a, b):
    assert series_log(series_mul(a, b)) == series_log(a) + series_log(b)


@pytest.mark.property
@given(unit_series())
def test_exp_log_inverse(a):
    assert series_exp(series_log(a)) == a


@pytest.mark.property
@given(
    st.integers(1, 4).flatmap(
        lambda n: st.tuples(
            st.lists(st.lists(small_q, min_size=n, max_size=n), min_size=n, max_size=n),
            st.lists(small_q, min_size=n, max_size=n),
        )
    )
)
def test_solve_planted(data):
    A, x = data
    if solve_linear(A).rank < len(A):
        return  # singular draw; nothing planted to recover
    b = [sum(a * v for a, v in zip(row, x)) for row in A]
    sol = solve_linear(A, b)
    assert sol.unique and list(sol.particular) == x


@pytest.mark.property
@given(st.lists(small_q, min_size=1, max_size=5), st.integers(0, 3))
def test_interpolation_reproduces_points(coeffs, extra):
    p = UniPoly(coeffs)
    deg = max(p.degree, 0)
    pts = [(x, p(x)) for x in range(-2, deg + extra)]
    fit = interpolate_poly(pts, deg)
    assert fit == p
    assert all(fit(x) == y for x, y in pts)
