from fractions import Fraction

import pytest

from onsagerkit.errors import InconsistencyError, UsageError
from onsagerkit.exactmath import TruncSeries, UniPoly
from onsagerkit.isingcore import GridSpec
from onsagerkit.isingpoly import (
    IsingPolynomial,
    admissible,
    assemble_F,
    collect_z_data,
    default_grids,
    fit_ising_polynomial,
    ising_polynomial,
    ising_polynomials,
    linear_coefficient,
    log_Z_per_site,
)
from onsagerkit.transfer import z_series

N = UniPoly([0, 1])

# p_2..p_16 as exact polynomials in N; p_10 carries the factor 2 that the
# linear-coefficient list (a_10 = 12) requires
EXPECTED = {
    2: UniPoly(),
    4: N,
    6: 2 * N,
    8: N * (N + 9) * Fraction(1, 2),
    10: 2 * N * (N + 6),
    12: N * (N + 7) * (N + 32) * Fraction(1, 6),
    14: N * (N * N + 21 * N + 130),
    16: N * (N**3 + 102 * N**2 + 1715 * N + 11766) * Fraction(1, 24),
}


@pytest.fixture(scope="module")
def polys16():
    return {p.edge_count: p for p in ising_polynomials(16)}


def test_admissibility_rule():
    assert admissible(GridSpec(11, 11), 20)
    assert admissible(GridSpec(5, 5), 6)
    assert not admissible(GridSpec(6, 6), 6)  # a single straight winding loop has 6 edges
    assert admissible(GridSpec(6, 7), 4)
    assert not admissible(GridSpec(10, 13), 20)
    assert not admissible(GridSpec(12, 12), 12)


def test_default_grids():
    assert default_grids(20) == [GridSpec(11, n) for n in range(11, 26, 2)]
    assert all(admissible(g, 20) for g in default_grids(20))


def test_polynomials_through_16(polys16):
    for e, poly in EXPECTED.items():
        assert polys16[e].poly == poly, e


def test_degree_pattern(polys16):
    for e, p in polys16.items():
        if e >= 4:
            assert p.degree == e // 4


def test_linear_coefficients(polys16):
    got = [linear_coefficient(polys16[e]) for e in range(2, 17, 2)]
    assert got == [0, 1, 2, Fraction(9, 2), 12, Fraction(112, 3), 130, Fraction(1961, 4)]


def test_fit_reproduces_measured_coefficients():
    grids = default_grids(12)
    data = collect_z_data(grids, 12)
    for e in range(2, 13, 2):
        p = fit_ising_polynomial(e, data)
        assert all(p(g.N) == data[g][e] for g in grids)


def test_single_polynomial_entry_point():
    assert ising_polynomial(8).poly == EXPECTED[8]


def test_assemble_small_orders():
    assert assemble_F(4) == TruncSeries([0, 0, 0, 0, 1], 4)
    assert assemble_F(8) == TruncSeries([0, 0, 0, 0, 1, 0, 2, 0, Fraction(9, 2)], 8)
    with pytest.raises(UsageError):
        assemble_F(2)


def test_inadmissible_grids_rejected():
    with pytest.raises(UsageError):
        ising_polynomial(6, [GridSpec(6, 6), GridSpec(6, 7), GridSpec(6, 9)])


def test_winding_loops_contaminate_inadmissible_grids():
    assert z_series(5, 5, 6)[6] == 2 * 25
    assert z_series(6, 6, 6)[6] == 2 * 36 + 12
    grids = [GridSpec(6, n) for n in (6, 7, 9, 11)]
    data = collect_z_data(grids, 6)
    with pytest.raises(InconsistencyError):
        fit_ising_polynomial(6, data, check_admissible=False)


def test_fit_preconditions():
    data = collect_z_data(default_grids(8), 8)
    short = dict(list(data.items())[:3])
    with pytest.raises(UsageError):
        fit_ising_polynomial(8, short)
    dup = {GridSpec(5, 7): data[next(iter(data))], GridSpec(7, 5): data[next(iter(data))]}
    with pytest.raises(UsageError):
        fit_ising_polynomial(4, dup)
    with pytest.raises(UsageError):
        fit_ising_polynomial(5, data)


def test_json_roundtrip(polys16):
    p = polys16[12]
    obj = p.to_json()
    assert obj["a1"] == "112/3"
    assert IsingPolynomial.from_json(obj) == p


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_log_Z_stabilizes_to_F(n, polys16):
    Z = z_series(n, n, 10)
    L = log_Z_per_site(Z, n * n)
    for e in range(2, 11, 2):
        if admissible(GridSpec(n, n), e):
            assert L[e] == polys16[e].linear_coefficient, (n, e)


def test_cross_grid_consistency(polys16):
    other = ising_polynomials(16, [GridSpec(11, n) for n in range(11, 22, 2)])
    for p in other:
        assert p.poly == polys16[p.edge_count].poly
