import math

import pytest
from hypothesis import given, strategies as st

from onsagerkit.errors import ConvergenceError, ResourceError, UsageError
from onsagerkit.isingcore import GridSpec, brute_partition, brute_Z
from onsagerkit.transfer import (
    build_dense,
    numeric_free_energy,
    z_series,
    z_series_batch,
)


def test_dense_n1_1():
    A = build_dense(1)
    assert A.exponents.tolist() == [[2, 0], [0, 2]]
    assert A.trace_power(1) == {1: 2}


def test_dense_2x2_trace():
    assert build_dense(2).trace_power(2) == {-4: 2, 0: 12, 4: 2}


@pytest.mark.parametrize("n1,n2", [(1, 3), (2, 3), (3, 2), (3, 3), (4, 2)])
def test_dense_trace_matches_brute(n1, n2):
    A = build_dense(n1)
    Tr = A.trace_power(n2)
    assert Tr == brute_partition(GridSpec(n1, n2)).at_y1()
    assert sum(Tr.values()) == 2 ** (n1 * n2)


def test_dense_cap():
    with pytest.raises(ResourceError):
        build_dense(9)


def test_z_series_2x2():
    assert list(z_series(2, 2, 8)) == [1, 0, 4, 0, 22, 0, 4, 0, 1]


def test_z_series_order_bound():
    with pytest.raises(UsageError):
        z_series(2, 2, 9)


@pytest.mark.parametrize("n1", [1, 2, 3, 4])
@pytest.mark.parametrize("n2", [1, 2, 3, 4, 5, 6])
def test_z_series_matches_brute(n1, n2):
    N = n1 * n2
    expected = list(brute_Z(GridSpec(n1, n2)).coeffs)
    expected += [0] * (2 * N + 1 - len(expected))
    for orbits in (True, False):
        assert list(z_series(n1, n2, 2 * N, use_orbits=orbits)) == expected


@pytest.mark.parametrize("n", [5, 6, 7])
def test_low_coefficients_are_the_ising_polynomials(n):
    Z = z_series(n, n + 2, 8)
    N = n * (n + 2)
    assert Z[4] == N
    if n >= 7:
        assert Z[6] == 2 * N


def test_batch_equals_single():
    batch = z_series_batch(5, [5, 7, 9], 10)
    for n2, Z in batch.items():
        assert Z == z_series(5, n2, 10)


@pytest.mark.parametrize("n1,n2,shift", [(4, 3, 1), (5, 4, 2), (6, 3, 3)])
def test_row_rotation_invariance(n1, n2, shift):
    rotated = [(i + shift) % n1 for i in range(n1)]
    R = 2 * n1
    assert z_series(n1, n2, R, row_order=rotated) == z_series(n1, n2, R)


@pytest.mark.parametrize("n1,n2", [(2, 5), (3, 5), (4, 6), (3, 7)])
def test_row_column_exchange(n1, n2):
    R = 2 * min(n1, n2) * min(n1, n2)
    R = min(R, 2 * n1 * n2, 16)
    assert z_series(n1, n2, R) == z_series(n2, n1, R)


def test_exact_cap():
    with pytest.raises(ResourceError):
        z_series(15, 15, 4)


# -- numeric path


def test_free_energy_at_infinite_temperature():
    est = numeric_free_energy(6, 1.0)
    assert abs(est.value - math.log(2)) < 1e-12


def test_strip_free_energy_converges_in_width():
    # far from criticality the width dependence is exponentially small
    f8 = numeric_free_energy(8, 1.5).value
    f10 = numeric_free_energy(10, 1.5).value
    assert abs(f8 - f10) < 1e-5


def test_free_energy_convergence_error():
    with pytest.raises(ConvergenceError) as exc:
        numeric_free_energy(6, 3.0, tol=1e-300, max_iter=5)
    assert "last_residuals" in exc.value.diagnostics


def test_residual_shrinks_at_the_end():
    est = numeric_free_energy(10, 2.5)
    tail = est.history[-10:]
    assert tail[-1] <= tail[0]
    assert est.residual < 1e-12


@pytest.mark.property
@given(
    st.floats(0.3, 4.0),
    st.floats(0.5, 2.0),
    st.integers(2, 7),
)
def test_field_reversal_symmetry(x, y, n1):
    a = numeric_free_energy(n1, x, y).value
    b = numeric_free_energy(n1, x, 1 / y).value
    assert abs(a - b) < 1e-12
