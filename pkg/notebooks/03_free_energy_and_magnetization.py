"""
Numbers from strips and an ODE from digits
==========================================

Finite-width transfer operators give the free energy to several digits.
They give the magnetization to far fewer, and an integer-relation search
only finds the differential equation once enough digits are available.
"""

import mpmath

from onsagerkit.guess import onsager_free_energy
from onsagerkit.relation import (
    estimate_magnetization, magnetization_reference, ode_from_relation, ode_labels,
    oracle_value_rows, simultaneous_relation,
)
from onsagerkit.transfer import numeric_free_energy

for x in (1.5, 2.0, 3.0):
    est = numeric_free_energy(10, x)
    exact = onsager_free_energy(x)
    print(f"x={x}: strip {est.value:.12f}  exact {exact:.12f}  diff {abs(est.value - exact):.1e}")

for x in (1.5, 3.0):
    m = estimate_magnetization(x, 10)
    print(f"x={x}: m ~ {m.m:.5f} +- {m.m_error:.1e}, reference {magnetization_reference(x):.5f}")

# 30 good digits at 8 points: the relation is found and it is the known ODE
xs = [mpmath.mpf(3) + mpmath.mpf(k) / 3 for k in range(8)]
rel = simultaneous_relation(oracle_value_rows(xs, 30), 30, labels=ode_labels())
a, b = ode_from_relation(rel.coefficients)
print("a(x) =", a.format("x"))
print("b(x) =", b.format("x"))

# 6 digits is about what the strips deliver, and it is not enough
print("6 digits:", simultaneous_relation(oracle_value_rows(xs, 6), 6))
