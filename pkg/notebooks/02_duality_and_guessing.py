"""
Duality, a change of variable and a guessed closed form
=======================================================

Take F(w), remove the log(1+w^2) piece, rewrite everything in the variable
that the duality map leaves invariant, and let a rational fit find the ratio
of successive coefficients.
"""

from fractions import Fraction
from math import comb

from onsagerkit.duality import (
    ChangeOfVariable, change_to_z, fbar_series, g_coefficients, solve_z_ansatz,
)
from onsagerkit.guess import guess_report, onsager_g_reference, ratios
from onsagerkit.isingpoly import assemble_F

# which bilinear relations between w and z survive the duality map?
sol = solve_z_ansatz()
print(sol.describe())
cov = sol.change_of_variable(2, 1)
print("z(w) numerator:", cov.numerator().format("w"), " denominator:", cov.denominator().format("w"))
print("w(z) =", cov.reversion(9).format("z"))

# ten coefficients are needed before the ratio fit has points left to validate
# on; order 20 takes about half a minute
R = 20
F = assemble_F(R)
G = change_to_z(fbar_series(F), cov)
b = g_coefficients(G)
for r, v in enumerate(b, start=1):
    print(f"b_{2 * r} = {v}")

rep = guess_report(ratios(b), 3)
print("ratio guess:", rep.status, rep.guess.format() if rep.guess else None)

closed = [-Fraction(comb(2 * r, r) ** 2, r * 4 ** (r + 1)) for r in range(1, len(b) + 1)]
print("closed form matches:", closed == b)
print("matches reference series:", G == onsager_g_reference(R).scale_variable(Fraction(1, 2)))
