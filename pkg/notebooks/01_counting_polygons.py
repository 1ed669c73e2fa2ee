"""
From spin configurations to lattice polygons
============================================

Count weighted spin matrices on small tori, switch to the high-temperature
variable w, and watch the low coefficients of Z turn into polynomials in the
number of sites.
"""

from onsagerkit import GridSpec, brute_partition, partition_to_Z, z_series
from onsagerkit.isingpoly import ising_polynomials, assemble_F

# a 2x2 torus has only 16 spin matrices, so brute force is instant
g = GridSpec(2, 2)
P = brute_partition(g)
print("P_{2,2}(x, 1) exponents:", P.at_y1())
print("Z_{2,2}(w) =", partition_to_Z(P.at_y1(), g).format("w"))

# the transfer operator gives the same series without listing 2^N states
print("transfer  =", [int(c) for c in z_series(2, 2, 8)])

# on a large enough torus, the w^4 coefficient is just the number of unit squares
for n in (5, 7, 9):
    Z = z_series(n, n + 2, 8)
    print(f"{n}x{n + 2}: N = {n * (n + 2):3d}, [w^4] = {Z[4]}, [w^6] = {Z[6]}")

# polynomials p_e(N) through e = 12 from a handful of admissible grids
for p in ising_polynomials(12):
    print(f"p_{p.edge_count}(N) =", p.format())

# the free energy only sees the linear coefficients
print("F(w) =", assemble_F(12).format("w"))
