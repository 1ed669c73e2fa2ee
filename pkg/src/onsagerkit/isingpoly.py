"""Ising polynomials p_e(N) by exact fitting over torus data, and the series F(w).

The coefficient of w^e in Z_{n1,n2}(w) equals p_e(n1*n2) only when no
non-contractible even subgraph with e edges fits on the torus.  A loop
winding once around a side of length n has length congruent to n mod 2, and
two windings cost at least 2n edges, so a grid is admissible for even e iff

    2*min(n1, n2) > e  and  each side is odd or longer than e.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import InconsistencyError, UsageError
from .exactmath import TruncSeries, UniPoly, frac_str, interpolate_poly, series_log
from .isingcore import GridSpec
from .transfer import z_series_batch


def admissible(g: GridSpec, e: int) -> bool:
    """True if the w^e coefficient of Z on ``g`` is free of winding contributions."""
    if 2 * min(g.n1, g.n2) <= e:
        return False
    return all(n % 2 == 1 or n > e for n in (g.n1, g.n2))


def default_grids(max_edges: int, surplus: int = 2) -> list[GridSpec]:
    """Odd square-ish tori admissible for every even e <= max_edges.

    n1 is the smallest odd integer with 2*n1 > max_edges; n2 runs over odd
    values from n1 upward, giving floor(max_edges/4) + 1 + surplus grids.
    """
    n1 = max_edges // 2 + 1
    if n1 % 2 == 0:
        n1 += 1
    count = max_edges // 4 + 1 + surplus
    return [GridSpec(n1, n1 + 2 * k) for k in range(count)]


def collect_z_data(grids: Iterable[GridSpec], order: int) -> dict[GridSpec, TruncSeries]:
    """Z-series for each grid, batching all grids that share n1 into one sweep."""
    by_rows: dict[int, list[int]] = defaultdict(list)
    grids = list(grids)
    for g in grids:
        by_rows[g.n1].append(g.n2)
    out = {}
    for n1, n2s in by_rows.items():
        series = z_series_batch(n1, n2s, order)
        for n2 in n2s:
            out[GridSpec(n1, n2)] = series[n2]
    return {g: out[g] for g in grids}


@dataclass(frozen=True)
class IsingPolynomial:
    edge_count: int
    poly: UniPoly

    @property
    def degree(self) -> int:
        return max(self.poly.degree, 0)

    @property
    def linear_coefficient(self) -> Fraction:
        return self.poly[1]

    def __call__(self, N):
        return self.poly(N)

    def format(self) -> str:
        return self.poly.format("N")

    def to_json(self) -> dict:
        return {
            "e": self.edge_count,
            "poly": [frac_str(c) for c in self.poly.coeffs],
            "a1": frac_str(self.linear_coefficient),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IsingPolynomial":
        return cls(int(obj["e"]), UniPoly(Fraction(c) for c in obj["poly"]))


def fit_ising_polynomial(
    e: int,
    data: Mapping[GridSpec, TruncSeries],
    *,
    check_admissible: bool = True,
) -> IsingPolynomial:
    """Fit p_e(N) through the measured coefficients of w^e.

    The degree is raised until a fit validates on every surplus point; at
    least one surplus point is required.
    """
    if e < 2 or e % 2:
        raise UsageError(f"edge count must be even and >= 2, got {e}")
    grids = list(data)
    if check_admissible:
        bad = [g for g in grids if not admissible(g, e)]
        if bad:
            raise UsageError(f"grids {bad} are not admissible for e={e}")
    Ns = [g.N for g in grids]
    if len(set(Ns)) != len(Ns):
        raise UsageError("duplicate site counts N among the grids")
    need = e // 4 + 2
    if len(Ns) < need:
        raise UsageError(f"p_{e} needs at least {need} distinct N values, got {len(Ns)}")
    for g in grids:
        if data[g].order < e:
            raise UsageError(f"series for {g} truncated below w^{e}")

    points = sorted((g.N, data[g][e]) for g in grids)
    last_error = None
    for degree in range(len(points) - 1):
        try:
            poly = interpolate_poly(points, degree)
        except InconsistencyError as exc:
            last_error = exc
            continue
        if poly[0] != 0:
            raise InconsistencyError(
                f"p_{e} fit has constant term {poly[0]}; grid data is contaminated"
            )
        return IsingPolynomial(e, poly)
    raise InconsistencyError(
        f"no polynomial fit for p_{e} validates on the surplus points",
        point=last_error.point if last_error else None,
    )


def ising_polynomial(
    e: int, grids: Sequence[GridSpec] | None = None, *, check_admissible: bool = True
) -> IsingPolynomial:
    grids = default_grids(e) if grids is None else list(grids)
    return fit_ising_polynomial(e, collect_z_data(grids, e), check_admissible=check_admissible)


def ising_polynomials(
    max_edges: int, grids: Sequence[GridSpec] | None = None
) -> list[IsingPolynomial]:
    """p_2, p_4, ..., p_max_edges from one shared set of torus computations."""
    grids = default_grids(max_edges) if grids is None else list(grids)
    data = collect_z_data(grids, max_edges)
    return [fit_ising_polynomial(e, data) for e in range(2, max_edges + 1, 2)]


def linear_coefficient(p: IsingPolynomial) -> Fraction:
    return p.linear_coefficient


def F_from_polynomials(polys: Iterable[IsingPolynomial], order: int) -> TruncSeries:
    coeffs = [Fraction(0)] * (order + 1)
    for p in polys:
        if p.edge_count <= order:
            coeffs[p.edge_count] = p.linear_coefficient
    return TruncSeries(coeffs, order)


def assemble_F(order: int, grids: Sequence[GridSpec] | None = None) -> TruncSeries:
    """F(w) = sum_e a_e w^e through w^order, a_e the coefficient of N in p_e."""
    if order < 4 or order % 2:
        raise UsageError("assemble_F needs an even order >= 4")
    return F_from_polynomials(ising_polynomials(order, grids), order)


def log_Z_per_site(Z: TruncSeries, N: int) -> TruncSeries:
    """log(Z)/N as an exact series; Z must have constant term 1."""
    return series_log(Z) * Fraction(1, N)
