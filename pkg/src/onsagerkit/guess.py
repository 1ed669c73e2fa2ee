"""Guessing a rational closed form for coefficient ratios, and Onsager's formula as reference.

The guesser is deliberately plain: for each candidate degree pair it solves
P(r) - s_r Q(r) = 0 exactly on the first few points and demands that the
solution also reproduces at least two held-out points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

from .errors import ConvergenceError, DomainError, UsageError
from .exactmath import (
    TruncSeries,
    UniPoly,
    format_factored,
    frac_str,
    solve_linear,
    to_fraction,
)

MIN_VALIDATION = 2


@dataclass(frozen=True)
class RationalGuess:
    """numerator(r)/denominator(r) in lowest terms with monic denominator."""

    numerator: UniPoly
    denominator: UniPoly

    def __post_init__(self):
        if self.denominator.is_zero():
            raise UsageError("zero denominator")
        g = self.numerator.gcd(self.denominator)
        num, den = self.numerator // g, self.denominator // g
        lead = den.lead()
        object.__setattr__(self, "numerator", num * (1 / lead))
        object.__setattr__(self, "denominator", den * (1 / lead))

    def __call__(self, r):
        return self.numerator(r) / self.denominator(r)

    @property
    def degrees(self) -> tuple[int, int]:
        return max(self.numerator.degree, 0), self.denominator.degree

    def format(self, var: str = "r") -> str:
        """Canonical factored string, e.g. ``r*(2*r+1)^2/(r+1)^3``."""
        num = format_factored(self.numerator, var)
        if self.denominator.degree == 0:
            return num
        den = format_factored(self.denominator, var)
        if "*" in den:
            den = f"({den})"
        return f"{num}/{den}"

    def to_json(self) -> dict:
        return {
            "numerator": self.numerator.to_json(),
            "denominator": self.denominator.to_json(),
            "formula": self.format(),
        }


@dataclass(frozen=True)
class GuessReport:
    """Outcome of a guessing attempt.

    ``status`` is "validated", "underdetermined" (not enough data to hold
    points back at the requested degree) or "none" (no candidate validated).
    """

    status: str
    guess: RationalGuess | None = None
    fitted_points: int = 0
    validation_points: int = 0
    tried: tuple[tuple[int, int], ...] = field(default=(), repr=False)


def _degree_pairs(max_deg: int):
    pairs = [(dn, dd) for dn in range(max_deg + 1) for dd in range(max_deg + 1)]
    return sorted(pairs, key=lambda p: (p[0] + p[1], p[1]))


def _fit(seq: list[Fraction], dn: int, dd: int, count: int) -> RationalGuess | None:
    rows = []
    for r in range(1, count + 1):
        s = seq[r - 1]
        rows.append([Fraction(r) ** i for i in range(dn + 1)] + [-s * r**j for j in range(dd + 1)])
    sol = solve_linear(rows)
    if sol.dimension != 1:
        return None
    vec = sol.nullspace[0]
    num, den = UniPoly(vec[: dn + 1]), UniPoly(vec[dn + 1 :])
    if den.is_zero() or any(den(r) == 0 for r in range(1, len(seq) + 1)):
        return None
    return RationalGuess(num, den)


def guess_report(
    seq: Sequence, max_deg: int, min_validation: int = MIN_VALIDATION
) -> GuessReport:
    """Lowest-degree rational R(r) with seq[r-1] = R(r), checked on held-out points."""
    if max_deg < 0:
        raise UsageError("max_deg must be >= 0")
    if min_validation < 1:
        raise UsageError("at least one validation point is mandatory")
    values = [to_fraction(v) for v in seq]
    tried = []
    underdetermined = False
    for dn, dd in _degree_pairs(max_deg):
        unknowns = dn + dd + 1  # projective dimension
        if unknowns + min_validation > len(values):
            underdetermined = True
            continue
        tried.append((dn, dd))
        cand = _fit(values, dn, dd, unknowns)
        if cand is None:
            continue
        if all(cand(r) == values[r - 1] for r in range(1, len(values) + 1)):
            return GuessReport(
                "validated", cand, unknowns, len(values) - unknowns, tuple(tried)
            )
    return GuessReport("underdetermined" if underdetermined else "none", tried=tuple(tried))


def guess_rational(
    seq: Sequence, max_deg: int, min_validation: int = MIN_VALIDATION
) -> RationalGuess | None:
    return guess_report(seq, max_deg, min_validation).guess


def ratios(seq: Sequence) -> list[Fraction]:
    """[s_2/s_1, s_3/s_2, ...]; zero entries are refused."""
    values = [to_fraction(v) for v in seq]
    if any(v == 0 for v in values[:-1]):
        raise DomainError("cannot form ratios across a zero term")
    return [b / a for a, b in zip(values, values[1:])]


def closed_form_b(r: int) -> Fraction:
    """b_{2r} = -C(2r, r)^2 / (r 4^(r+1))."""
    if r < 1:
        raise UsageError("r starts at 1")
    return Fraction(-comb(2 * r, r) ** 2, r * 4 ** (r + 1))


@dataclass(frozen=True)
class ClosedFormReport:
    rows: tuple[tuple[int, Fraction, Fraction, bool], ...]

    @property
    def all_ok(self) -> bool:
        return bool(self.rows) and all(ok for *_, ok in self.rows)

    @property
    def mismatches(self) -> list[int]:
        return [r for r, _, _, ok in self.rows if not ok]

    def table(self) -> str:
        lines = [f"{'r':>3}  {'b_2r (pipeline)':>28}  {'closed form':>28}  verdict"]
        for r, got, want, ok in self.rows:
            lines.append(
                f"{r:>3}  {frac_str(got):>28}  {frac_str(want):>28}  {'PASS' if ok else 'FAIL'}"
            )
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "all_ok": self.all_ok,
            "rows": [
                {"r": r, "computed": frac_str(g), "expected": frac_str(w), "ok": ok}
                for r, g, w, ok in self.rows
            ],
        }


def verify_closed_form(G: TruncSeries, extended_terms: int | None = None) -> ClosedFormReport:
    """Compare b_{2r} in G with the closed form for r = 1..extended_terms.

    By default every coefficient G carries is checked.
    """
    available = G.order // 2
    count = available if extended_terms is None else extended_terms
    if count > available:
        raise UsageError(f"G only carries {available} even coefficients, {count} requested")
    rows = []
    for r in range(1, count + 1):
        got, want = G[2 * r], closed_form_b(r)
        rows.append((r, got, want, got == want))
    return ClosedFormReport(tuple(rows))


def onsager_g_reference(order: int) -> TruncSeries:
    """-(1/4) sum_r C(2r, r)^2 z^(2r) / r through z^order."""
    if order < 2:
        raise UsageError("order must be >= 2")
    coeffs = [Fraction(0)] * (order + 1)
    for r in range(1, order // 2 + 1):
        coeffs[2 * r] = Fraction(-comb(2 * r, r) ** 2, 4 * r)
    return TruncSeries(coeffs, order)


def onsager_argument_squared(x) -> Fraction | float:
    """(x - 1/x)^2/(x + 1/x)^4, exact when x is exact."""
    s = x + 1 / x
    return (s * s - 4) / s**4


def onsager_free_energy(x, tol: float = 1e-14, max_terms: int = 1_000_000) -> float:
    """f(x, 1) = log(x + 1/x) + G_ref((x - 1/x)/(x + 1/x)^2).

    Only the square of the argument enters, and it is formed exactly when x
    is an int or Fraction, so f(x) and f(1/x) then agree bit for bit.
    """
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError("x must be finite")
        x = Fraction(x)
    else:
        x = to_fraction(x)
    if x <= 0:
        raise DomainError("x must be positive")
    s = x + 1 / x
    q = onsager_argument_squared(x)
    qf = float(q)
    if q >= Fraction(1, 16) or 1 - 16 * qf < 1e-12:
        raise DomainError("x is at the critical point 1+sqrt(2) (or its dual); the series diverges")
    total = 0.0
    term = 4 * qf  # C(2,1)^2 q / 1
    r = 1
    while True:
        total += term
        # t_{r+1}/t_r = (2(2r+1)/(r+1))^2 r/(r+1) q, bounded by 16 q
        rho = 16 * qf
        tail = term * rho / (1 - rho) if term else 0.0
        if tail < tol:
            break
        if r >= max_terms:
            raise ConvergenceError(
                "reference series did not reach tolerance",
                {"terms": r, "tail_bound": tail, "argument_squared": qf},
            )
        term *= (2 * (2 * r + 1) / (r + 1)) ** 2 * r / (r + 1) * qf
        r += 1
    return math.log(float(s)) - total / 4
