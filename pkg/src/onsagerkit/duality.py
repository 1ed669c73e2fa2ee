"""Kramers-Wannier duality: the involution, the symmetric z-ansatz, and the move to G(z).

Under x = (1+w)/(1-w) the dual point x* = (x+1)/(x-1) equals 1/w, so any
rational function of x + x* and x*x* becomes a rational function of w alone.
Clearing denominators in the template therefore gives a polynomial relation
in w and z whose coefficients are linear forms in the twelve unknowns; no
elimination ideal is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real

from .errors import DomainError, InternalError, UsageError
from .exactmath import (
    TruncSeries,
    UniPoly,
    format_factored,
    series_compose,
    series_inverse,
    series_log,
    series_mul,
    series_reverse,
    solve_linear,
    to_fraction,
)

UNKNOWNS = (
    "a00", "a10", "a01", "a20", "a11", "a02",
    "b00", "b10", "b01", "b20", "b11", "b02",
)
# (power of x + x*, power of x*x*) for each template slot
_TEMPLATE_MONOMIALS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
# pivot preference when reducing relation forms modulo the imposed conditions
_ELIMINATION_ORDER = ("a11", "a20", "a02", "a10", "a01", "a00",
                      "b11", "b02", "b01", "b20", "b10", "b00")


def dual_point(x):
    """x* = (x + 1)/(x - 1)."""
    if x == 1:
        raise DomainError("x = 1 is the pole of the duality map")
    return (x + 1) / (x - 1)


def dual_w(w):
    """w* = (1 - w)/(1 + w), the duality map in the high-temperature variable."""
    if w == -1:
        raise DomainError("w = -1 is the pole of the dual map")
    return (1 - w) / (1 + w)


def x_from_w(w):
    if w == 1:
        raise DomainError("w = 1 corresponds to x = infinity")
    return (1 + w) / (1 - w)


def w_from_x(x):
    if x == -1:
        raise DomainError("x = -1 has no w image")
    return (x - 1) / (x + 1)


LinearForm = tuple[Fraction, ...]


def _form(values: dict[str, int | Fraction]) -> LinearForm:
    return tuple(Fraction(values.get(name, 0)) for name in UNKNOWNS)


def format_form(form: LinearForm) -> str:
    out = ""
    for name, c in zip(UNKNOWNS, form):
        if not c:
            continue
        mag = "" if abs(c) == 1 else f"{abs(c)}*"
        if not out:
            out = ("-" if c < 0 else "") + mag + name
        else:
            out += ("-" if c < 0 else "+") + mag + name
    return out or "0"


def template_relation() -> dict[tuple[int, int], LinearForm]:
    """Coefficients of w^i z^j in Num - z*Den after clearing (w(1-w))^2.

    With s = x + x* = (1+w^2)/(w(1-w)) and p = x*x* = (1+w)/(w(1-w)),
    s^i p^j (w(1-w))^2 = (1+w^2)^i (1+w)^j (w(1-w))^(2-i-j).
    """
    one_plus_w2 = UniPoly([1, 0, 1])
    one_plus_w = UniPoly([1, 1])
    w_one_minus_w = UniPoly([0, 1, -1])
    forms: dict[tuple[int, int], list[Fraction]] = {}
    for slot, (i, j) in enumerate(_TEMPLATE_MONOMIALS):
        cleared = one_plus_w2**i * one_plus_w**j * w_one_minus_w ** (2 - i - j)
        for deg, c in enumerate(cleared.coeffs):
            forms.setdefault((deg, 0), [Fraction(0)] * 12)[slot] += c
            forms.setdefault((deg, 1), [Fraction(0)] * 12)[6 + slot] -= c
    return {k: tuple(v) for k, v in sorted(forms.items()) if any(v)}


def _reduce_form(form: LinearForm, pivot_rows: list[tuple[int, list[Fraction]]]) -> LinearForm:
    out = list(form)
    for col, row in pivot_rows:
        f = out[col]
        if f:
            out = [a - f * b for a, b in zip(out, row)]
    return tuple(out)


def _pivot_rows(equations: list[LinearForm]) -> list[tuple[int, list[Fraction]]]:
    """Row-reduce the conditions, choosing pivots in ``_ELIMINATION_ORDER``."""
    rows = [list(e) for e in equations]
    pivots = []
    for name in _ELIMINATION_ORDER:
        col = UNKNOWNS.index(name)
        idx = next((i for i, r in enumerate(rows) if r[col] != 0), None)
        if idx is None:
            continue
        row = rows.pop(idx)
        inv = 1 / row[col]
        row = [v * inv for v in row]
        rows = [[a - r[col] * b for a, b in zip(r, row)] for r in rows]
        pivots = [(c, [a - pr[col] * b for a, b in zip(pr, row)]) for c, pr in pivots]
        pivots.append((col, row))
    if any(any(r) for r in rows):
        raise InternalError("ansatz conditions did not fully reduce")
    return pivots


def _split_proportional(forms: dict[int, LinearForm]) -> tuple[LinearForm, UniPoly]:
    """Write {deg: form} as form0 * poly(w), with form0 sign-normalized."""
    nonzero = {d: f for d, f in forms.items() if any(f)}
    if not nonzero:
        return tuple(Fraction(0) for _ in UNKNOWNS), UniPoly()
    base = nonzero[min(nonzero)]
    lead_idx = next(i for i, v in enumerate(base) if v)
    base = tuple(v / base[lead_idx] for v in base)
    coeffs = {}
    for d, f in nonzero.items():
        ratio = f[lead_idx]
        if tuple(ratio * b for b in base) != f:
            raise InternalError("relation coefficients are not proportional to one form")
        coeffs[d] = ratio
    return base, UniPoly(coeffs.get(d, 0) for d in range(max(coeffs) + 1))


@dataclass(frozen=True)
class AnsatzSolution:
    """Outcome of imposing odd total degree on the cleared template relation.

    ``family`` is the nullspace of the imposed conditions (the admissible
    unknown vectors).  The surviving relation reads
    ``alpha * w_part(w) + beta * z * z_part(w) = 0``.
    """

    conditions: tuple[LinearForm, ...]
    family: tuple[LinearForm, ...]
    relation: dict[tuple[int, int], LinearForm] = field(repr=False)
    alpha: LinearForm
    w_part: UniPoly
    beta: LinearForm
    z_part: UniPoly

    @property
    def w_degree(self) -> int:
        return max(i for i, _ in template_relation())

    @property
    def z_degree(self) -> int:
        return max(j for _, j in template_relation())

    def relation_dimension(self) -> int:
        """Dimension of the span of relations obtained from the family."""
        rows = []
        for vec in self.family:
            rows.append(
                [sum(c * v for c, v in zip(form, vec)) for form in self.relation.values()]
            )
        return solve_linear(rows).rank

    def evaluate(self, unknowns: dict[str, Fraction]) -> tuple[Fraction, Fraction]:
        vec = _form(unknowns)
        a = sum(c * v for c, v in zip(self.alpha, vec))
        b = sum(c * v for c, v in zip(self.beta, vec))
        return a, b

    def describe(self) -> str:
        return (
            f"{format_factored(self.w_part, 'w')}*({format_form(self.alpha)})"
            f" + {format_factored(self.z_part, 'w')}*z*({format_form(self.beta)}) = 0"
        )

    def change_of_variable(self, alpha, beta) -> "ChangeOfVariable":
        """z = c w (1-w^2)/(1+w^2)^2 for given values of the two surviving forms."""
        alpha, beta = to_fraction(alpha), to_fraction(beta)
        if beta == 0 or alpha == 0:
            raise DomainError("both surviving forms must be nonzero to define z(w)")
        # alpha*w_part + beta*z*z_part = 0  =>  z = -(alpha/beta) w_part/z_part
        target = UniPoly([0, 1, 0, -1])
        ratio = -(alpha / beta) * self.w_part.lead() / (self.z_part.lead() * target.lead())
        cov = ChangeOfVariable(ratio)
        if (-(alpha / beta) * self.w_part) * cov.denominator() != cov.numerator() * self.z_part:
            raise InternalError("surviving relation is not of the form z = c w(1-w^2)/(1+w^2)^2")
        return cov


def solve_z_ansatz() -> AnsatzSolution:
    relation = template_relation()
    conditions = [f for (i, j), f in relation.items() if (i + j) % 2 == 0]
    sol = solve_linear(conditions)
    if not sol.nullspace:
        raise InternalError("ansatz conditions admit no solution")
    pivots = _pivot_rows(conditions)
    reduced = {k: _reduce_form(f, pivots) for k, f in relation.items()}
    for (i, j), f in reduced.items():
        if (i + j) % 2 == 0 and any(f):
            raise InternalError(f"w^{i} z^{j} survives the imposed conditions")
    alpha, w_part = _split_proportional({i: f for (i, j), f in reduced.items() if j == 0})
    beta, z_part = _split_proportional({i: f for (i, j), f in reduced.items() if j == 1})
    # forms come back with leading coefficient 1; fix the overall sign so the
    # z part has positive leading coefficient
    if z_part.lead() < 0:
        w_part, z_part = -w_part, -z_part
    return AnsatzSolution(
        tuple(conditions), sol.nullspace, reduced, alpha, w_part, beta, z_part
    )


@dataclass(frozen=True)
class ChangeOfVariable:
    """z(w) = c w (1 - w^2)/(1 + w^2)^2."""

    c: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "c", to_fraction(self.c))
        if self.c == 0:
            raise UsageError("c must be nonzero")

    def numerator(self) -> UniPoly:
        return UniPoly([0, self.c, 0, -self.c])

    def denominator(self) -> UniPoly:
        return UniPoly([1, 0, 1]) ** 2

    def __call__(self, w):
        return self.c * w * (1 - w * w) / (1 + w * w) ** 2

    def forward_series(self, order: int) -> TruncSeries:
        num = TruncSeries.from_poly(self.numerator(), order)
        den = TruncSeries.from_poly(self.denominator(), order)
        return series_mul(num, series_inverse(den))

    def reversion(self, order: int) -> TruncSeries:
        """w(z) as a series in z."""
        return series_reverse(self.forward_series(order))

    def duality_defect(self) -> UniPoly:
        """Numerator of z(w) - z(w*) after clearing denominators; zero polynomial expected.

        With w* = (1-w)/(1+w), z(w*) = c N*(w) / D*(w) where the starred
        polynomials are numerator/denominator of z composed with w*, each
        homogenized by the appropriate power of (1+w).
        """
        num, den = self.numerator(), self.denominator()
        top, bottom = UniPoly([1, -1]), UniPoly([1, 1])
        d = max(num.degree, den.degree)

        def homogenize(p: UniPoly) -> UniPoly:
            acc = UniPoly()
            for k, c in enumerate(p.coeffs):
                acc = acc + c * top**k * bottom ** (d - k)
            return acc

        num_star, den_star = homogenize(num), homogenize(den)
        return num * den_star - num_star * den


def fbar_series(F: TruncSeries) -> TruncSeries:
    """-log(1 + w^2) + F(w)."""
    one_plus_w2 = TruncSeries([1, 0, 1][: F.order + 1], F.order)
    return F - series_log(one_plus_w2)


def change_to_z(fbar: TruncSeries, cov: ChangeOfVariable | None = None) -> TruncSeries:
    """G(z) = fbar(w(z))."""
    cov = ChangeOfVariable() if cov is None else cov
    return series_compose(fbar, cov.reversion(fbar.order))


def g_coefficients(G: TruncSeries) -> list[Fraction]:
    """[b_2, b_4, ..., b_R] from G(z)."""
    return [G[k] for k in range(2, G.order + 1, 2)]


def is_fixed_point(x: Real, tol: float = 1e-12) -> bool:
    return abs(dual_point(x) - x) <= tol * max(1.0, abs(x))
