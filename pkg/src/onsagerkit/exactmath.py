"""Exact rational arithmetic: dense polynomials, truncated power series, linear algebra.

Everything here works over :class:`fractions.Fraction`; no floating point.
Series carry their truncation order explicitly and refuse to mix orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

from .errors import DomainError, InconsistencyError, UsageError

__all__ = [
    "to_fraction",
    "frac_str",
    "UniPoly",
    "TruncSeries",
    "series_mul",
    "series_log",
    "series_exp",
    "series_inverse",
    "series_compose",
    "series_reverse",
    "LinearSolution",
    "solve_linear",
    "nullspace",
    "interpolate_poly",
    "squarefree_decomposition",
    "factor_rational",
    "format_factored",
]


def to_fraction(value) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are refused so that nothing inexact leaks into an exact stage.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise UsageError("booleans are not exact scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise UsageError(f"not an exact scalar: {value!r} ({type(value).__name__})")


def frac_str(q: Fraction) -> str:
    q = to_fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _strip(coeffs: Iterable) -> tuple[Fraction, ...]:
    c = [to_fraction(v) for v in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class UniPoly:
    """Dense univariate polynomial with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        self.coeffs = _strip(coeffs)

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "UniPoly":
        return cls([0] * degree + [coeff])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "UniPoly":
        p = cls([lead])
        for r in roots:
            p = p * cls([-to_fraction(r), 1])
        return p

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial reported as -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == _strip([other])
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def _coerce(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            return other
        return UniPoly([to_fraction(other)])

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise UsageError("negative polynomial power")
        out, base = UniPoly([1]), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def derivative(self) -> "UniPoly":
        return UniPoly(k * c for k, c in enumerate(self.coeffs) if k)

    def compose(self, inner: "UniPoly") -> "UniPoly":
        acc = UniPoly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        lead = other.lead()
        for k in range(len(rem) - 1, dq - 1, -1):
            q = rem[k] / lead
            if q:
                quot[k - dq] = q
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= q * b
        return UniPoly(quot), UniPoly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return self.divmod(self._coerce(other))[0]

    def __mod__(self, other):
        return self.divmod(self._coerce(other))[1]

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        lead = self.lead()
        return UniPoly(c / lead for c in self.coeffs)

    def gcd(self, other: "UniPoly") -> "UniPoly":
        """Monic greatest common divisor (zero if both are zero)."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def primitive(self) -> "UniPoly":
        """Scale to coprime integer coefficients with positive leading term."""
        if self.is_zero():
            return self
        den = lcm(*(c.denominator for c in self.coeffs))
        ints = [int(c * den) for c in self.coeffs]
        g = gcd(*ints)
        if ints[-1] < 0:
            g = -g
        return UniPoly(Fraction(v, g) for v in ints)

    def integer_coeffs(self) -> list[int]:
        if any(c.denominator != 1 for c in self.coeffs):
            raise UsageError("polynomial has non-integer coefficients")
        return [int(c) for c in self.coeffs]

    def format(self, var: str = "x", ascending: bool = False) -> str:
        if self.is_zero():
            return "0"
        terms = []
        order = range(len(self.coeffs)) if ascending else range(len(self.coeffs) - 1, -1, -1)
        for k in order:
            c = self.coeffs[k]
            if not c:
                continue
            mag = abs(c)
            if k == 0:
                body = frac_str(mag)
            else:
                mono = var if k == 1 else f"{var}^{k}"
                body = mono if mag == 1 else f"{frac_str(mag)}*{mono}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"UniPoly({self.format()})"

    def to_json(self) -> dict:
        return {"order": max(self.degree, 0), "coeffs": [frac_str(c) for c in self.coeffs] or ["0"]}

    @classmethod
    def from_json(cls, obj: dict) -> "UniPoly":
        return cls(Fraction(s) for s in obj["coeffs"])


class TruncSeries:
    """Power series truncated at an explicit order R (coefficients 0..R)."""

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs: Iterable, order: int):
        if order < 0:
            raise UsageError("truncation order must be >= 0")
        c = [to_fraction(v) for v in coeffs]
        if len(c) > order + 1:
            if any(c[order + 1:]):
                raise UsageError(
                    f"{len(c)} coefficients given for order {order}; truncate explicitly"
                )
            c = c[: order + 1]
        c.extend([Fraction(0)] * (order + 1 - len(c)))
        self.order = order
        self.coeffs = tuple(c)

    @classmethod
    def truncate(cls, coeffs: Iterable, order: int) -> "TruncSeries":
        return cls(list(coeffs)[: order + 1], order)

    @classmethod
    def from_poly(cls, p: UniPoly, order: int) -> "TruncSeries":
        return cls(p.coeffs[: order + 1], order)

    @classmethod
    def zero(cls, order: int) -> "TruncSeries":
        return cls((), order)

    @classmethod
    def one(cls, order: int) -> "TruncSeries":
        return cls([1], order)

    @classmethod
    def variable(cls, order: int) -> "TruncSeries":
        return cls([0, 1][: order + 1], order)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def valuation(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def _check(self, other: "TruncSeries"):
        if not isinstance(other, TruncSeries):
            raise UsageError(f"expected TruncSeries, got {type(other).__name__}")
        if other.order != self.order:
            raise UsageError(f"series order mismatch: {self.order} vs {other.order}")

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __add__(self, other):
        self._check(other)
        return TruncSeries((a + b for a, b in zip(self.coeffs, other.coeffs)), self.order)

    def __sub__(self, other):
        self._check(other)
        return TruncSeries((a - b for a, b in zip(self.coeffs, other.coeffs)), self.order)

    def __neg__(self):
        return TruncSeries((-a for a in self.coeffs), self.order)

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return series_mul(self, other)
        s = to_fraction(other)
        return TruncSeries((s * a for a in self.coeffs), self.order)

    def __rmul__(self, other):
        return self * other

    def scale_variable(self, factor) -> "TruncSeries":
        """Return f(factor * t)."""
        factor = to_fraction(factor)
        return TruncSeries((c * factor**k for k, c in enumerate(self.coeffs)), self.order)

    def derivative(self) -> "TruncSeries":
        """Formal derivative; the top coefficient becomes zero."""
        return TruncSeries((k * c for k, c in enumerate(self.coeffs) if k), self.order)

    def integral(self) -> "TruncSeries":
        """Antiderivative with zero constant term; the top input coefficient drops out."""
        return TruncSeries(
            [0] + [c / (k + 1) for k, c in enumerate(self.coeffs[: self.order])], self.order
        )

    def to_poly(self) -> UniPoly:
        return UniPoly(self.coeffs)

    def format(self, var: str = "w") -> str:
        body = UniPoly(self.coeffs).format(var, ascending=True)
        return f"{body} + O({var}^{self.order + 1})"

    def __repr__(self):
        return f"TruncSeries({self.format()})"

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [frac_str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict) -> "TruncSeries":
        return cls([Fraction(s) for s in obj["coeffs"]], int(obj["order"]))


def series_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    a._check(b)
    R = a.order
    out = [Fraction(0)] * (R + 1)
    for i, x in enumerate(a.coeffs):
        if x:
            for j in range(R + 1 - i):
                y = b.coeffs[j]
                if y:
                    out[i + j] += x * y
    return TruncSeries(out, R)


def series_inverse(a: TruncSeries) -> TruncSeries:
    """Multiplicative inverse; needs a nonzero constant term."""
    if a[0] == 0:
        raise DomainError("series with zero constant term is not invertible")
    R = a.order
    inv0 = 1 / a[0]
    out = [inv0]
    for k in range(1, R + 1):
        s = sum((a[j] * out[k - j] for j in range(1, k + 1)), Fraction(0))
        out.append(-s * inv0)
    return TruncSeries(out, R)


def series_log(a: TruncSeries) -> TruncSeries:
    """Logarithm of a series with constant term 1, from a * L' = a'."""
    if a[0] != 1:
        raise DomainError(f"series_log needs constant term 1, got {a[0]}")
    R = a.order
    L = [Fraction(0)] * (R + 1)
    for k in range(1, R + 1):
        s = k * a[k]
        for j in range(1, k):
            if L[j]:
                s -= j * L[j] * a[k - j]
        L[k] = s / k
    return TruncSeries(L, R)


def series_exp(L: TruncSeries) -> TruncSeries:
    """Exponential of a series with zero constant term, from E' = L' * E."""
    if L[0] != 0:
        raise DomainError("series_exp needs zero constant term")
    R = L.order
    E = [Fraction(1)] + [Fraction(0)] * R
    for k in range(1, R + 1):
        E[k] = sum((j * L[j] * E[k - j] for j in range(1, k + 1)), Fraction(0)) / k
    return TruncSeries(E, R)


def series_compose(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    """f(g(t)) truncated at the common order; g must vanish at 0."""
    f._check(g)
    if g[0] != 0:
        raise DomainError("inner series of a composition must have zero constant term")
    R = f.order
    acc = TruncSeries.zero(R)
    for c in reversed(f.coeffs):
        acc = series_mul(acc, g)
        acc = TruncSeries((acc[0] + c,) + acc.coeffs[1:], R)
    return acc


def series_reverse(g: TruncSeries) -> TruncSeries:
    """Compositional inverse h with g(h(t)) = t, by term-by-term correction."""
    R = g.order
    if g[0] != 0:
        raise DomainError("series_reverse needs g(0) = 0")
    if R < 1 or g[1] == 0:
        raise DomainError("series_reverse needs g'(0) != 0")
    inv1 = 1 / g[1]
    h = [Fraction(0), inv1] + [Fraction(0)] * (R - 1)
    for k in range(2, R + 1):
        # coefficient k of g(h) depends on h_1..h_k only through g_1 * h_k
        gh = series_compose(g, TruncSeries(h, R))
        h[k] = -gh[k] * inv1
    return TruncSeries(h, R)


@dataclass(frozen=True)
class LinearSolution:
    """Solution set of A x = b: particular + span(nullspace), or infeasible."""

    particular: tuple[Fraction, ...] | None
    nullspace: tuple[tuple[Fraction, ...], ...]
    rank: int

    @property
    def feasible(self) -> bool:
        return self.particular is not None

    @property
    def unique(self) -> bool:
        return self.feasible and not self.nullspace

    @property
    def dimension(self) -> int:
        return len(self.nullspace) if self.feasible else -1


def solve_linear(matrix: Sequence[Sequence], rhs: Sequence | None = None) -> LinearSolution:
    """Exact Gauss-Jordan elimination.

    Returns a particular solution and a nullspace basis; infeasibility is
    reported through ``particular is None`` rather than an exception.
    """
    rows = [[to_fraction(v) for v in row] for row in matrix]
    ncols = len(rows[0]) if rows else 0
    if any(len(r) != ncols for r in rows):
        raise UsageError("ragged matrix")
    if rhs is None:
        rhs = [0] * len(rows)
    if len(rhs) != len(rows):
        raise UsageError("rhs length does not match row count")
    aug = [r + [to_fraction(b)] for r, b in zip(rows, rhs)]

    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(aug)) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == len(aug):
            break

    rank = len(pivots)
    feasible = all(row[-1] == 0 for row in aug[rank:])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -aug[i][fc]
        basis.append(tuple(v))
    particular = None
    if feasible:
        x = [Fraction(0)] * ncols
        for i, pc in enumerate(pivots):
            x[pc] = aug[i][-1]
        particular = tuple(x)
    return LinearSolution(particular, tuple(basis), rank)


def nullspace(matrix: Sequence[Sequence]) -> tuple[tuple[Fraction, ...], ...]:
    return solve_linear(matrix).nullspace


def interpolate_poly(points: Sequence[tuple], degree: int) -> UniPoly:
    """Fit through the first degree+1 points, then check every surplus point.

    Raises InconsistencyError carrying the first surplus point that misses.
    """
    pts = [(to_fraction(x), to_fraction(y)) for x, y in points]
    if degree < 0:
        raise UsageError("degree must be >= 0")
    if len(pts) < degree + 1:
        raise UsageError(f"need {degree + 1} points for degree {degree}, got {len(pts)}")
    xs = [p[0] for p in pts]
    if len(set(xs)) != len(xs):
        raise UsageError("interpolation abscissae must be distinct")

    fit = pts[: degree + 1]
    # Newton divided differences
    dd = [y for _, y in fit]
    for level in range(1, len(fit)):
        for i in range(len(fit) - 1, level - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (fit[i][0] - fit[i - level][0])
    poly = UniPoly([dd[-1]])
    for i in range(len(fit) - 2, -1, -1):
        poly = poly * UniPoly([-fit[i][0], 1]) + dd[i]

    for x, y in pts[degree + 1:]:
        if poly(x) != y:
            raise InconsistencyError(
                f"point ({x}, {y}) is off the degree-{degree} fit (value {poly(x)})",
                point=(x, y),
            )
    return poly


def squarefree_decomposition(p: UniPoly) -> list[tuple[UniPoly, int]]:
    """Yun's algorithm: monic squarefree factors with multiplicities (constant dropped)."""
    if p.degree < 1:
        return []
    out = []
    dp = p.derivative()
    a = p.gcd(dp)
    b = p // a
    c = dp // a
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        a = b.gcd(d)
        if a.degree > 0:
            out.append((a, k))
        b = b // a
        c = d // a
        d = c - b.derivative()
        k += 1
    return out


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, int(n**0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _rational_roots(p: UniPoly) -> list[Fraction]:
    prim = p.primitive()
    ints = [int(c) for c in prim.coeffs]
    roots = []
    if ints[0] == 0:
        roots.append(Fraction(0))
        k = next(i for i, v in enumerate(ints) if v)
        ints = ints[k:]
    if len(ints) > 1:
        for num in _divisors(ints[0]):
            for den in _divisors(ints[-1]):
                for r in (Fraction(num, den), Fraction(-num, den)):
                    if r not in roots and UniPoly(ints)(r) == 0:
                        roots.append(r)
    return roots


def factor_rational(p: UniPoly) -> tuple[Fraction, list[tuple[UniPoly, int]]]:
    """Split p into constant * prod(factor^mult) with primitive integer factors.

    Linear factors are found by the rational root test on each squarefree
    part; whatever has no rational root is kept as a single factor.
    """
    if p.is_zero():
        raise UsageError("cannot factor the zero polynomial")
    factors: list[tuple[UniPoly, int]] = []
    for sq, mult in squarefree_decomposition(p):
        rest = sq
        for r in _rational_roots(sq):
            lin = UniPoly([-r, 1]).primitive()
            factors.append((lin, mult))
            rest = rest // UniPoly([-r, 1])
        if rest.degree > 0:
            factors.append((rest.primitive(), mult))
    prod_ = UniPoly([1])
    for f, m in factors:
        prod_ = prod_ * f**m
    const = p.lead() / prod_.lead()
    return const, factors


def format_factored(p: UniPoly, var: str = "x") -> str:
    """Factored form such as ``r*(2*r+1)^2``; linear factors ordered by decreasing root."""
    const, factors = factor_rational(p)

    def root_key(item):
        f, _ = item
        if f.degree == 1:
            return (0, -(-f[0] / f[1]))
        return (1, 0)

    parts = []
    for f, m in sorted(factors, key=root_key):
        body = f.format(var).replace(" ", "")
        if f.degree == 1 and f[0] == 0 and f[1] == 1:
            txt = var
        else:
            txt = f"({body})"
        parts.append(txt if m == 1 else f"{txt}^{m}")
    if not parts:
        return frac_str(const)
    out = "*".join(parts)
    if const == -1:
        return "-" + out
    if const != 1:
        return f"{frac_str(const)}*{out}"
    return out
