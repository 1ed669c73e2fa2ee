"""Spontaneous magnetization: reference formula, its first-order ODE, and integer-relation search.

The relation finder embeds the value rows into an integer lattice and runs
an exact LLL reduction.  Nothing is reported unless the residual and the
coefficient size are both consistent with the precision actually supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import DomainError, InternalError, UsageError
from .exactmath import UniPoly
from .transfer import MAX_NUMERIC_ROWS, numeric_free_energy

ODE_DEGREE = 10
LLL_DELTA = Fraction(3, 4)


# ---------------------------------------------------------------- lattices


def _dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis: Sequence[Sequence[int]], delta: Fraction = LLL_DELTA) -> list[list[int]]:
    """LLL-reduce the rows of an integer basis, exactly.

    This is the integral variant that keeps Gram determinants d_i and scaled
    Gram-Schmidt coefficients lam[k][j] = d_j mu_kj as integers.
    """
    b = [[int(v) for v in row] for row in basis]
    n = len(b)
    if n == 0:
        return []
    if len({len(r) for r in b}) != 1:
        raise UsageError("basis rows must all have the same length")
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta <= 1:
        raise UsageError("delta must lie in (1/4, 1]")
    p, q = delta.numerator, delta.denominator

    d = [1] + [0] * n  # d[0] = 1, d[i] for i = 1..n
    lam = [[0] * (n + 1) for _ in range(n + 1)]

    def gram_row(k: int):
        for j in range(1, k + 1):
            u = _dot(b[k - 1], b[j - 1])
            for i in range(1, j):
                u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise UsageError("basis rows are linearly dependent")
                d[k] = u

    def red(k: int, l: int):
        if 2 * abs(lam[k][l]) > d[l]:
            qq = (2 * lam[k][l] + d[l]) // (2 * d[l])
            b[k - 1] = [x - qq * y for x, y in zip(b[k - 1], b[l - 1])]
            lam[k][l] -= qq * d[l]
            for i in range(1, l):
                lam[k][i] -= qq * lam[l][i]

    def swap(k: int, kmax: int):
        b[k - 1], b[k - 2] = b[k - 2], b[k - 1]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        B = (d[k - 2] * d[k] + lk * lk) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lk * t) // d[k - 1]
            lam[i][k - 1] = (B * t + lk * lam[i][k]) // d[k]
        d[k - 1] = B

    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise UsageError("basis rows are linearly dependent")
    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            gram_row(k)
        red(k, k - 1)
        # Lovasz: d_k d_{k-2} >= delta d_{k-1}^2 - lam^2, scaled by q
        if q * d[k] * d[k - 2] < p * d[k - 1] ** 2 - q * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                red(k, l)
            k += 1
    return b


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style HNF of the lattice spanned by ``rows`` (zero rows dropped).

    Pivots are positive and entries above each pivot are reduced into
    [0, pivot).  Two bases span the same lattice iff their HNFs agree.
    """
    A = [[int(v) for v in r] for r in rows]
    if not A:
        return []
    ncols = len(A[0])
    out: list[list[int]] = []
    for col in range(ncols):
        live = [r for r in A if r[col] != 0]
        rest = [r for r in A if r[col] == 0]
        # Euclid on the column until one row remains
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                qq = r[col] // piv[col]
                r = [x - qq * y for x, y in zip(r, piv)]
                (nxt if r[col] else rest).append(r)
            live = nxt
        if not live:
            A = rest
            continue
        piv = live[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        for i, r in enumerate(out):
            qq = r[col] // piv[col]
            out[i] = [x - qq * y for x, y in zip(r, piv)]
        out.append(piv)
        A = [r for r in rest if any(r)]
    return out


# -------------------------------------------------------- relation search


@dataclass(frozen=True)
class IntegerRelation:
    coefficients: tuple[int, ...]
    residual: float
    quality: float
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not any(self.coefficients):
            raise InternalError("integer relation with all-zero coefficients")

    @property
    def norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.coefficients))

    def to_json(self) -> dict:
        return {
            "coeffs": [str(c) for c in self.coefficients],
            "residual": f"{self.residual:.3g}",
            "labels": list(self.labels) if self.labels else None,
        }


def _primitive(vec: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for v in vec:
        g = math.gcd(g, v)
    out = [v // g for v in vec]
    lead = next(v for v in out if v)
    return tuple(-v for v in out) if lead < 0 else tuple(out)


def simultaneous_relation(
    points: Sequence[Sequence],
    precision_digits: int,
    max_coeff_digits: int | None = None,
    labels: Sequence[str] | None = None,
) -> IntegerRelation | None:
    """One integer vector annihilating every value row to the stated precision.

    Each row is scaled by its largest entry, multiplied by 10^precision and
    rounded; those columns are appended to an identity block and the basis is
    LLL-reduced.  A candidate is accepted only if

    * its residual on every row is below 10^(-precision/2) times its norm,
    * on every row the residual is 10^(precision/2) times smaller than the
      largest single term, so the relation reflects cancellation rather than
      entries that vanish at this precision,
    * every nonzero coefficient multiplies a term that reaches the same
      10^(-precision/2) level on some row (otherwise the data cannot pin it
      down), and
    * its coefficients are small enough to be meaningful: log10 max|c_i| is
      at most half of precision*rows/unknowns, the size below which a chance
      relation among generic reals is not expected.
    """
    rows = [list(r) for r in points]
    if not rows:
        raise UsageError("need at least one value row")
    n = len(rows[0])
    if n < 2 or any(len(r) != n for r in rows):
        raise UsageError("value rows must share a length of at least 2")
    if precision_digits < 2:
        raise UsageError("precision must be at least 2 digits")
    if labels is not None and len(labels) != n:
        raise UsageError("labels do not match the row length")

    with mpmath.workdps(precision_digits + 20):
        scaled = []
        for r in rows:
            vals = [mpmath.mpf(v) for v in r]
            top = max(abs(v) for v in vals)
            if top == 0:
                raise DomainError("a value row is identically zero")
            scaled.append([v / top for v in vals])
        S = mpmath.mpf(10) ** precision_digits
        basis = []
        for i in range(n):
            extra = [int(mpmath.nint(S * r[i])) for r in scaled]
            basis.append([1 if j == i else 0 for j in range(n)] + extra)
        reduced = lll_reduce(basis)

        size_cap = precision_digits * len(rows) / n / 2
        if max_coeff_digits is not None:
            size_cap = min(size_cap, max_coeff_digits)
        gate = mpmath.mpf(10) ** (-mpmath.mpf(precision_digits) / 2)
        best = None
        for vec in reduced:
            c = vec[:n]
            if not any(c):
                continue
            c = _primitive(c)
            norm = math.sqrt(sum(v * v for v in c))
            residual = mpmath.mpf(0)
            cancels = True
            for r in scaled:
                res_r = abs(mpmath.fsum(ci * v for ci, v in zip(c, r)))
                largest = max(abs(ci * v) for ci, v in zip(c, r))
                # the terms must cancel, not merely be negligible
                cancels = cancels and res_r < gate * largest
                residual = max(residual, res_r)
            if residual >= gate * norm or not cancels:
                continue
            # a coefficient whose term never reaches the gate is not fixed by the data
            if any(
                ci and max(abs(ci * r[i]) for r in scaled) < gate for i, ci in enumerate(c)
            ):
                continue
            if math.log10(max(abs(v) for v in c)) > size_cap:
                continue
            cand = (norm, c, float(residual))
            if best is None or cand[0] < best[0]:
                best = cand
    if best is None:
        return None
    norm, c, residual = best
    return IntegerRelation(c, residual, residual / norm, tuple(labels) if labels else None)


def find_integer_relation(
    values: Sequence, precision_digits: int, max_coeff_digits: int | None = None
) -> IntegerRelation | None:
    if len(values) < 2:
        raise UsageError("need at least two values")
    return simultaneous_relation([values], precision_digits, max_coeff_digits)


# ----------------------------------------------------------- magnetization

CRITICAL_X = 1 + math.sqrt(2)

_A = UniPoly([1, 0, 1]) ** 2 * UniPoly([-1, -2, 1]) * UniPoly([-1, 2, 1])
_B = UniPoly([-1, 0, 1]) ** 4


def magnetization_eighth_power() -> tuple[UniPoly, UniPoly]:
    """(A, B) with m(x)^8 = A(x)/B(x) above the critical point."""
    return _A, _B


def _is_mp(x) -> bool:
    return isinstance(x, (mpmath.mpf, str))


def magnetization_reference(x):
    """Onsager's spontaneous magnetization: 0 below 1+sqrt(2), an eighth root above."""
    if _is_mp(x):
        x = mpmath.mpf(x)
        if x <= 1:
            raise DomainError("magnetization is defined for x > 1")
        if x <= 1 + mpmath.sqrt(2):
            return mpmath.mpf(0)
        return mpmath.root(_A(x) / _B(x), 8)
    x = float(x)
    if x <= 1:
        raise DomainError("magnetization is defined for x > 1")
    if x < CRITICAL_X:
        return 0.0
    q = _A(x) / _B(x)
    return float(q) ** 0.125 if q > 0 else 0.0


def magnetization_derivative_reference(x):
    """m'(x) = m (A'/A - B'/B)/8 above the critical point."""
    m = magnetization_reference(x)
    if m == 0:
        return m * 0
    xv = mpmath.mpf(x) if _is_mp(x) else float(x)
    A, B = _A, _B
    logd = A.derivative()(xv) / A(xv) - B.derivative()(xv) / B(xv)
    return m * logd / 8


def magnetization_ode_oracle() -> tuple[UniPoly, UniPoly]:
    """Coprime integer polynomials (a, b) with a(x) m(x) + b(x) m'(x) = 0.

    From m^8 = A/B: 8 A B m' - (A'B - A B') m = 0, then divide out the
    polynomial gcd, make the pair integral and content-free, and fix the sign
    so b has a positive leading coefficient.
    """
    A, B = _A, _B
    a = -(A.derivative() * B - A * B.derivative())
    b = 8 * A * B
    g = a.gcd(b)
    a, b = _primitive_pair(a // g, b // g)
    if max(a.degree, b.degree) > ODE_DEGREE:
        raise InternalError("oracle ODE exceeds the degree-10 ansatz")
    return a, b


def oracle_identity(a: UniPoly, b: UniPoly) -> UniPoly:
    """8 a A B + b (A'B - A B'), the cleared form of 8 a Q + b Q' with Q = A/B."""
    A, B = _A, _B
    return 8 * a * A * B + b * (A.derivative() * B - A * B.derivative())


def ode_labels(degree: int = ODE_DEGREE) -> tuple[str, ...]:
    return tuple(f"x^{i}*m" for i in range(degree + 1)) + tuple(
        f"x^{i}*m'" for i in range(degree + 1)
    )


def ode_value_row(m, dm, x, degree: int = ODE_DEGREE) -> list:
    return [x**i * m for i in range(degree + 1)] + [x**i * dm for i in range(degree + 1)]


def oracle_value_rows(xs: Sequence, digits: int, degree: int = ODE_DEGREE) -> list[list]:
    """Value rows from the closed form at the given points, carried to ``digits`` digits."""
    rows = []
    with mpmath.workdps(digits + 10):
        for x in xs:
            xv = mpmath.mpf(x)
            m = magnetization_reference(xv)
            dm = magnetization_derivative_reference(xv)
            row = ode_value_row(m, dm, xv, degree)
            rows.append([mpmath.mpf(mpmath.nstr(v, digits)) for v in row])
    return rows


def ode_from_relation(coeffs: Sequence[int], degree: int = ODE_DEGREE) -> tuple[UniPoly, UniPoly]:
    """Split a relation vector into (a, b), divide their polynomial gcd and normalize."""
    if len(coeffs) != 2 * (degree + 1):
        raise UsageError(f"expected {2 * (degree + 1)} coefficients")
    a, b = UniPoly(coeffs[: degree + 1]), UniPoly(coeffs[degree + 1 :])
    if b.is_zero():
        raise DomainError("relation does not involve m'")
    g = a.gcd(b)
    return _primitive_pair(a // g, b // g)


def _primitive_pair(a: UniPoly, b: UniPoly) -> tuple[UniPoly, UniPoly]:
    den = 1
    for c in a.coeffs + b.coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    a, b = a * den, b * den
    content = 0
    for c in a.coeffs + b.coeffs:
        content = math.gcd(content, int(c))
    a, b = a * Fraction(1, content), b * Fraction(1, content)
    if b.lead() < 0:
        a, b = -a, -b
    return a, b


# ------------------------------------------------- finite-strip estimates


@dataclass(frozen=True)
class MagnetizationEstimate:
    m: float
    m_error: float
    dm: float
    dm_error: float


def _m_hat(n1: int, x: float, h: float, tol: float) -> float:
    # one-sided three-point stencil in t = log y
    f = [numeric_free_energy(n1, x, math.exp(k * h), tol=tol).value for k in range(3)]
    return (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)


def estimate_magnetization(
    x: float, n1: int, h: float = 0.05, hx: float = 1e-2, tol: float = 1e-13
) -> MagnetizationEstimate:
    """Finite-strip estimates of m(x) and m'(x).

    On a finite strip f(x, y) = f(x, 1/y) exactly, so a symmetric difference
    at y = 1 returns zero at every temperature.  The ordered phase shows up
    as a kink of size m at t = log y = 0, which the one-sided stencil picks
    up once h exceeds the finite-size crossover.  Errors are step-halving
    heuristics.
    """
    if h <= 0 or hx <= 0:
        raise UsageError("steps must be positive")
    if n1 > MAX_NUMERIC_ROWS:
        raise UsageError(f"n1 is capped at {MAX_NUMERIC_ROWS}")
    m_h = _m_hat(n1, x, h, tol)
    m_h2 = _m_hat(n1, x, h / 2, tol)
    m_err = 4 / 3 * abs(m_h - m_h2)
    if x - hx <= 1:
        raise DomainError("x - hx must stay above 1")
    up, down = _m_hat(n1, x + hx, h, tol), _m_hat(n1, x - hx, h, tol)
    dm = (up - down) / (2 * hx)
    up2, down2 = _m_hat(n1, x + hx / 2, h, tol), _m_hat(n1, x - hx / 2, h, tol)
    dm2 = (up2 - down2) / hx
    return MagnetizationEstimate(m_h, m_err, dm, 4 / 3 * abs(dm - dm2))
