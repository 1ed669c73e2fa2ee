"""Transfer-operator computation of Z_{n1,n2}(w) and of the strip free energy.

Three routes:

* ``build_dense``: the 2^n1 x 2^n1 matrix A_{n1}(x) with monomial entries,
  traced symbolically.  Cross-check scale only.
* ``z_series``: the normalized operator B = A * (2/(x+2+1/x))^n1, whose
  entries are polynomials in w.  B is applied in factorized form (diagonal
  vertical factor, then one 2x2 butterfly per row) on integer series modulo a
  handful of 31-bit primes; the exact coefficients are rebuilt by CRT.
* ``numeric_free_energy``: the same factorization in floating point with
  power iteration for the dominant eigenvalue.

Column states are integers; bit i holds the spin of row i (set bit = +1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, log, prod, sqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, InternalError, ResourceError, UsageError
from .exactmath import TruncSeries
from .isingcore import laurent_at_y1_from_u

MAX_DENSE_ROWS = 8
MAX_EXACT_ROWS = 14
MAX_NUMERIC_ROWS = 24

# elements per working block of the modular sweep (int64)
_BLOCK_ELEMENTS = 1 << 22


def _spin_sums(n1: int) -> tuple[np.ndarray, np.ndarray]:
    """Per state: V(s) = sum_i s_i s_{i+1 mod n1} and the magnetization sum_i s_i."""
    states = np.arange(1 << n1, dtype=np.int64)
    spins = 2 * ((states[:, None] >> np.arange(n1)) & 1) - 1
    V = np.sum(spins * np.roll(spins, -1, axis=1), axis=1)
    return V, spins.sum(axis=1)


# -- dense matrix, kept simple for cross-checking -----------------------------


@dataclass(frozen=True)
class DenseTransferMatrix:
    """Exponents e(s, t) = V(s) + H(s, t) of u = x^(1/2) for the entries of A_{n1}(x)."""

    n1: int
    exponents: np.ndarray

    def trace_power(self, n2: int) -> dict[int, int]:
        """Trace of A^n2 as a Laurent polynomial in x, ``{ex: count}``."""
        if n2 < 1:
            raise UsageError("n2 must be >= 1")
        S = 1 << self.n1
        span = 2 * self.n1 * n2
        width = 2 * span + 1
        dtype = np.int64 if self.n1 * n2 <= 60 else object
        distinct = [int(e) for e in np.unique(self.exponents)]
        masks = {e: (self.exponents == e).astype(dtype) for e in distinct}
        totals = np.zeros(width, dtype=dtype)
        batch = max(1, _BLOCK_ELEMENTS // (S * width))
        for lo in range(0, S, batch):
            starts = np.arange(lo, min(S, lo + batch))
            vec = np.zeros((len(starts), S, width), dtype=dtype)
            vec[np.arange(len(starts)), starts, span] = 1
            for _ in range(n2):
                new = np.zeros_like(vec)
                for e, M in masks.items():
                    moved = np.einsum("bmk,mt->btk", vec, M)
                    if e >= 0:
                        new[:, :, e:] += moved[:, :, : width - e]
                    else:
                        new[:, :, :e] += moved[:, :, -e:]
                vec = new
            totals += vec[np.arange(len(starts)), starts, :].sum(axis=0)
        u_terms = {k - span: int(c) for k, c in enumerate(totals) if c}
        return laurent_at_y1_from_u(u_terms)


def build_dense(n1: int) -> DenseTransferMatrix:
    if n1 < 1:
        raise UsageError("n1 must be >= 1")
    if n1 > MAX_DENSE_ROWS:
        raise ResourceError(f"dense transfer matrix capped at n1 <= {MAX_DENSE_ROWS}")
    V, _ = _spin_sums(n1)
    states = np.arange(1 << n1, dtype=np.int64)
    spins = 2 * ((states[:, None] >> np.arange(n1)) & 1) - 1
    H = spins @ spins.T
    return DenseTransferMatrix(n1, V[:, None] + H)


# -- factorized exact operator ---------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def _moduli(count: int) -> tuple[int, ...]:
    out, n = [], (1 << 31) - 1
    while len(out) < count:
        if _is_prime(n):
            out.append(n)
        n -= 2
    return tuple(out)


def _agree_counts(n1: int, row_order: Sequence[int] | None = None) -> np.ndarray:
    """Number of vertical neighbour pairs with equal spins, per state."""
    order = list(range(n1)) if row_order is None else list(row_order)
    if sorted(order) != list(range(n1)):
        raise UsageError("row_order must be a permutation of range(n1)")
    states = np.arange(1 << n1, dtype=np.int64)
    bits = (states[:, None] >> np.asarray(order, dtype=np.int64)) & 1
    return np.sum(bits == np.roll(bits, -1, axis=1), axis=1)


@dataclass(frozen=True)
class ColumnOperators:
    """Factorized normalized transfer operator over series in w truncated at R.

    ``diagonal[s]`` holds the integer coefficients of prod_i (1 + w s_i s_{i+1});
    the horizontal kernel [[1+w, 1-w], [1-w, 1+w]] is applied once per row.  The
    factor 1/2 per site is deferred: the trace is divided by 2^N at the end.
    """

    n1: int
    order: int
    diagonal: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n1: int, order: int, row_order: Sequence[int] | None = None):
        if n1 < 1:
            raise UsageError("n1 must be >= 1")
        if n1 > MAX_EXACT_ROWS:
            raise ResourceError(f"exact transfer capped at n1 <= {MAX_EXACT_ROWS}")
        agree = _agree_counts(n1, row_order)
        width = min(n1, order) + 1
        table = np.zeros((n1 + 1, width), dtype=np.int64)
        for a in range(n1 + 1):
            b = n1 - a
            full = [
                sum(comb(a, i) * comb(b, k - i) * (-1) ** (k - i) for i in range(k + 1))
                for k in range(n1 + 1)
            ]
            table[a] = full[:width]
        return cls(n1, order, table[agree])

    def apply(self, vec: np.ndarray, modulus: int) -> np.ndarray:
        """One column step on ``vec[k, state, batch]`` with entries in [0, modulus)."""
        K1 = self.order + 1
        n1 = self.n1
        v = vec
        for i in range(n1):
            view = v.reshape(K1, 1 << (n1 - 1 - i), 2, 1 << i, -1)
            a = view[:, :, 0]
            b = view[:, :, 1]
            total = a + b
            diff = a - b
            out = np.empty_like(view)
            out[:, :, 0] = total
            out[:, :, 1] = total
            out[1:, :, 0] += diff[:-1]
            out[1:, :, 1] -= diff[:-1]
            v = out.reshape(vec.shape)
        # growth is at most 4x per sweep: < 2^31 * 4^14 < 2^63
        np.remainder(v, modulus, out=v)
        res = np.zeros_like(v)
        for j in range(self.diagonal.shape[1]):
            c = self.diagonal[:, j][None, :, None]
            res[j:] += c * v[: K1 - j]
        np.remainder(res, modulus, out=res)
        return res


def _dihedral_orbits(n1: int) -> tuple[np.ndarray, np.ndarray]:
    """Representatives and orbit sizes under row rotation, reflection and global flip."""
    S = 1 << n1
    states = np.arange(S, dtype=np.int64)
    bits = (states[:, None] >> np.arange(n1)) & 1
    weights = 1 << np.arange(n1, dtype=np.int64)
    canon = states.copy()
    for flip in (False, True):
        b0 = 1 - bits if flip else bits
        for refl in (False, True):
            b1 = b0[:, ::-1] if refl else b0
            for r in range(n1):
                img = np.roll(b1, r, axis=1) @ weights
                np.minimum(canon, img, out=canon)
    reps, sizes = np.unique(canon, return_counts=True)
    return reps, sizes


def _crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    x, m = 0, 1
    for r, p in zip(residues, moduli):
        t = ((r - x) * pow(m, -1, p)) % p
        x += m * t
        m *= p
    return x


def _coefficient_bound(N: int, order: int) -> int:
    """Z_k counts k-edge subsets of the 2N torus edges, so Z_k <= C(2N, k)."""
    return max(comb(2 * N, k) for k in range(min(order, 2 * N) + 1))


def z_series_batch(
    n1: int,
    n2_values: Iterable[int],
    order: int,
    *,
    use_orbits: bool = True,
    row_order: Sequence[int] | None = None,
) -> dict[int, TruncSeries]:
    """Z_{n1,n2}(w) truncated at ``order`` for several n2 in one sweep.

    Powers B^k e_s are built once up to the largest n2, so every smaller n2
    comes for free.
    """
    n2s = sorted(set(int(n) for n in n2_values))
    if not n2s or n2s[0] < 1:
        raise UsageError("n2 values must be >= 1")
    if order < 0:
        raise UsageError("order must be >= 0")
    if order > 2 * n1 * n2s[0]:
        raise UsageError(f"order {order} exceeds the Z degree bound 2*n1*n2 = {2 * n1 * n2s[0]}")
    ops = ColumnOperators.build(n1, order, row_order)
    S = 1 << n1
    K1 = order + 1
    if use_orbits:
        reps, sizes = _dihedral_orbits(n1)
    else:
        reps, sizes = np.arange(S, dtype=np.int64), np.ones(S, dtype=np.int64)

    bound = max(_coefficient_bound(n1 * n2, order) for n2 in n2s)
    count = 1
    while prod(_moduli(count)) <= bound:
        count += 1
    moduli = _moduli(count)

    residues = {n2: [[0] * K1 for _ in moduli] for n2 in n2s}
    batch = max(1, _BLOCK_ELEMENTS // (K1 * S))
    wanted = set(n2s)
    for pi, p in enumerate(moduli):
        for lo in range(0, len(reps), batch):
            rep = reps[lo: lo + batch]
            size = sizes[lo: lo + batch]
            vec = np.zeros((K1, S, len(rep)), dtype=np.int64)
            vec[0, rep, np.arange(len(rep))] = 1
            for step in range(1, n2s[-1] + 1):
                vec = ops.apply(vec, p)
                if step in wanted:
                    tr = (vec[:, rep, np.arange(len(rep))] * size).sum(axis=1) % p
                    acc = residues[step][pi]
                    for k in range(K1):
                        acc[k] = (acc[k] + int(tr[k])) % p

    out = {}
    for n2 in n2s:
        N = n1 * n2
        coeffs = []
        for k in range(K1):
            per_mod = [
                residues[n2][pi][k] * pow(2, -N, p) % p for pi, p in enumerate(moduli)
            ]
            coeffs.append(_crt(per_mod, moduli))
        if coeffs[0] != 1 or any(c > comb(2 * N, k) for k, c in enumerate(coeffs)):
            raise InternalError(f"CRT reconstruction of Z_{n1},{n2} out of bounds")
        out[n2] = TruncSeries(coeffs, order)
    return out


def z_series(
    n1: int,
    n2: int,
    order: int,
    *,
    use_orbits: bool = True,
    row_order: Sequence[int] | None = None,
) -> TruncSeries:
    """First ``order + 1`` coefficients of Z_{n1,n2}(w) via Tr B^n2."""
    return z_series_batch(n1, [n2], order, use_orbits=use_orbits, row_order=row_order)[n2]


# -- numeric strip free energy ----------------------------------------------------


@dataclass(frozen=True)
class NumericColumnOperators:
    """Floating-point transfer operator x^(V(s)/2) y^(sum s) with kernel x^(st/2)."""

    n1: int
    x: float
    y: float
    half_diag: np.ndarray = field(repr=False)
    log_shift: float = 0.0

    @classmethod
    def build(cls, n1: int, x: float, y: float):
        if not (x > 0 and y > 0):
            raise UsageError("x and y must be positive")
        if n1 < 1:
            raise UsageError("n1 must be >= 1")
        if n1 > MAX_NUMERIC_ROWS:
            raise ResourceError(f"numeric transfer capped at n1 <= {MAX_NUMERIC_ROWS}")
        V, M = _spin_sums(n1)
        log_diag = 0.5 * V * log(x) + M * log(y)
        # the constant shift keeps entries O(1); it is added back in log space
        shift = float(log_diag.max())
        half = np.exp(0.5 * (log_diag - shift))
        return cls(n1, float(x), float(y), half, shift)

    def apply_symmetric(self, v: np.ndarray) -> np.ndarray:
        """D^(1/2) K^(x n1) D^(1/2) v, with K = [[sqrt x, 1/sqrt x], [1/sqrt x, sqrt x]]."""
        hi = sqrt(self.x)
        lo = 1.0 / hi
        w = v * self.half_diag
        for i in range(self.n1):
            view = w.reshape(1 << (self.n1 - 1 - i), 2, 1 << i)
            a = view[:, 0]
            b = view[:, 1]
            out = np.empty_like(view)
            out[:, 0] = hi * a + lo * b
            out[:, 1] = lo * a + hi * b
            w = out.reshape(-1)
        return w * self.half_diag


@dataclass
class FreeEnergyEstimate:
    value: float
    residual: float
    iterations: int
    history: list[float]

    def __iter__(self):
        yield self.value
        yield self.residual


def numeric_free_energy(
    n1: int,
    x: float,
    y: float = 1.0,
    tol: float = 1e-12,
    max_iter: int = 20000,
) -> FreeEnergyEstimate:
    """log(lambda_max)/n1 of the strip transfer operator, by power iteration.

    Stops once consecutive Rayleigh-quotient estimates of the free energy
    differ by less than ``tol``.
    """
    if tol <= 0:
        raise UsageError("tol must be positive")
    ops = NumericColumnOperators.build(n1, x, y)
    v = np.full(1 << n1, 1.0)
    v /= np.linalg.norm(v)
    history: list[float] = []
    prev = None
    for it in range(1, max_iter + 1):
        u = ops.apply_symmetric(v)
        lam = float(v @ u)
        est = (log(lam) + ops.log_shift) / n1
        if prev is not None:
            history.append(abs(est - prev))
            if history[-1] < tol:
                return FreeEnergyEstimate(est, history[-1], it, history)
        prev = est
        v = u / np.linalg.norm(u)
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} in {max_iter} steps",
        {"n1": n1, "x": x, "y": y, "last_residuals": history[-10:], "estimate": prev},
    )
