"""Spin-matrix weights, brute-force partition polynomials and the w-normalization.

This is the small-scale oracle: every configuration is enumerated, so it is
only usable up to ``MAX_BRUTE_SITES`` sites.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .errors import InternalError, ResourceError, UsageError
from .exactmath import UniPoly

MAX_BRUTE_SITES = 25
_CHUNK_BITS = 18


@dataclass(frozen=True)
class GridSpec:
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise UsageError(f"grid dimensions must be >= 1, got {self.n1}x{self.n2}")

    @property
    def N(self) -> int:
        return self.n1 * self.n2


class LaurentTable:
    """Bivariate Laurent polynomial stored as ``{(ex, ey): count}``, zero counts dropped."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], int] = ()):
        self.terms = {(int(ex), int(ey)): int(c) for (ex, ey), c in dict(terms).items() if c}

    def __eq__(self, other):
        if not isinstance(other, LaurentTable):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        return f"LaurentTable({len(self.terms)} terms)"

    def total(self) -> int:
        return sum(self.terms.values())

    def at_y1(self) -> dict[int, int]:
        """Sum out y: the univariate Laurent polynomial P(x, 1) as ``{ex: count}``."""
        out: Counter[int] = Counter()
        for (ex, _), c in self.terms.items():
            out[ex] += c
        return {k: v for k, v in sorted(out.items()) if v}

    def evaluate(self, x: float, y: float) -> float:
        return sum(c * x**ex * y**ey for (ex, ey), c in self.terms.items())

    def to_json(self) -> dict:
        return {
            "terms": [
                {"ex": ex, "ey": ey, "count": str(c)}
                for (ex, ey), c in sorted(self.terms.items())
            ]
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LaurentTable":
        return cls({(t["ex"], t["ey"]): int(t["count"]) for t in obj["terms"]})


def _as_spins(M) -> np.ndarray:
    a = np.asarray(M, dtype=np.int64)
    if a.ndim != 2 or a.size == 0:
        raise UsageError("spin matrix must be a non-empty 2-D array")
    if not np.all(np.abs(a) == 1):
        raise UsageError("spin matrix entries must be +1 or -1")
    return a


def weight_exponents(M: Sequence[Sequence[int]]) -> tuple[int, int]:
    """Exponents (e_x, e_y) of weight(M) with cyclic neighbours in both directions."""
    a = _as_spins(M)
    edge_sum = int(np.sum(a * np.roll(a, -1, axis=0)) + np.sum(a * np.roll(a, -1, axis=1)))
    # each torus vertex has even degree, so the edge sum is even
    assert edge_sum % 2 == 0
    return edge_sum // 2, int(a.sum())


def _edge_pairs(g: GridSpec) -> list[tuple[int, int]]:
    """Site index pairs (row-major) for every directed-cyclic edge of the torus."""
    pairs = []
    for i in range(g.n1):
        for j in range(g.n2):
            s = i * g.n2 + j
            pairs.append((s, ((i + 1) % g.n1) * g.n2 + j))
            pairs.append((s, i * g.n2 + (j + 1) % g.n2))
    return pairs


def brute_partition(g: GridSpec) -> LaurentTable:
    """P_{n1,n2}(x, y) by enumerating all 2^N spin matrices.

    Configurations are processed in vectorized chunks: bit k of the
    configuration index is the spin of site k (set bit = +1).
    """
    N = g.N
    if N > MAX_BRUTE_SITES:
        raise ResourceError(f"brute force capped at {MAX_BRUTE_SITES} sites, grid has {N}")
    pairs = _edge_pairs(g)
    total = 1 << N
    chunk = min(total, 1 << _CHUNK_BITS)
    width = 2 * N + 1
    hist = np.zeros(width * width, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, start + chunk, dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(N, dtype=np.int64)) & 1).astype(np.int8)
        ey = 2 * bits.sum(axis=1, dtype=np.int64) - N
        disagree = np.zeros(chunk, dtype=np.int64)
        for a, b in pairs:
            disagree += bits[:, a] ^ bits[:, b]
        # edge sum = (#edges - 2 * #disagreeing); halved
        ex = N - disagree
        hist += np.bincount((ex + N) * width + (ey + N), minlength=width * width)
    terms = {}
    for flat in np.nonzero(hist)[0]:
        ex, ey = divmod(int(flat), width)
        terms[(ex - N, ey - N)] = int(hist[flat])
    return LaurentTable(terms)


def partition_to_Z(P: Mapping[int, int] | LaurentTable, g: GridSpec) -> UniPoly:
    """Z(w) = P(x) (1 - w^2)^N / 2^N with x = (1 + w)/(1 - w).

    Each term count * x^e becomes count * (1 + w)^(N + e) (1 - w)^(N - e),
    which is a polynomial because |e| <= N.
    """
    if isinstance(P, LaurentTable):
        if any(ey != 0 for _, ey in P.terms):
            raise UsageError("partition_to_Z needs P restricted to y = 1; call .at_y1()")
        P = P.at_y1()
    N = g.N
    plus = [[comb(m, k) for k in range(m + 1)] for m in range(2 * N + 1)]
    acc = [0] * (2 * N + 1)
    for e, count in P.items():
        if abs(e) > N:
            raise InternalError(f"x-exponent {e} exceeds the site count {N}")
        a, b = N + e, N - e
        minus = [(-1) ** k * comb(b, k) for k in range(b + 1)]
        for i, u in enumerate(plus[a]):
            cu = count * u
            for j, v in enumerate(minus):
                acc[i + j] += cu * v
    scale = 1 << N
    out = []
    for c in acc:
        q, r = divmod(c, scale)
        if r:
            raise InternalError("Z(w) has a non-integer coefficient; P is inconsistent")
        out.append(q)
    Z = UniPoly(out)
    if Z[0] != 1 or any(c < 0 for c in Z.coeffs):
        raise InternalError(f"Z(w) fails its sanity checks: {Z}")
    return Z


def brute_Z(g: GridSpec) -> UniPoly:
    return partition_to_Z(brute_partition(g).at_y1(), g)


def z_coefficients(Z: UniPoly) -> list[int]:
    return [int(c) for c in Z.coeffs]


def laurent_at_y1_from_u(u_terms: Mapping[int, int]) -> dict[int, int]:
    """Convert exponents of u = x^(1/2) to exponents of x, checking evenness."""
    out = {}
    for e, c in u_terms.items():
        if c == 0:
            continue
        if e % 2:
            raise InternalError(f"odd u-exponent {e} survived; trace bookkeeping is wrong")
        out[e // 2] = c
    return dict(sorted(out.items()))
