"""Exponential sums along orbits, their averages over all seeds, and discrepancy.

Single-orbit sums reduce phases modulo p and read the roots of unity from a
table; totals go through ``math.fsum`` so they are correctly rounded and do
not depend on summation order.  Averaged sums run every seed of F_p^{m+1}
at once as numpy columns.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .field import Prime, mult_order, roots_of_unity
from .orbit import affine_offsets, generate_points
from .systems import SizeGuardExceeded, SystemFamily, seed_grid

DEFAULT_SWEEP_BUDGET = 10**8


@dataclass(frozen=True)
class SumResult:
    value: complex
    N: int

    @property
    def modulus_abs_bound(self) -> int:
        return self.N

    def __abs__(self):
        return abs(self.value)


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


def _weighted_sum(points: Sequence[Sequence[int]], coeffs: Sequence[int], N: int, p: int, width: int) -> SumResult:
    if len(points) < N:
        raise ValueError(f"orbit has {len(points)} points, {N} requested")
    if N < 1:
        raise ValueError("N must be >= 1")
    if len(coeffs) != width:
        raise ValueError(f"coefficient vector needs {width} entries, got {len(coeffs)}")
    pts = np.array([[int(x) % p for x in tuple(pt)[:width]] for pt in points[:N]], dtype=np.int64)
    phases = np.zeros(N, dtype=np.int64)
    for i, a in enumerate(coeffs):
        a %= p
        if a:
            phases = (phases + pts[:, i] * a) % p
    terms = roots_of_unity(p)[phases]
    return SumResult(_fsum_complex(terms), N)


def sum_S(points: Sequence[Sequence[int]], a: Sequence[int], N: int, p: int) -> SumResult:
    """``sum_{n<N} e_p(a_0 u_{n,0} + ... + a_{m-1} u_{n,m-1})``.

    ``points`` may be full states w_n (the last coordinate is ignored) or
    truncated vectors u_n.
    """
    return _weighted_sum(points, a, N, int(p), len(a))


def sum_T(points: Sequence[Sequence[int]], b: Sequence[int], N: int, p: int) -> SumResult:
    """``sum_{n<N} e_p(b_0 u_{n,0} + ... + b_m u_{n,m})`` over full states."""
    if points and len(tuple(points[0])) != len(b):
        raise ValueError("b must have one entry per state coordinate")
    return _weighted_sum(points, b, N, int(p), len(b))


# -- averaged sums over all seeds ----------------------------------------

def _seed_chunk_values(fam: SystemFamily, coeffs: tuple[int, ...], c: int, M: int, N: int, seeds: np.ndarray) -> np.ndarray:
    """|sum_n e_p(coeffs . w_n) e_M(c n)|^2 for each seed column (Kahan-compensated)."""
    p = fam.p
    roots = roots_of_unity(p)
    W = seeds.copy()
    acc = np.zeros(W.shape[1], dtype=np.complex128)
    comp = np.zeros_like(acc)
    for n in range(N):
        if n:
            W = fam.system_at(n).apply_many(W)
        phase = np.zeros(W.shape[1], dtype=np.int64)
        for j, a in enumerate(coeffs):
            if a:
                phase = (phase + a * W[j]) % p
        twist = np.exp(2j * np.pi * ((c * n) % M) / M) if c % M else 1.0
        y = roots[phase] * twist - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    return (acc.real**2 + acc.imag**2)


def _averaged(fam: SystemFamily, coeffs: Sequence[int], c: int, M: int, N: int, budget: int, workers: int) -> float:
    p, n = fam.p, fam.m + 1
    if M < 1 or N < 1:
        raise ValueError("M and N must be >= 1")
    cost = p**n * N
    if cost > budget:
        raise SizeGuardExceeded(f"p^(m+1)*N = {cost} exceeds budget {budget}")
    coeffs = tuple(int(x) % p for x in coeffs)
    seeds = seed_grid(p, n)
    if workers <= 1:
        vals = _seed_chunk_values(fam, coeffs, c, M, N, seeds)
    else:
        chunks = np.array_split(seeds, workers, axis=1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_seed_chunk_values, *zip(*[(fam, coeffs, c, M, N, ch) for ch in chunks])))
        vals = np.concatenate(parts)
    # fsum is exactly rounded, so the total is independent of the chunking
    return math.fsum(vals.tolist())


def sum_U(fam: SystemFamily, a: Sequence[int], c: int, M: int, N: int, budget: int = DEFAULT_SWEEP_BUDGET, workers: int = 1) -> float:
    """Average of |truncated-vector sum twisted by e_M(cn)|^2 over all seeds."""
    if len(a) != fam.m:
        raise ValueError(f"a needs {fam.m} entries")
    return _averaged(fam, tuple(a) + (0,), c, M, N, budget, workers)


def sum_V(fam: SystemFamily, b: Sequence[int], c: int, M: int, N: int, budget: int = DEFAULT_SWEEP_BUDGET, workers: int = 1) -> float:
    """As :func:`sum_U` but over all m+1 coordinates."""
    if len(b) != fam.m + 1:
        raise ValueError(f"b needs {fam.m + 1} entries")
    return _averaged(fam, b, c, M, N, budget, workers)


def sum_U_bruteforce(fam: SystemFamily, coeffs: Sequence[int], c: int, M: int, N: int) -> float:
    """Reference double loop: one scalar orbit per seed, plain complex arithmetic."""
    p, n = fam.p, fam.m + 1
    coeffs = list(coeffs) + [0] * (n - len(coeffs))
    total = 0.0
    for seed in itertools.product(range(p), repeat=n):
        inner = 0j
        for k, w in enumerate(generate_points(fam, seed, N)):
            z = sum(bj * wj for bj, wj in zip(coeffs, w))
            inner += np.exp(2j * np.pi * z / p) * np.exp(2j * np.pi * c * k / M)
        total += abs(inner) ** 2
    return total


def cross_pair_sum(fam: SystemFamily, b: Sequence[int], k: int, n: int) -> complex:
    """``sum_{v in F_p^{m+1}} e_p(b . (F^{(k)}(v) - F^{(n)}(v)))``, by orbit evaluation."""
    p, dim = fam.p, fam.m + 1
    if len(b) != dim:
        raise ValueError(f"b needs {dim} entries")
    W = seed_grid(p, dim)
    at: dict[int, np.ndarray] = {}
    for step in range(max(k, n) + 1):
        if step:
            W = fam.system_at(step).apply_many(W)
        if step in (k, n):
            at[step] = W
    diff = np.zeros(W.shape[1], dtype=np.int64)
    for j, bj in enumerate(b):
        if bj % p:
            diff = (diff + (bj % p) * (at[k][j] - at[n][j])) % p
    return _fsum_complex(roots_of_unity(p)[diff])


@dataclass(frozen=True)
class VanishingReport:
    """Pairwise structure of V for b = (0, ..., 0, b_m)."""

    t: int
    pairs: list[tuple[int, int, complex]]  # (k, n, cross sum)
    matched: int  # pairs with k = n (mod t)
    value_direct: float
    value_reconstructed: float


def last_row_pair_structure(fam: SystemFamily, b_m: int, c: int, M: int, N: int) -> VanishingReport:
    """Cross-sums for every (k, n) and V rebuilt from the last-row closed form.

    For b = (0, ..., 0, b_m) the cross-sum is p^(m+1) e_p(b_m (d_k - d_n)) when
    the accumulated multipliers of X_m agree (k = n mod t for a shared g_m)
    and 0 otherwise; the reconstruction sums those predictions against
    e_M(c(k-n)).
    """
    p, dim = fam.p, fam.m + 1
    if not fam.shares_g_m:
        raise ValueError("the pair structure needs a common g_m across members")
    g = fam.members[0].g_m
    t = mult_order(Prime(p)(g))
    b = [0] * fam.m + [b_m % p]
    d = affine_offsets(fam, N)
    roots = roots_of_unity(p)
    pairs = []
    recon = []
    matched = 0
    full = p**dim
    for k in range(N):
        for n in range(N):
            pairs.append((k, n, cross_pair_sum(fam, b, k, n)))
            twist = np.exp(2j * np.pi * (c * (k - n) % M) / M)
            if pow(g, k, p) == pow(g, n, p):
                matched += 1
                recon.append(full * roots[(b_m * (d[k] - d[n])) % p] * twist)
    rec = _fsum_complex(np.array(recon, dtype=np.complex128)) if recon else 0j
    direct = sum_V(fam, b, c, M, N)
    return VanishingReport(t, pairs, matched, direct, rec.real)


# -- point sets and discrepancy -------------------------------------------

class PointSet:
    """N points in [0,1)^s.

    Points built from residues keep their integer numerators and common
    denominator, and discrepancy is then computed in exact integer
    arithmetic.
    """

    def __init__(self, points, denominator: int | None = None):
        arr = np.asarray(points)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("need a non-empty (N, s) array of points")
        if denominator is not None:
            num = arr.astype(np.int64)
            if not np.array_equal(num, arr):
                raise ValueError("numerators must be integers")
            if num.min() < 0 or num.max() >= denominator:
                raise ValueError("numerators must lie in [0, denominator)")
            self.numerators = num
            self.denominator = int(denominator)
            self.points = num / denominator
        else:
            pts = arr.astype(np.float64)
            if pts.min() < 0 or pts.max() >= 1:
                raise ValueError("coordinates must lie in [0, 1)")
            self.numerators = None
            self.denominator = None
            self.points = pts

    @classmethod
    def from_residues(cls, vectors: Sequence[Sequence[int]], p: int) -> PointSet:
        return cls(np.array([list(v) for v in vectors], dtype=np.int64) % p, denominator=p)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> int:
        return self.points.shape[1]

    @property
    def exact(self) -> bool:
        return self.numerators is not None

    def _scaled(self):
        """(coordinates in numerator units, denominator, python-int?)."""
        if self.exact:
            Q = self.denominator
            big = self.N * Q**self.s >= 2**62
            X = self.numerators.astype(object) if big else self.numerators
            return X, Q, big
        return self.points, 1.0, False


@dataclass(frozen=True)
class BoxQuery:
    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta differ in length")
        for a, b in zip(self.alpha, self.beta):
            if not 0 <= a < b <= 1:
                raise ValueError(f"need 0 <= alpha < beta <= 1, got [{a}, {b})")

    def count(self, ps: PointSet) -> int:
        inside = np.all((ps.points >= np.array(self.alpha)) & (ps.points < np.array(self.beta)), axis=1)
        return int(inside.sum())

    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.alpha, self.beta))

    def local_discrepancy(self, ps: PointSet) -> float:
        return abs(self.count(ps) / ps.N - self.volume())


MAX_DISCREPANCY_DIM = 3
MAX_DISCREPANCY_POINTS = 512


def discrepancy_exact(ps: PointSet) -> float:
    """Extreme discrepancy: sup over all boxes [alpha, beta) in [0,1)^s.

    The supremum is approached either by a box whose faces hug the points
    it contains (closed limit, count too high) or by one whose faces are
    pushed out to the next point coordinate or to 0/1 (open limit, count too
    low).  Faces are enumerated in all but the last coordinate; the last
    coordinate is settled by a running-minimum scan.
    """
    N, s = ps.N, ps.s
    if s > MAX_DISCREPANCY_DIM or N > MAX_DISCREPANCY_POINTS:
        raise SizeGuardExceeded(f"exact discrepancy limited to s <= {MAX_DISCREPANCY_DIM}, N <= {MAX_DISCREPANCY_POINTS}")
    X, Q, _ = ps._scaled()
    K = Q**s
    best = max(_over(X, N, Q, K, 0, 1), _under(X, N, Q, K, 0, 1))
    return _finish(best, N, K, ps.exact)


def _finish(best, N, K, exact) -> float:
    if exact:
        return float(Fraction(int(best), int(N * K)))
    return float(best / (N * K))


def _over(X, N, Q, K, dim, w):
    """max over closed boxes of count*K - N*vol (numerator units)."""
    s = X.shape[1]
    if len(X) == 0:
        return 0
    col = X[:, dim]
    if dim == s - 1:
        y, counts = np.unique(col, return_counts=True)
        cum = np.concatenate([[0], np.cumsum(counts)])
        A = cum[:-1] * K - N * w * y
        B = cum[1:] * K - N * w * y
        return (B - np.minimum.accumulate(A)).max()
    best = 0
    coords = np.unique(col)
    for ia, a in enumerate(coords):
        for b in coords[ia:]:
            sub = X[(col >= a) & (col <= b)]
            best = max(best, _over(sub, N, Q, K, dim + 1, w * (b - a)))
    return best


def _under(X, N, Q, K, dim, w):
    """max over open boxes of N*vol - count*K (numerator units)."""
    s = X.shape[1]
    col = X[:, dim]
    ends = np.unique(np.concatenate([np.array([0, Q], dtype=X.dtype), col]))
    if dim == s - 1:
        srt = np.sort(col)
        less = np.searchsorted(srt, ends, side="left")
        leq = np.searchsorted(srt, ends, side="right")
        R = N * w * ends - leq * K
        P = N * w * ends - less * K
        run = np.minimum.accumulate(R)[:-1]
        return (P[1:] - run).max()
    best = 0
    for ia, a in enumerate(ends):
        for b in ends[ia + 1:]:
            sub = X[(col > a) & (col < b)]
            best = max(best, _under(sub, N, Q, K, dim + 1, w * (b - a)))
    return best


def discrepancy_naive(ps: PointSet) -> float:
    """Reference: count the points of every critical box directly.

    Every box with faces on point coordinates (closed limits) or on point
    coordinates and 0/1 (open limits) is enumerated in every coordinate,
    and its count is taken from per-coordinate membership matrices.
    """
    N, s = ps.N, ps.s
    if s > MAX_DISCREPANCY_DIM:
        raise SizeGuardExceeded("naive discrepancy limited to s <= 3")
    X, Q, _ = ps._scaled()
    K = Q**s
    letters = "abc"[:s]
    over_members, over_widths, under_members, under_widths = [], [], [], []
    for j in range(s):
        col = X[:, j]
        coords = np.unique(col)
        lo, hi = np.triu_indices(len(coords))
        a, b = coords[lo], coords[hi]
        over_members.append(((col[None, :] >= a[:, None]) & (col[None, :] <= b[:, None])).astype(np.int64))
        over_widths.append(b - a)
        ends = np.unique(np.concatenate([np.array([0, Q], dtype=X.dtype), col]))
        lo, hi = np.triu_indices(len(ends), k=1)
        a, b = ends[lo], ends[hi]
        under_members.append(((col[None, :] > a[:, None]) & (col[None, :] < b[:, None])).astype(np.int64))
        under_widths.append(b - a)
    subscripts = ",".join(f"{ch}n" for ch in letters) + "->" + letters
    over_count = np.einsum(subscripts, *over_members)
    under_count = np.einsum(subscripts, *under_members)
    over_vol = _outer(over_widths)
    under_vol = _outer(under_widths)
    best = max((over_count * K - N * over_vol).max(), (N * under_vol - under_count * K).max())
    return _finish(best, N, K, ps.exact)


def _outer(widths):
    out = widths[0]
    for w in widths[1:]:
        out = np.multiply.outer(out, w)
    return out


def etk_bound(ps: PointSet, H: int, C_s: float | None = None) -> float:
    """Erdos-Turan-Koksma upper bound on the extreme discrepancy.

    ``C_s * (1/H + (1/N) * sum_{0 < max|h_j| <= H} prod_j 1/(|h_j|+1) * |sum_n e(h . x_n)|)``
    with ``C_s`` defaulting to ``(3/2)^s``.
    """
    if H < 2:
        raise ValueError("H must be >= 2")
    N, s = ps.N, ps.s
    if C_s is None:
        C_s = 1.5**s
    hs = np.arange(-H, H + 1)
    per_dim = []
    for j in range(s):
        if ps.exact:
            Q = ps.denominator
            phase = np.outer(hs, ps.numerators[:, j]) % Q
            per_dim.append(np.exp(2j * np.pi * phase / Q))
        else:
            per_dim.append(np.exp(2j * np.pi * np.outer(hs, ps.points[:, j])))
    letters = "abc"[:s] if s <= 3 else None
    if letters is None:
        raise SizeGuardExceeded("etk_bound supports s <= 3")
    subscripts = ",".join(f"{ch}n" for ch in letters) + "->" + letters
    sums = np.abs(np.einsum(subscripts, *per_dim))
    weight = _outer([1.0 / (np.abs(hs) + 1.0)] * s)
    zero = (H,) * s
    sums[zero] = 0.0
    total = math.fsum((weight * sums).reshape(-1).tolist())
    return C_s * (1.0 / H + total / N)


# -- reporting of asymptotic ratios (never asserted) ---------------------

def alpha_beta(m: int, nu: int) -> tuple[float, float]:
    """Exponents (alpha, beta) of the bound |S_a(N)| << N^(1-beta) p^alpha."""
    return (m * m + m * nu + m) / (2 * nu * (m + nu)), 1 / (2 * nu)


def sum_ratio(value: float, N: int, p: int, m: int, nu: int) -> float:
    alpha, beta = alpha_beta(m, nu)
    return value / (N ** (1 - beta) * p**alpha)
