"""Linear complexity of vector sequences over F_p.

L(N) is the least L >= 0 for which vectors c_0, ..., c_L in F_p^m with
c_L != 0 satisfy  sum_h c_h . u_{n+h} = 0  for every window n = 0..N-L-1.
Each candidate L is a homogeneous linear system in m(L+1) unknowns; a
solution with nonzero last block exists exactly when forcing that block
to zero lowers the kernel dimension.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass


@dataclass(frozen=True)
class RelationWitness:
    L: int
    coeffs: tuple[tuple[int, ...], ...]  # c_0, ..., c_L
    p: int

    def holds(self, u: Sequence[Sequence[int]], N: int) -> bool:
        return relation_holds(self.coeffs, u, N, self.p)


@dataclass(frozen=True)
class LinearComplexity:
    L: int
    witness: RelationWitness
    window_empty: bool  # no window left: the relation holds vacuously


def relation_holds(coeffs: Sequence[Sequence[int]], u: Sequence[Sequence[int]], N: int, p: int) -> bool:
    L = len(coeffs) - 1
    for n in range(N - L):
        total = 0
        for h, c in enumerate(coeffs):
            total += sum(ci * ui for ci, ui in zip(c, u[n + h]))
        if total % p:
            return False
    return True


def rank_mod_p(rows: list[list[int]], p: int) -> int:
    return len(_rref(rows, p)[1])


def _rref(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form over F_p; returns (rows, pivot columns)."""
    A = [[x % p for x in r] for r in rows]
    if not A:
        return [], []
    ncols = len(A[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(A)) if A[i][col]), None)
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        inv = pow(A[r][col], -1, p)
        A[r] = [x * inv % p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][col]:
                f = A[i][col]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[r])]
        pivots.append(col)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def kernel_basis(rows: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    R, pivots = _rref(rows, p) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(R, pivots):
            v[pc] = (-row[f]) % p
        basis.append(v)
    return basis


def _window_matrix(u: Sequence[Sequence[int]], N: int, L: int, m: int, p: int) -> list[list[int]]:
    return [[int(u[n + h][i]) % p for h in range(L + 1) for i in range(m)] for n in range(N - L)]


def linear_complexity(u: Sequence[Sequence[int]], N: int, p: int) -> LinearComplexity:
    """Smallest L with a witness relation over the first N vectors of ``u``.

    L is increased from 0; at each step the rank of the window matrix is
    compared with the rank of its first L blocks.  The witness is a kernel
    vector whose last block is nonzero, scaled so the first nonzero entry of
    c_L is 1.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if len(u) < N:
        raise ValueError(f"sequence has {len(u)} vectors, {N} requested")
    m = len(u[0])
    for L in range(N + 1):
        if L == N:
            coeffs = tuple(tuple(0 for _ in range(m)) for _ in range(L)) + ((1,) + (0,) * (m - 1),)
            return LinearComplexity(L, RelationWitness(L, coeffs, p), True)
        A = _window_matrix(u, N, L, m, p)
        full = rank_mod_p(A, p)
        head = rank_mod_p([r[: m * L] for r in A], p) if L else 0
        if full - head >= m:
            continue
        basis = kernel_basis(A, m * (L + 1), p)
        vec = next(v for v in basis if any(v[m * L:]))
        lead = next(x for x in vec[m * L:] if x)
        inv = pow(lead, -1, p)
        vec = [x * inv % p for x in vec]
        coeffs = tuple(tuple(vec[h * m:(h + 1) * m]) for h in range(L + 1))
        return LinearComplexity(L, RelationWitness(L, coeffs, p), False)
    raise AssertionError("unreachable")


def linear_complexity_bruteforce(u: Sequence[Sequence[int]], N: int, p: int, max_L: int) -> int | None:
    """Enumerate every coefficient tuple for L = 0..max_L; None if none works."""
    m = len(u[0])
    for L in range(max_L + 1):
        nonzero_last = [c for c in itertools.product(range(p), repeat=m) if any(c)]
        for rest in itertools.product(range(p), repeat=m * L):
            head = [rest[h * m:(h + 1) * m] for h in range(L)]
            for last in nonzero_last:
                if relation_holds(head + [last], u, N, p):
                    return L
    return None


@dataclass(frozen=True)
class BoundReport:
    L: int
    N: int
    p: int
    m: int
    scale: float  # N^(1/m) / p
    ratio: float
    note: str = ""

    def __str__(self):
        text = f"L={self.L} N={self.N} p={self.p} m={self.m} N^(1/m)/p={self.scale:.6g} ratio={self.ratio:.6g}"
        return f"{text} ({self.note})" if self.note else text


def lower_bound_report(L: int, N: int, p: int, m: int) -> BoundReport:
    """L against the growth scale N^(1/m)/p; reported, never asserted."""
    scale = N ** (1 / m) / p
    ratio = L / scale if scale else float("inf")
    note = "degenerate: L = 0, the sequence is orthogonal to a fixed vector" if L == 0 else ""
    return BoundReport(L, N, p, m, scale, ratio, note)
