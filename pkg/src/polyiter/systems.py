"""Triangular polynomial systems, their families, and symbolic iteration.

A system of level ``m`` over F_p is a tuple (F_0, ..., F_m) with

    F_i = X_i * G_i(X_{i+1}, ..., X_m) + H_i(X_{i+1}, ..., X_m),   i < m
    F_m = g_m * X_m + h_m,                                          g_m != 0

where each G_i has the unique leading monomial X_{i+1}^{s_{i,i+1}} ...
X_m^{s_{i,m}} (every other term is strictly below it in *each* variable)
and deg_{X_j} H_i <= s_{i,j}.  The exponents s_{i,j} form a unit upper
triangular shape matrix S, and iterates satisfy ``d_k = S^k * (1,...,1)``
for their degrees.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .field import Prime
from .multipoly import NEG_INF, MultiPoly, evaluate_grid

DEFAULT_TERM_CAP = 10**6
DEFAULT_EXHAUSTIVE_GUARD = 10**7


class SizeGuardExceeded(RuntimeError):
    """A computation would exceed its configured size budget."""


class SymbolicSizeError(SizeGuardExceeded):
    def __init__(self, k_reached: int, terms: int, cap: int):
        super().__init__(f"term cap {cap} exceeded at iteration {k_reached} ({terms} terms)")
        self.k_reached = k_reached
        self.terms = terms
        self.cap = cap


class InvalidSystem(ValueError):
    def __init__(self, report: ValidationReport, where: str = ""):
        prefix = f"{where}: " if where else ""
        super().__init__(prefix + "; ".join(v.message for v in report.violations))
        self.report = report
        self.where = where


@dataclass(frozen=True)
class ShapeMatrix:
    m: int
    s: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be >= 0")
        rows = tuple(tuple(int(x) for x in row) for row in self.s)
        n = self.m + 1
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"shape matrix must be {n}x{n}")
        for i in range(n):
            if rows[i][i] != 1:
                raise ValueError(f"diagonal entry s[{i}][{i}] must be 1")
            for j in range(n):
                if j < i and rows[i][j] != 0:
                    raise ValueError(f"entry s[{i}][{j}] below the diagonal must be 0")
                if j > i and rows[i][j] < 0:
                    raise ValueError(f"entry s[{i}][{j}] must be >= 0")
        object.__setattr__(self, "s", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> ShapeMatrix:
        return cls(len(rows) - 1, tuple(tuple(r) for r in rows))

    @classmethod
    def from_upper(cls, m: int, entries: dict[tuple[int, int], int]) -> ShapeMatrix:
        rows = [[1 if i == j else 0 for j in range(m + 1)] for i in range(m + 1)]
        for (i, j), v in entries.items():
            rows[i][j] = v
        return cls.from_rows(rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.s[i][j]

    def leading_exponents(self, i: int) -> tuple[int, ...]:
        """Exponent vector of the leading monomial of G_i."""
        return tuple(self.s[i][j] if j > i else 0 for j in range(self.m + 1))

    def superdiagonal_product(self) -> int:
        return math.prod(self.s[i][i + 1] for i in range(self.m))


@dataclass(frozen=True)
class Violation:
    condition: str  # support | leading_monomial | h_degree | g_m_nonzero | structure
    i: int | None
    j: int | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(v.message for v in self.violations)


class TriangularSystem:
    """One member (F_0, ..., F_m) of the class of triangular systems.

    Construction only checks structure (lengths, arity, modulus); use
    :func:`validate` for membership.
    """

    def __init__(self, p: int | Prime, shape: ShapeMatrix, G: Sequence[MultiPoly], H: Sequence[MultiPoly], g_m: int, h_m: int):
        self.prime = p if isinstance(p, Prime) else Prime(p)
        self.shape = shape
        m = shape.m
        if len(G) != m or len(H) != m:
            raise ValueError(f"need {m} G and {m} H polynomials, got {len(G)} and {len(H)}")
        for poly in (*G, *H):
            if poly.p != self.p:
                raise ValueError("polynomial modulus differs from system modulus")
            if poly.arity != m + 1:
                raise ValueError(f"polynomial arity {poly.arity} != m+1 = {m + 1}")
        self.G = tuple(G)
        self.H = tuple(H)
        self.g_m = int(g_m) % self.p
        self.h_m = int(h_m) % self.p
        self._components = None
        self._compiled = [(_compile(g), _compile(h)) for g, h in zip(self.G, self.H)]

    @property
    def p(self) -> int:
        return self.prime.p

    @property
    def m(self) -> int:
        return self.shape.m

    @property
    def g_i(self) -> tuple[int, ...]:
        """Leading coefficients g_0..g_{m-1} (0 where the leading monomial is absent)."""
        return tuple(self.G[i].coeff(self.shape.leading_exponents(i)) for i in range(self.m))

    def components(self) -> list[MultiPoly]:
        """(F_0, ..., F_m) as polynomials in X_0..X_m."""
        if self._components is None:
            p, n = self.p, self.m + 1
            X = MultiPoly.identity_tuple(p, n)
            comps = [X[i] * self.G[i] + self.H[i] for i in range(self.m)]
            comps.append(X[self.m].scale(self.g_m) + self.h_m)
            self._components = comps
        return list(self._components)

    def apply(self, w: Sequence[int]) -> tuple[int, ...]:
        """Image of the point ``w`` under (F_0, ..., F_m), as ints in [0, p)."""
        p = self.p
        w = [int(x) % p for x in w]
        out = []
        for i, (g, h) in enumerate(self._compiled):
            out.append((w[i] * _eval_compiled(g, w, p) + _eval_compiled(h, w, p)) % p)
        out.append((self.g_m * w[self.m] + self.h_m) % p)
        return tuple(out)

    __call__ = apply

    def apply_many(self, W: np.ndarray) -> np.ndarray:
        """Apply the map column-wise to an int64 array of shape (m+1, count)."""
        p = self.p
        if p >= 2**31:
            raise ValueError("vectorised evaluation needs p < 2**31")
        W = np.asarray(W, dtype=np.int64)
        pows = self._power_tables()
        out = np.empty_like(W)
        for i, (g, h) in enumerate(self._compiled):
            gv = _eval_compiled_many(g, W, pows, p)
            hv = _eval_compiled_many(h, W, pows, p)
            out[i] = (W[i] * gv + hv) % p
        out[self.m] = (self.g_m * W[self.m] + self.h_m) % p
        return out

    def _power_tables(self) -> dict[int, np.ndarray]:
        if not hasattr(self, "_pow_cache"):
            p = self.p
            ks = {k for terms in self._compiled for part in terms for _, fs in part for _, k in fs}
            base = np.arange(p, dtype=np.int64)
            self._pow_cache = {k: np.array([pow(int(x), k, p) for x in base], dtype=np.int64) for k in ks}
        return self._pow_cache

    def __eq__(self, other):
        if not isinstance(other, TriangularSystem):
            return NotImplemented
        return (self.p, self.shape, self.G, self.H, self.g_m, self.h_m) == (other.p, other.shape, other.G, other.H, other.g_m, other.h_m)

    def __hash__(self):
        return hash((self.p, self.shape, self.G, self.H, self.g_m, self.h_m))

    def __repr__(self):
        comps = ", ".join(f"F{i} = {f}" for i, f in enumerate(self.components()))
        return f"TriangularSystem(p={self.p}; {comps})"

    @classmethod
    def from_components(cls, p: int | Prime, shape: ShapeMatrix, F: Sequence[MultiPoly]) -> TriangularSystem:
        """Split (F_0, ..., F_m) into the G/H/g_m/h_m form.

        Raises ``ValueError`` if some F_i is not of the form X_i*G_i + H_i with
        G_i, H_i free of X_0..X_i, or F_m is not affine in X_m.
        """
        m = shape.m
        if len(F) != m + 1:
            raise ValueError(f"need {m + 1} components")
        G, H = [], []
        for i in range(m):
            g, h = split_linear(F[i], i)
            G.append(g)
            H.append(h)
        last = F[m]
        n = m + 1
        unit = tuple(1 if j == m else 0 for j in range(n))
        g_m = last.coeff(unit)
        h_m = last.coeff((0,) * n)
        rest = set(e for e, _ in last.terms()) - {unit, (0,) * n}
        if rest:
            raise ValueError(f"F_{m} must be g_m*X_{m} + h_m")
        return cls(p, shape, G, H, g_m, h_m)


def split_linear(f: MultiPoly, i: int) -> tuple[MultiPoly, MultiPoly]:
    """Write ``f = X_i * G + H`` with G, H free of X_0..X_i."""
    n = f.arity
    g_terms, h_terms = {}, {}
    for e, c in f.terms():
        if any(e[j] for j in range(i)):
            raise ValueError(f"component {i} depends on an earlier variable: {f}")
        if e[i] > 1:
            raise ValueError(f"component {i} is not linear in X_{i}: {f}")
        if e[i] == 1:
            g_terms[e[:i] + (0,) + e[i + 1:]] = c
        else:
            h_terms[e] = c
    return MultiPoly(f.p, n, g_terms), MultiPoly(f.p, n, h_terms)


def _compile(f: MultiPoly) -> list[tuple[int, tuple[tuple[int, int], ...]]]:
    return [(c, tuple((j, k) for j, k in enumerate(e) if k)) for e, c in f.terms()]


def _eval_compiled(terms, w, p) -> int:
    total = 0
    for c, factors in terms:
        t = c
        for j, k in factors:
            t = t * pow(w[j], k, p) % p
        total += t
    return total % p


def _eval_compiled_many(terms, W: np.ndarray, pows: dict[int, np.ndarray], p: int) -> np.ndarray:
    total = np.zeros(W.shape[1], dtype=np.int64)
    for c, factors in terms:
        t = np.full(W.shape[1], c, dtype=np.int64)
        for j, k in factors:
            t = t * pows[k][W[j]] % p
        total = (total + t) % p
    return total


# -- validation ---------------------------------------------------------

def validate(sys: TriangularSystem) -> ValidationReport:
    """Check membership in the triangular class for ``sys.shape``."""
    out: list[Violation] = []
    shape = sys.shape
    m = shape.m
    for i in range(m):
        allowed = set(range(i + 1, m + 1))
        for name, poly in (("G", sys.G[i]), ("H", sys.H[i])):
            bad = sorted(poly.support() - allowed)
            for j in bad:
                out.append(Violation("support", i, j, f"support: {name}_{i} uses X_{j}, allowed only X_{i + 1}..X_{m}"))
        lead = shape.leading_exponents(i)
        g_i = sys.G[i].coeff(lead)
        if not g_i:
            out.append(Violation("leading_monomial", i, None, f"leading monomial: G_{i} lacks the term {_mono(lead)} (coefficient g_{i} must be nonzero)"))
        for e, _ in sys.G[i].terms():
            if e == lead:
                continue
            for j in range(i + 1, m + 1):
                if e[j] >= shape[i, j]:
                    out.append(Violation(
                        "leading_monomial", i, j,
                        f"leading monomial: term {_mono(e)} of G_{i} has deg_X{j} = {e[j]} >= s_{i}{j} = {shape[i, j]}",
                    ))
        for j in range(i + 1, m + 1):
            d = sys.H[i].degree_in(j)
            if d is not NEG_INF and d > shape[i, j]:
                out.append(Violation("h_degree", i, j, f"h-degree bound: deg_X{j} H_{i} = {d} > s_{i}{j} = {shape[i, j]}"))
    if sys.g_m == 0:
        out.append(Violation("g_m_nonzero", m, None, "g_m must be nonzero"))
    return ValidationReport(tuple(out))


def _mono(e: Sequence[int]) -> str:
    parts = [f"X{j}" if k == 1 else f"X{j}^{k}" for j, k in enumerate(e) if k]
    return "*".join(parts) or "1"


# -- permutation test ---------------------------------------------------

@dataclass(frozen=True)
class PermutationCheck:
    is_permutation: bool
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    vanishing: tuple[int, tuple[int, ...]] | None = None  # (i, point) with G_i = 0

    def __bool__(self):
        return self.is_permutation


def is_permutation(sys: TriangularSystem, guard: int = DEFAULT_EXHAUSTIVE_GUARD) -> PermutationCheck:
    """Decide bijectivity of w -> (F_0(w), ..., F_m(w)) on F_p^{m+1}.

    For a triangular map this holds iff g_m != 0 and no G_i vanishes on
    F_p^{m-i}.  That criterion is evaluated first; on failure the colliding
    pair is located by the exhaustive image scan.
    """
    p, m = sys.p, sys.m
    if p ** (m + 1) > guard:
        raise SizeGuardExceeded(f"p^(m+1) = {p ** (m + 1)} exceeds guard {guard}")
    vanishing = None
    if sys.g_m == 0:
        vanishing = (m, ())
    else:
        for i in range(m):
            later = list(range(i + 1, m + 1))
            vals = evaluate_grid(sys.G[i], later)
            zeros = np.argwhere(vals == 0)
            if len(zeros):
                vanishing = (i, tuple(int(x) for x in zeros[0]))
                break
    if vanishing is None:
        return PermutationCheck(True)
    witness = exhaustive_collision(sys, guard)
    return PermutationCheck(False, witness, vanishing)


def image_codes(sys: TriangularSystem) -> np.ndarray:
    """Images of all points of F_p^{m+1}, encoded base p, in lexicographic point order."""
    p, m = sys.p, sys.m
    n = m + 1
    grid = [np.arange(p, dtype=np.int64).reshape([p if a == j else 1 for a in range(n)]) for j in range(n)]
    shape = (p,) * n
    code = np.zeros(shape, dtype=np.int64)
    for i in range(m):
        later = list(range(i + 1, m + 1))
        g = _broadcast_later(evaluate_grid(sys.G[i], later), i, n)
        h = _broadcast_later(evaluate_grid(sys.H[i], later), i, n)
        comp = (grid[i] * g + h) % p
        code = code * p + comp
    comp = (sys.g_m * grid[m] + sys.h_m) % p
    code = code * p + comp
    return code.reshape(-1)


def _broadcast_later(vals: np.ndarray, i: int, n: int) -> np.ndarray:
    return vals.reshape((1,) * (i + 1) + vals.shape)


def exhaustive_collision(sys: TriangularSystem, guard: int = DEFAULT_EXHAUSTIVE_GUARD):
    """First colliding pair (lexicographic) of the map, or None if it is a bijection."""
    p, n = sys.p, sys.m + 1
    if p ** n > guard:
        raise SizeGuardExceeded(f"p^(m+1) = {p ** n} exceeds guard {guard}")
    codes = image_codes(sys)
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    dup = np.nonzero(sorted_codes[1:] == sorted_codes[:-1])[0]
    if not len(dup):
        return None
    # earliest second occurrence in point order
    best = None
    for d in dup:
        a, b = int(order[d]), int(order[d + 1])
        pair = (min(a, b), max(a, b))
        if best is None or pair[1] < best[1]:
            best = pair
    return tuple(_decode(x, p, n) for x in best)


def _decode(index: int, p: int, n: int) -> tuple[int, ...]:
    digits = []
    for _ in range(n):
        digits.append(index % p)
        index //= p
    return tuple(reversed(digits))


def is_bijective_exhaustive(sys: TriangularSystem, guard: int = DEFAULT_EXHAUSTIVE_GUARD) -> bool:
    p, n = sys.p, sys.m + 1
    if p ** n > guard:
        raise SizeGuardExceeded(f"p^(m+1) = {p ** n} exceeds guard {guard}")
    return len(np.unique(image_codes(sys))) == p ** n


# -- families -----------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Which member is applied at step k >= 1.

    ``constant`` always uses member 0, ``cyclic`` uses member (k-1) mod count,
    ``explicit`` uses ``indices[k-1]`` and is undefined past its end.
    """

    kind: str = "constant"
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "cyclic", "explicit"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    @classmethod
    def explicit(cls, indices: Sequence[int]) -> Schedule:
        return cls("explicit", tuple(indices))

    def member_index(self, k: int, count: int) -> int:
        if k < 1:
            raise ValueError("steps are numbered from 1")
        if self.kind == "constant":
            return 0
        if self.kind == "cyclic":
            return (k - 1) % count
        if k > len(self.indices):
            raise IndexError(f"explicit schedule has only {len(self.indices)} steps")
        return self.indices[k - 1]

    @property
    def autonomous(self) -> bool:
        return self.kind != "explicit"


@dataclass(frozen=True)
class SystemFamily:
    shape: ShapeMatrix
    members: tuple[TriangularSystem, ...]
    schedule: Schedule = field(default_factory=Schedule)

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("family needs at least one member")
        p = members[0].p
        for idx, sys in enumerate(members):
            if sys.shape != self.shape:
                raise ValueError(f"member {idx} has a different shape matrix")
            if sys.p != p:
                raise ValueError(f"member {idx} has modulus {sys.p}, expected {p}")
            report = validate(sys)
            if not report.ok:
                raise InvalidSystem(report, f"member {idx}")
        if self.schedule.kind == "explicit":
            bad = [i for i in self.schedule.indices if not 0 <= i < len(members)]
            if bad:
                raise ValueError(f"schedule references missing members {bad}")

    @classmethod
    def constant(cls, sys: TriangularSystem) -> SystemFamily:
        return cls(sys.shape, (sys,), Schedule("constant"))

    @property
    def p(self) -> int:
        return self.members[0].p

    @property
    def m(self) -> int:
        return self.shape.m

    def system_at(self, k: int) -> TriangularSystem:
        return self.members[self.schedule.member_index(k, len(self.members))]

    def with_schedule(self, schedule: Schedule) -> SystemFamily:
        return SystemFamily(self.shape, self.members, schedule)

    @property
    def shares_g_m(self) -> bool:
        return len({s.g_m for s in self.members}) == 1

    @property
    def cycle_length(self) -> int:
        """Steps in one pass of an autonomous schedule."""
        if self.schedule.kind == "constant":
            return 1
        if self.schedule.kind == "cyclic":
            return len(self.members)
        raise ValueError("explicit schedules have no cycle")


# -- symbolic iteration ---------------------------------------------------

@dataclass(frozen=True)
class IterateSet:
    k: int
    polys: tuple[MultiPoly, ...]
    split: tuple[tuple[MultiPoly, MultiPoly], ...]

    def recombine(self, i: int) -> MultiPoly:
        g, h = self.split[i]
        n = self.polys[0].arity
        return MultiPoly.variable(i, self.polys[0].p, n) * g + h

    def observed_degrees(self) -> tuple[int, ...]:
        """``1 + deg G~_{k,i}`` for each i."""
        return tuple(1 + g.total_degree() for g, _ in self.split)


def iterate_symbolic_steps(fam: SystemFamily, k_max: int, term_cap: int = DEFAULT_TERM_CAP) -> Iterator[IterateSet]:
    """Yield the iterates for k = 0, 1, ..., k_max."""
    if k_max < 0:
        raise ValueError("k must be >= 0")
    p, n = fam.p, fam.m + 1
    polys = tuple(MultiPoly.identity_tuple(p, n))
    yield _make_iterate(0, polys)
    for k in range(1, k_max + 1):
        comps = fam.system_at(k).components()
        polys = tuple(F.compose(polys) for F in comps)
        terms = sum(len(f) for f in polys)
        if terms > term_cap:
            raise SymbolicSizeError(k, terms, term_cap)
        yield _make_iterate(k, polys)


def iterate_symbolic(fam: SystemFamily, k: int, term_cap: int = DEFAULT_TERM_CAP) -> IterateSet:
    last = None
    for last in iterate_symbolic_steps(fam, k, term_cap):
        pass
    return last


def _make_iterate(k: int, polys: tuple[MultiPoly, ...]) -> IterateSet:
    return IterateSet(k, polys, tuple(split_linear(f, i) for i, f in enumerate(polys)))


def predicted_degrees(shape: ShapeMatrix, k: int) -> tuple[int, ...]:
    """``S^k * (1, ..., 1)`` in exact integer arithmetic."""
    if k < 0:
        raise ValueError("k must be >= 0")
    n = shape.m + 1
    d = [1] * n
    for _ in range(k):
        d = [sum(shape.s[i][j] * d[j] for j in range(n)) for i in range(n)]
    return tuple(d)


@dataclass
class DegreeRow:
    k: int
    i: int
    observed: int
    predicted: int

    @property
    def equal(self) -> bool:
        return self.observed == self.predicted


@dataclass
class DegreeLawReport:
    rows: list[DegreeRow]
    leading_coefficient: Fraction | None  # prod(s_{i,i+1}) / m!
    residuals: list[Fraction]  # deg G~_{k,0} - leading_coefficient * k^m, k = 1..k_max
    residual_degree: int | None  # None: identically zero or no fit

    @property
    def agrees(self) -> bool:
        return all(r.equal for r in self.rows)

    @property
    def first_discrepancy(self) -> DegreeRow | None:
        return next((r for r in self.rows if not r.equal), None)


def check_degree_law(fam: SystemFamily, k_max: int, term_cap: int = DEFAULT_TERM_CAP) -> DegreeLawReport:
    """Compare observed iterate degrees with ``S^k * 1`` for k = 1..k_max.

    Also fits ``deg G~_{k,0}`` against its leading term ``k^m * prod(s)/m!``
    and reports the degree (in k) of what is left over, which must be < m.
    """
    m = fam.m
    rows: list[DegreeRow] = []
    deg0: list[int] = []
    for it in iterate_symbolic_steps(fam, k_max, term_cap):
        if it.k == 0:
            continue
        observed = it.observed_degrees()
        predicted = predicted_degrees(fam.shape, it.k)
        for i in range(m + 1):
            rows.append(DegreeRow(it.k, i, observed[i], predicted[i]))
        deg0.append(observed[0] - 1)
    prod = fam.shape.superdiagonal_product()
    if prod == 0 or m == 0:
        return DegreeLawReport(rows, None, [], None)
    lead = Fraction(prod, math.factorial(m))
    residuals = [d - lead * k**m for k, d in zip(range(1, k_max + 1), deg0)]
    return DegreeLawReport(rows, lead, residuals, _sequence_degree(residuals))


def _sequence_degree(values: Sequence[Fraction]) -> int | None:
    """Degree of the polynomial through equally spaced samples, by finite differences.

    Returns None for the zero sequence.  With q samples, degrees up to
    q - 2 are resolved (a constant nonzero difference row is required).
    """
    row = list(values)
    if not any(row):
        return None
    degree = 0
    while len(row) > 1:
        nxt = [b - a for a, b in zip(row, row[1:])]
        if not any(nxt):
            return degree
        row = nxt
        degree += 1
    return degree


def seed_grid(p: int, n: int) -> np.ndarray:
    """All points of F_p^n as columns of an (n, p^n) array, lexicographic order."""
    grids = np.meshgrid(*([np.arange(p, dtype=np.int64)] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids])


def all_points(p: int, n: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(p), repeat=n)
