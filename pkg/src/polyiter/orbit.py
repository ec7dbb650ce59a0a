"""Vector sequences w_n obtained by iterating a system family from a seed.

``w_0 = v`` and ``w_n = F_n(w_{n-1})`` where ``F_n`` is the member the
family's schedule assigns to step n.  Dropping the last coordinate gives
the truncated vectors ``u_n``.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from .field import FieldElement, Prime
from .systems import DEFAULT_EXHAUSTIVE_GUARD, SizeGuardExceeded, SystemFamily, all_points


@dataclass(frozen=True)
class OrbitState:
    w: tuple[int, ...]
    n: int

    @property
    def u(self) -> tuple[int, ...]:
        """Truncated vector: all coordinates but the last."""
        return self.w[:-1]

    def __iter__(self):
        return iter(self.w)


@dataclass
class Orbit:
    family: SystemFamily
    v: tuple[int, ...]
    states: list[OrbitState]
    tail: int | None = None
    tau: int | None = None


def _coerce_point(fam: SystemFamily, v: Sequence[int | FieldElement]) -> tuple[int, ...]:
    if len(v) != fam.m + 1:
        raise ValueError(f"initial vector needs {fam.m + 1} coordinates, got {len(v)}")
    return tuple(int(x) % fam.p for x in v)


def step(fam: SystemFamily, state: OrbitState) -> OrbitState:
    return OrbitState(fam.system_at(state.n + 1).apply(state.w), state.n + 1)


def iter_states(fam: SystemFamily, v: Sequence[int], start: int = 0) -> Iterator[tuple[int, ...]]:
    """Endless stream w_start, w_{start+1}, ... as plain tuples (w_start = v)."""
    w = _coerce_point(fam, v)
    n = start
    members = fam.members
    sched = fam.schedule
    count = len(members)
    if sched.kind == "constant":
        apply = members[0].apply
        while True:
            yield w
            w = apply(w)
    while True:
        yield w
        n += 1
        w = members[sched.member_index(n, count)].apply(w)


def generate(fam: SystemFamily, v: Sequence[int], N: int) -> list[OrbitState]:
    if N < 1:
        raise ValueError("N must be >= 1")
    out = []
    for n, w in enumerate(iter_states(fam, v)):
        out.append(OrbitState(w, n))
        if n + 1 == N:
            break
    return out


def generate_points(fam: SystemFamily, v: Sequence[int], N: int) -> list[tuple[int, ...]]:
    """Like :func:`generate` but returns bare coordinate tuples."""
    if N < 1:
        raise ValueError("N must be >= 1")
    out = []
    for w in iter_states(fam, v):
        out.append(w)
        if len(out) == N:
            break
    return out


def truncate(states: Sequence[OrbitState | Sequence[int]]) -> list[tuple[int, ...]]:
    return [tuple(s)[:-1] for s in states]


def build_orbit(fam: SystemFamily, v: Sequence[int], N: int, with_period: bool = False) -> Orbit:
    orb = Orbit(fam, _coerce_point(fam, v), generate(fam, v, N))
    if with_period:
        orb.tail, orb.tau = find_period(fam, v)
    return orb


# -- period detection -------------------------------------------------------

def find_period(fam: SystemFamily, v: Sequence[int], guard: int = DEFAULT_EXHAUSTIVE_GUARD) -> tuple[int, int]:
    """Minimal ``(tail, tau)`` with ``w_{n+tau} = w_n`` for all ``n >= tail``.

    Brent's algorithm runs on the autonomous state (w, phase), where phase
    is the position inside one pass of the schedule; for a constant
    schedule this is just w.  For cyclic schedules the w-sequence can be
    periodic with a proper divisor of the state period, so the result is
    then reduced to the minimal period and tail of the w-sequence itself.
    """
    if not fam.schedule.autonomous:
        raise ValueError("period detection needs a constant or cyclic schedule")
    L = fam.cycle_length
    limit = fam.p ** (fam.m + 1) * L
    if limit > guard:
        raise SizeGuardExceeded(f"state space {limit} exceeds guard {guard}")
    w0 = _coerce_point(fam, v)
    members = fam.members
    if L == 1:
        f = members[0].apply

        def advance(state):
            return f(state[0]), 0
    else:
        def advance(state):
            w, ph = state
            return members[ph].apply(w), (ph + 1) % L

    x0 = (w0, 0)
    power = lam = 1
    tortoise = x0
    hare = advance(x0)
    while tortoise != hare:
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare = advance(hare)
        lam += 1
    tortoise = hare = x0
    for _ in range(lam):
        hare = advance(hare)
    mu = 0
    while tortoise != hare:
        tortoise = advance(tortoise)
        hare = advance(hare)
        mu += 1
    if L == 1:
        return mu, lam
    return _reduce_w_period(fam, w0, mu, lam, guard)


def _reduce_w_period(fam: SystemFamily, w0, mu: int, lam: int, guard: int) -> tuple[int, int]:
    if mu + 2 * lam > guard:
        raise SizeGuardExceeded(f"orbit prefix {mu + 2 * lam} exceeds guard {guard}")
    seq = generate_points(fam, w0, mu + 2 * lam)
    tau = lam
    for d in sorted(_divisors(lam)):
        if all(seq[n] == seq[n + d] for n in range(mu, mu + lam)):
            tau = d
            break
    tail = mu
    while tail > 0 and seq[tail - 1] == seq[tail - 1 + tau]:
        tail -= 1
    return tail, tau


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.extend({d, n // d})
        d += 1
    return out


def cycle_lengths(fam: SystemFamily, guard: int = DEFAULT_EXHAUSTIVE_GUARD) -> list[int]:
    """Lengths of the cycles of a constant-schedule permutation family.

    Every point is visited once, so the lengths sum to p^(m+1) exactly when
    the member is a bijection.
    """
    if fam.schedule.kind != "constant":
        raise ValueError("cycle decomposition needs a constant schedule")
    p, n = fam.p, fam.m + 1
    if p**n > guard:
        raise SizeGuardExceeded(f"p^(m+1) = {p ** n} exceeds guard {guard}")
    f = fam.members[0].apply
    seen: set[tuple[int, ...]] = set()
    lengths = []
    for start in all_points(p, n):
        if start in seen:
            continue
        w = start
        length = 0
        while w not in seen:
            seen.add(w)
            w = f(w)
            length += 1
        if w != start:
            raise ValueError(f"point {start} lies on a transient; the map is not a permutation")
        lengths.append(length)
    return lengths


# -- closed forms for the last coordinate ------------------------------------

def last_coordinate_closed_form(g_m, h_m, u0m, n: int, p: int | Prime | None = None) -> FieldElement:
    """u_{n,m} for the affine recursion u -> g_m*u + h_m started at u0m.

    g_m != 1:  g_m^n * u0m + (g_m^n - 1)/(g_m - 1) * h_m
    g_m == 1:  u0m + n * h_m
    """
    if p is None:
        for x in (g_m, h_m, u0m):
            if isinstance(x, FieldElement):
                p = x.modulus
                break
        else:
            raise ValueError("modulus required when no FieldElement is given")
    prime = p if isinstance(p, Prime) else Prime(p)
    g, h, u = (FieldElement(int(x), prime) for x in (g_m, h_m, u0m))
    if n < 0:
        raise ValueError("n must be >= 0")
    if g.value == 1:
        return u + h * n
    gn = g**n
    return gn * u + (gn - 1) / (g - 1) * h


def affine_offsets(fam: SystemFamily, N: int) -> list[int]:
    """d_k with F_m^{(k)} = (prod of g_m's) * X_m + d_k, for k = 0..N-1."""
    p = fam.p
    d = 0
    out = [0]
    for k in range(1, N):
        s = fam.system_at(k)
        d = (s.g_m * d + s.h_m) % p
        out.append(d)
    return out
