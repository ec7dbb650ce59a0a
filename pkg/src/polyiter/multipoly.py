"""Sparse multivariate polynomials over F_p in the variables X0..Xm.

A polynomial is a map from exponent tuples to nonzero residues.  Instances
are immutable; every operation returns a fresh canonical polynomial, and
``terms()`` lists monomials in graded-lexicographic order (highest first).
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping, Sequence
from typing import Union

import numpy as np

from .field import FieldElement, Prime

Exps = tuple[int, ...]


class _NegInf:
    """Degree of the zero polynomial.

    Compares below every integer and refuses arithmetic, so a degree-law
    check cannot silently treat the zero polynomial as degree -1.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "-inf"

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self


NEG_INF = _NegInf()
Degree = Union[int, _NegInf]


class ArityMismatch(ValueError):
    pass


def _grlex_key(e: Exps):
    return (sum(e), e)


class MultiPoly:
    __slots__ = ("_p", "_arity", "_terms", "_hash")

    def __init__(self, p: int | Prime, arity: int, terms: Mapping[Exps, int] | None = None):
        p = int(p)
        if arity < 1:
            raise ValueError("arity must be >= 1")
        clean: dict[Exps, int] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != arity:
                raise ArityMismatch(f"monomial {e} has length {len(e)}, expected {arity}")
            if any(x < 0 for x in e):
                raise ValueError(f"negative exponent in {e}")
            c = (clean.get(e, 0) + int(c)) % p
            if c:
                clean[e] = c
            else:
                clean.pop(e, None)
        self._p = p
        self._arity = arity
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, p: int, arity: int, terms: dict[Exps, int]) -> MultiPoly:
        # Trusted constructor: terms already reduced, nonzero, right length.
        obj = cls.__new__(cls)
        obj._p = p
        obj._arity = arity
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, p, arity: int) -> MultiPoly:
        return cls(p, arity)

    @classmethod
    def constant(cls, c: int, p, arity: int) -> MultiPoly:
        return cls(p, arity, {(0,) * arity: int(c)})

    @classmethod
    def variable(cls, j: int, p, arity: int) -> MultiPoly:
        if not 0 <= j < arity:
            raise ValueError(f"variable index {j} out of range for arity {arity}")
        e = [0] * arity
        e[j] = 1
        return cls(p, arity, {tuple(e): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: int, p) -> MultiPoly:
        return cls(p, len(exps), {tuple(exps): coeff})

    @classmethod
    def identity_tuple(cls, p, arity: int) -> list[MultiPoly]:
        return [cls.variable(j, p, arity) for j in range(arity)]

    # -- accessors ------------------------------------------------------
    @property
    def p(self) -> int:
        return self._p

    @property
    def arity(self) -> int:
        return self._arity

    def terms(self) -> list[tuple[Exps, int]]:
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def coeff(self, exps: Sequence[int]) -> int:
        return self._terms.get(tuple(exps), 0)

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def support(self) -> set[int]:
        """Indices of variables that occur with positive exponent."""
        return {j for e in self._terms for j, x in enumerate(e) if x}

    def degree_in(self, j: int) -> Degree:
        if not 0 <= j < self._arity:
            raise ValueError(f"variable index {j} out of range")
        if not self._terms:
            return NEG_INF
        return max(e[j] for e in self._terms)

    def total_degree(self) -> Degree:
        if not self._terms:
            return NEG_INF
        return max(sum(e) for e in self._terms)

    # -- comparison -----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, int):
            return self == MultiPoly.constant(other, self._p, self._arity)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (self._p, self._arity, self._terms) == (other._p, other._arity, other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._p, self._arity, frozenset(self._terms.items())))
        return self._hash

    # -- ring operations ------------------------------------------------
    def _coerce(self, other) -> MultiPoly:
        if isinstance(other, FieldElement):
            if other.p != self._p:
                raise ValueError(f"modulus mismatch: {self._p} vs {other.p}")
            other = other.value
        if isinstance(other, int):
            return MultiPoly.constant(other, self._p, self._arity)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if other._p != self._p:
            raise ValueError(f"modulus mismatch: {self._p} vs {other._p}")
        if other._arity != self._arity:
            raise ArityMismatch(f"arity mismatch: {self._arity} vs {other._arity}")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self._p
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = (out.get(e, 0) + c) % p
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MultiPoly._raw(p, self._arity, out)

    __radd__ = __add__

    def __neg__(self):
        p = self._p
        return MultiPoly._raw(p, self._arity, {e: p - c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(1, self._p, self._arity)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c: int) -> MultiPoly:
        c %= self._p
        if not c:
            return MultiPoly.zero(self._p, self._arity)
        p = self._p
        return MultiPoly._raw(p, self._arity, {e: v * c % p for e, v in self._terms.items()})

    # -- evaluation and substitution -----------------------------------
    def evaluate(self, point: Sequence[int | FieldElement]) -> int:
        """Value at ``point`` as an int in ``[0, p)``."""
        if len(point) != self._arity:
            raise ArityMismatch(f"point has {len(point)} coordinates, expected {self._arity}")
        p = self._p
        x = [int(v) % p for v in point]
        total = 0
        for e, c in self._terms.items():
            t = c
            for xi, ei in zip(x, e):
                if ei:
                    t = t * pow(xi, ei, p) % p
            total += t
        return total % p

    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (list, tuple)):
            point = point[0]
        return FieldElement(self.evaluate(point), Prime(self._p))

    def compose(self, subs: Sequence[MultiPoly]) -> MultiPoly:
        """``self(subs[0], ..., subs[m])`` expanded and canonicalised.

        Expansion is Horner-style in one variable at a time: the polynomial
        is viewed as a univariate polynomial in X_j whose coefficients are
        polynomials in the remaining variables, and those coefficients are
        composed recursively before the Horner pass.
        """
        if len(subs) != self._arity:
            raise ArityMismatch(f"{len(subs)} substitutions for arity {self._arity}")
        if not subs:
            raise ArityMismatch("empty substitution")
        target = subs[0].arity
        for s in subs:
            if s.p != self._p:
                raise ValueError("modulus mismatch in substitution")
            if s.arity != target:
                raise ArityMismatch("substitutions have differing arities")
        if not self._terms:
            return MultiPoly.zero(self._p, target)
        items = list(self._terms.items())
        return _horner(items, 0, subs, self._p, target)

    # -- rendering ------------------------------------------------------
    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"MultiPoly(p={self._p}, {render(self)})"


def _mul(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    p = f._p
    a, b = f._terms, g._terms
    if not a or not b:
        return MultiPoly._raw(p, f._arity, {})
    if len(a) < len(b):
        a, b = b, a
    # accumulate unreduced, reduce once at the end
    out: dict[Exps, int] = {}
    get = out.get
    b_items = list(b.items())
    for ea, ca in a.items():
        for eb, cb in b_items:
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = get(e, 0) + ca * cb
    return MultiPoly._raw(p, f._arity, {e: c % p for e, c in out.items() if c % p})


def _horner(items: list[tuple[Exps, int]], j: int, subs: Sequence[MultiPoly], p: int, target: int) -> MultiPoly:
    """Compose the terms ``items`` whose exponents at indices < j are zero."""
    arity = len(subs)
    if j == arity:
        c = sum(c for _, c in items) % p
        return MultiPoly.constant(c, p, target)
    by_power: dict[int, list[tuple[Exps, int]]] = {}
    for e, c in items:
        by_power.setdefault(e[j], []).append((e, c))
    powers = sorted(by_power, reverse=True)
    if powers == [0]:
        return _horner(items, j + 1, subs, p, target)
    x = subs[j]
    x_pows: dict[int, MultiPoly] = {}

    def x_pow(k):
        if k not in x_pows:
            x_pows[k] = x ** k
        return x_pows[k]

    acc = None
    prev = powers[0]
    for k in powers:
        inner = _horner(by_power[k], j + 1, subs, p, target)
        acc = inner if acc is None else acc * x_pow(prev - k) + inner
        prev = k
    if prev:
        acc = acc * x_pow(prev)
    return acc


def evaluate_grid(f: MultiPoly, variables: Sequence[int]) -> np.ndarray:
    """Evaluate ``f`` at every point of ``F_p^len(variables)`` at once.

    Axis ``a`` of the result indexes the value of ``X_{variables[a]}``; all
    other variables must be absent from ``f``.  Requires ``p < 2**31``.
    """
    p = f.p
    if p >= 2**31:
        raise ValueError("grid evaluation needs p < 2**31")
    variables = list(variables)
    stray = f.support() - set(variables)
    if stray:
        raise ValueError(f"polynomial uses variables {sorted(stray)} outside the grid")
    n = len(variables)
    shape = (p,) * n
    out = np.zeros(shape, dtype=np.int64)
    if f.is_zero():
        return out
    xs = np.arange(p, dtype=np.int64)
    pow_tables: dict[int, np.ndarray] = {}

    def powers(k):
        if k not in pow_tables:
            pow_tables[k] = np.array([pow(int(x), k, p) for x in range(p)], dtype=np.int64)
        return pow_tables[k]

    for e, c in f._terms.items():
        term = np.full(shape, c, dtype=np.int64)
        for axis, j in enumerate(variables):
            k = e[j]
            if k:
                col = (powers(k) if k > 1 else xs).reshape([p if a == axis else 1 for a in range(n)])
                term = term * col % p
        out = (out + term) % p
    return out


def compose(f: MultiPoly, subs: Sequence[MultiPoly]) -> MultiPoly:
    return f.compose(subs)


def evaluate(f: MultiPoly, point: Sequence[int | FieldElement]) -> int:
    return f.evaluate(point)


def degree_in(f: MultiPoly, j: int) -> Degree:
    return f.degree_in(j)


def total_degree(f: MultiPoly) -> Degree:
    return f.total_degree()


# -- text format --------------------------------------------------------

def render(f: MultiPoly) -> str:
    """Render as e.g. ``2*X0*X1^2 + 1``; unit coefficients and exponents elided."""
    if f.is_zero():
        return "0"
    parts = []
    for e, c in f.terms():
        factors = [f"X{j}" if k == 1 else f"X{j}^{k}" for j, k in enumerate(e) if k]
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append("*".join([str(c)] + factors))
    return " + ".join(parts)


_TERM_RE = re.compile(r"^(?:\d+|X\d+(?:\^\d+)?)(?:\*(?:\d+|X\d+(?:\^\d+)?))*$")


def parse(text: str, p: int, arity: int) -> MultiPoly:
    """Inverse of :func:`render`; also accepts ``-`` between terms."""
    src = text.replace(" ", "")
    if not src:
        raise ValueError("empty polynomial text")
    if src == "0":
        return MultiPoly.zero(p, arity)
    src = src.replace("-", "+-")
    terms: dict[Exps, int] = {}
    for raw in src.split("+"):
        if raw == "":
            if src.startswith("+-"):
                continue
            raise ValueError(f"malformed polynomial {text!r}")
        sign = 1
        if raw.startswith("-"):
            sign, raw = -1, raw[1:]
        if not _TERM_RE.match(raw):
            raise ValueError(f"malformed term {raw!r} in {text!r}")
        coeff = 1
        e = [0] * arity
        for factor in raw.split("*"):
            if factor.startswith("X"):
                var, _, k = factor[1:].partition("^")
                j = int(var)
                if j >= arity:
                    raise ValueError(f"variable X{j} out of range for arity {arity}")
                e[j] += int(k) if k else 1
            else:
                coeff *= int(factor)
        key = tuple(e)
        terms[key] = terms.get(key, 0) + sign * coeff
    return MultiPoly(p, arity, terms)


def from_term_list(entries: Iterable[tuple[Sequence[int], int]], p: int, arity: int) -> MultiPoly:
    return MultiPoly(p, arity, {tuple(e): c for e, c in _accumulate(entries)})


def _accumulate(entries):
    acc: dict[Exps, int] = {}
    for e, c in entries:
        acc[tuple(e)] = acc.get(tuple(e), 0) + c
    return acc.items()
