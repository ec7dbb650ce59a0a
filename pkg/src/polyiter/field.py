"""Exact arithmetic in the prime field F_p and its additive characters.

Residues are kept canonical in ``[0, p)`` after every operation, so two
elements compare equal exactly when their values do.  The additive
character ``e_M(c) = exp(2*pi*i*c/M)`` is served from a cached table of
M-th roots of unity whenever M is small enough to tabulate.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

import numpy as np

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3 * 10^24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_TABLE_LIMIT = 10**6


class ModulusMismatch(ValueError):
    """Raised when two field elements with different moduli are combined."""


def is_prime(n: int) -> bool:
    """Deterministic primality test, exact for all 64-bit inputs."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Prime:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise TypeError(f"modulus must be an integer, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def __int__(self):
        return self.p

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(value, self)

    @property
    def bits(self) -> int:
        return self.p.bit_length()


def _as_prime(modulus) -> Prime:
    return modulus if isinstance(modulus, Prime) else Prime(modulus)


@dataclass(frozen=True)
class FieldElement:
    """Residue class ``value mod p``; arithmetic operators stay in F_p."""

    value: int
    modulus: Prime

    def __post_init__(self):
        mod = _as_prime(self.modulus)
        object.__setattr__(self, "modulus", mod)
        object.__setattr__(self, "value", int(self.value) % mod.p)

    @property
    def p(self) -> int:
        return self.modulus.p

    def _check(self, other) -> FieldElement:
        if isinstance(other, int):
            return FieldElement(other, self.modulus)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.modulus != self.modulus:
            raise ModulusMismatch(f"moduli differ: {self.p} vs {other.p}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return FieldElement(-self.value, self.modulus)

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return mul(self, inv(other))

    def __pow__(self, e: int):
        if e < 0:
            return FieldElement(pow(inv(self).value, -e, self.p), self.modulus)
        return FieldElement(pow(self.value, e, self.p), self.modulus)

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    if a.modulus != b.modulus:
        raise ModulusMismatch(f"moduli differ: {a.p} vs {b.p}")
    s = a.value + b.value
    if s >= a.p:
        s -= a.p
    return FieldElement(s, a.modulus)


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    # Python ints are unbounded, so a*b cannot overflow for any p.
    if a.modulus != b.modulus:
        raise ModulusMismatch(f"moduli differ: {a.p} vs {b.p}")
    return FieldElement(a.value * b.value % a.p, a.modulus)


def inv(a: FieldElement) -> FieldElement:
    if a.value == 0:
        raise ZeroDivisionError("zero has no inverse in F_p")
    return FieldElement(pow(a.value, -1, a.p), a.modulus)


def mult_order(g: FieldElement) -> int:
    """Smallest ``t >= 1`` with ``g^t = 1``.

    Only divisors of ``p - 1`` are tried, largest prime powers stripped
    first, so the cost is dominated by factoring ``p - 1``.
    """
    if g.value == 0:
        raise ZeroDivisionError("zero has no multiplicative order")
    p = g.p
    t = p - 1
    for q in _prime_factors(p - 1):
        while t % q == 0 and pow(g.value, t // q, p) == 1:
            t //= q
    return t


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class UnitComplex:
    re: float
    im: float

    def __post_init__(self):
        if abs(self.re * self.re + self.im * self.im - 1.0) > 1e-12:
            raise ValueError(f"({self.re}, {self.im}) is not on the unit circle")

    def __complex__(self):
        return complex(self.re, self.im)


@functools.lru_cache(maxsize=64)
def roots_of_unity(modulus: int) -> np.ndarray:
    """Read-only table ``exp(2*pi*i*k/modulus)`` for ``k = 0..modulus-1``."""
    k = np.arange(modulus, dtype=np.float64)
    table = np.exp(2j * np.pi * k / modulus)
    table.flags.writeable = False
    return table


def char_value(c: int, modulus: int) -> complex:
    """``e_M(c)`` as a plain complex number (hot-loop variant of ``char_ep``)."""
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    c %= modulus
    if modulus <= _TABLE_LIMIT:
        return complex(roots_of_unity(modulus)[c])
    return cmath.exp(2j * math.pi * c / modulus)


def char_ep(c: int, modulus: int) -> UnitComplex:
    z = char_value(c, modulus)
    return UnitComplex(z.real, z.imag)
