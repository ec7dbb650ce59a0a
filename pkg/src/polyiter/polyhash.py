"""Hashing by an input-driven walk through 2^r permutation systems.

The message bits are left-padded with zeros to a multiple of r, cut into
r-bit blocks (most significant bit first), and block value l selects system
F_l for the next step.  The digest is the final vector, written as m+1
fixed-width big-endian fields of n = bit_length(p) bits each.

No security claim is attached.  Messages that differ only by leading zeros
inside the first block collide by construction.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .field import Prime
from .systems import (
    InvalidSystem,
    Schedule,
    ShapeMatrix,
    SystemFamily,
    TriangularSystem,
    ValidationReport,
    Violation,
    is_permutation,
    seed_grid,
)


class HashInputError(ValueError):
    pass


@dataclass(frozen=True)
class HashParams:
    prime: Prime
    shape: ShapeMatrix
    r: int
    members: tuple[TriangularSystem, ...]
    w0: tuple[int, ...]

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("block width r must be >= 1")
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if len(members) != 2**self.r:
            raise ValueError(f"need exactly 2^r = {2 ** self.r} systems, got {len(members)}")
        # validates every member against the shape
        SystemFamily(self.shape, members)
        for idx, sys in enumerate(members):
            if sys.p != self.prime.p:
                raise ValueError(f"system {idx} has modulus {sys.p}")
            if not is_permutation(sys):
                raise InvalidSystem(_not_perm_report(), f"system {idx}")
        if len(self.w0) != self.shape.m + 1:
            raise ValueError(f"w0 needs {self.shape.m + 1} coordinates")
        object.__setattr__(self, "w0", tuple(int(x) % self.prime.p for x in self.w0))

    @property
    def p(self) -> int:
        return self.prime.p

    @property
    def m(self) -> int:
        return self.shape.m

    @property
    def n_bits(self) -> int:
        return self.prime.bits

    @property
    def digest_bits(self) -> int:
        return (self.m + 1) * self.n_bits

    def family(self, blocks: Sequence[int]) -> SystemFamily:
        return SystemFamily(self.shape, self.members, Schedule.explicit(blocks))


def _not_perm_report():
    return ValidationReport((Violation("permutation", None, None, "not a permutation of F_p^(m+1)"),))


@dataclass(frozen=True)
class Digest:
    bits: str
    coords: tuple[int, ...]

    @property
    def hex(self) -> str:
        width = (len(self.bits) + 3) // 4
        return format(int(self.bits, 2), f"0{width}x")

    def __str__(self):
        return self.bits


def _check_bits(bits: str) -> str:
    if any(ch not in "01" for ch in bits):
        raise HashInputError(f"not a bit string: {bits!r}")
    return bits


def pad(bits: str, r: int) -> str:
    """Left-pad with at most r-1 zeros to a length divisible by r."""
    _check_bits(bits)
    if r < 1:
        raise ValueError("r must be >= 1")
    if not bits:
        raise HashInputError("empty input has no blocks")
    return "0" * (-len(bits) % r) + bits


def split(padded: str, r: int) -> list[int]:
    _check_bits(padded)
    if len(padded) % r:
        raise HashInputError(f"length {len(padded)} is not a multiple of r = {r}")
    return [int(padded[i:i + r], 2) for i in range(0, len(padded), r)]


def serialize(w: Sequence[int], n: int, p: int | None = None) -> str:
    """Each coordinate as an n-bit big-endian field, in coordinate order."""
    if p is not None and p >= 2**n:
        raise ValueError(f"p = {p} does not fit in {n} bits")
    out = []
    for x in w:
        x = int(x)
        if x < 0 or x >= 2**n:
            raise ValueError(f"coordinate {x} does not fit in {n} bits")
        out.append(format(x, f"0{n}b"))
    return "".join(out)


def parse(bits: str, n: int) -> tuple[int, ...]:
    _check_bits(bits)
    if len(bits) % n:
        raise ValueError(f"length {len(bits)} is not a multiple of {n}")
    return tuple(int(bits[i:i + n], 2) for i in range(0, len(bits), n))


def hex_to_bits(text: str) -> str:
    """Expand hex digits MSB-first, four bits per digit (leading zeros kept)."""
    text = text.strip()
    if text.lower().startswith("0x"):
        text = text[2:]
    if not text:
        raise HashInputError("empty hex input")
    try:
        return "".join(format(int(ch, 16), "04b") for ch in text)
    except ValueError:
        raise HashInputError(f"not a hex string: {text!r}") from None


def hash_bits(params: HashParams, bits: str) -> Digest:
    blocks = split(pad(bits, params.r), params.r)
    w = params.w0
    members = params.members
    for ell in blocks:
        w = members[ell].apply(w)
    return Digest(serialize(w, params.n_bits, params.p), w)


def hash_bits_on_grid(params: HashParams, bits: str):
    """Final vectors for every initial vector at once, one column per seed."""
    blocks = split(pad(bits, params.r), params.r)
    W = seed_grid(params.p, params.m + 1)
    for ell in blocks:
        W = params.members[ell].apply_many(W)
    return W
