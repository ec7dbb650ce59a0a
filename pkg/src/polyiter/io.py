"""JSON files describing system families and hash parameters.

System file::

    {"p": 3, "m": 1, "S": [[1, 2], [0, 1]],
     "systems": [{"G": [[{"exps": [0, 2], "coeff": 1}, {"exps": [0, 0], "coeff": 1}]],
                  "H": [[]], "gm": 1, "hm": 1}],
     "schedule": "constant"}

``S`` may be nested rows or a flat row-major list of (m+1)^2 entries.  Each
of ``G`` and ``H`` holds one term list per level i < m.  A term's ``exps``
has either m+1 entries (all variables) or m-i entries (X_{i+1}..X_m only).
A polynomial may also be given as a string such as ``"X1^2 + 1"``.
``schedule`` is ``"constant"``, ``"cyclic"`` or a list of member indices.

Hash parameter files use the same fields with ``members`` in place of
``systems`` plus ``r`` and ``w0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .field import Prime, is_prime
from .multipoly import MultiPoly, parse as parse_poly
from .polyhash import HashParams
from .systems import Schedule, ShapeMatrix, SystemFamily, TriangularSystem


class FileFormatError(ValueError):
    """Malformed input; ``where`` is a JSON path or a line/column position."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where
        self.message = message


@dataclass(frozen=True)
class SystemFile:
    """Parsed but not yet validated contents of a system file."""

    prime: Prime
    shape: ShapeMatrix
    members: tuple[TriangularSystem, ...]
    schedule: Schedule

    @property
    def p(self) -> int:
        return self.prime.p

    @property
    def m(self) -> int:
        return self.shape.m

    def family(self) -> SystemFamily:
        """Validate every member; raises ``InvalidSystem`` with the report."""
        return SystemFamily(self.shape, self.members, self.schedule)


def _read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileFormatError(str(path), exc.strerror or str(exc)) from None
    return loads(text, str(path))


def loads(text: str, name: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{name}:{exc.lineno}:{exc.colno}", exc.msg) from None


def _get(obj: dict, key: str, where: str, *alts: str):
    for k in (key, *alts):
        if k in obj:
            return obj[k]
    raise FileFormatError(where, f"missing field {key!r}")


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FileFormatError(where, f"expected an integer, got {x!r}")
    return x


def _list(x, where: str) -> list:
    if not isinstance(x, list):
        raise FileFormatError(where, f"expected a list, got {type(x).__name__}")
    return x


def _shape(raw, m: int, where: str) -> ShapeMatrix:
    n = m + 1
    raw = _list(raw, where)
    if raw and all(isinstance(r, list) for r in raw):
        rows = raw
    else:
        if len(raw) != n * n:
            raise FileFormatError(where, f"flat shape needs {n * n} entries, got {len(raw)}")
        rows = [raw[i * n:(i + 1) * n] for i in range(n)]
    if len(rows) != n:
        raise FileFormatError(where, f"shape needs {n} rows, got {len(rows)}")
    for i, row in enumerate(rows):
        if len(_list(row, f"{where}[{i}]")) != n:
            raise FileFormatError(f"{where}[{i}]", f"row needs {n} entries")
        for j, x in enumerate(row):
            _int(x, f"{where}[{i}][{j}]")
    try:
        return ShapeMatrix.from_rows(rows)
    except ValueError as exc:
        raise FileFormatError(where, str(exc)) from None


def _poly(raw, p: int, m: int, i: int, where: str) -> MultiPoly:
    n = m + 1
    if isinstance(raw, str):
        try:
            return parse_poly(raw, p, n)
        except ValueError as exc:
            raise FileFormatError(where, str(exc)) from None
    terms: dict[tuple[int, ...], int] = {}
    for t, term in enumerate(_list(raw, where)):
        tw = f"{where}[{t}]"
        if not isinstance(term, dict):
            raise FileFormatError(tw, "term must be an object with 'exps' and 'coeff'")
        exps = [_int(e, f"{tw}.exps[{j}]") for j, e in enumerate(_list(_get(term, "exps", tw), f"{tw}.exps"))]
        coeff = _int(_get(term, "coeff", tw), f"{tw}.coeff")
        if len(exps) == m - i:
            exps = [0] * (i + 1) + exps
        elif len(exps) != n:
            raise FileFormatError(f"{tw}.exps", f"expected {n} or {m - i} exponents, got {len(exps)}")
        if any(e < 0 for e in exps):
            raise FileFormatError(f"{tw}.exps", "exponents must be >= 0")
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + coeff
    return MultiPoly(p, n, terms)


def _member(raw, prime: Prime, shape: ShapeMatrix, where: str) -> TriangularSystem:
    if not isinstance(raw, dict):
        raise FileFormatError(where, "system must be an object")
    m = shape.m
    polys = {}
    for key in ("G", "H"):
        levels = _list(_get(raw, key, where), f"{where}.{key}")
        if len(levels) != m:
            raise FileFormatError(f"{where}.{key}", f"expected {m} levels, got {len(levels)}")
        polys[key] = [_poly(lv, prime.p, m, i, f"{where}.{key}[{i}]") for i, lv in enumerate(levels)]
    g_m = _int(_get(raw, "gm", where, "g_m"), f"{where}.gm")
    h_m = _int(_get(raw, "hm", where, "h_m"), f"{where}.hm")
    return TriangularSystem(prime, shape, polys["G"], polys["H"], g_m, h_m)


def _schedule(raw, count: int, where: str) -> Schedule:
    if raw in ("constant", "cyclic"):
        return Schedule(raw)
    if isinstance(raw, list):
        idx = [_int(x, f"{where}[{k}]") for k, x in enumerate(raw)]
        for k, x in enumerate(idx):
            if not 0 <= x < count:
                raise FileFormatError(f"{where}[{k}]", f"member index {x} out of range 0..{count - 1}")
        return Schedule.explicit(idx)
    raise FileFormatError(where, f"schedule must be 'constant', 'cyclic' or an index list, got {raw!r}")


def _header(doc, where: str = "$") -> tuple[Prime, ShapeMatrix]:
    if not isinstance(doc, dict):
        raise FileFormatError(where, "top level must be an object")
    p = _int(_get(doc, "p", where), f"{where}.p")
    if not is_prime(p):
        raise FileFormatError(f"{where}.p", f"{p} is not prime")
    m = _int(_get(doc, "m", where), f"{where}.m")
    if m < 0:
        raise FileFormatError(f"{where}.m", "m must be >= 0")
    return Prime(p), _shape(_get(doc, "S", where), m, f"{where}.S")


def system_file_from_dict(doc: Any) -> SystemFile:
    prime, shape = _header(doc)
    raw_members = _list(_get(doc, "systems", "$", "members"), "$.systems")
    if not raw_members:
        raise FileFormatError("$.systems", "need at least one system")
    key = "systems" if "systems" in doc else "members"
    members = tuple(_member(r, prime, shape, f"$.{key}[{k}]") for k, r in enumerate(raw_members))
    schedule = _schedule(doc.get("schedule", "constant"), len(members), "$.schedule")
    return SystemFile(prime, shape, members, schedule)


def load_system_file(path: str | Path) -> SystemFile:
    return system_file_from_dict(_read_json(path))


def hash_params_from_dict(doc: Any) -> HashParams:
    prime, shape = _header(doc)
    r = _int(_get(doc, "r", "$"), "$.r")
    if r < 1:
        raise FileFormatError("$.r", "r must be >= 1")
    raw_members = _list(_get(doc, "members", "$", "systems"), "$.members")
    if len(raw_members) != 2**r:
        raise FileFormatError("$.members", f"need exactly 2^r = {2 ** r} systems, got {len(raw_members)}")
    key = "members" if "members" in doc else "systems"
    members = tuple(_member(x, prime, shape, f"$.{key}[{k}]") for k, x in enumerate(raw_members))
    w0 = [_int(x, f"$.w0[{j}]") for j, x in enumerate(_list(_get(doc, "w0", "$"), "$.w0"))]
    if len(w0) != shape.m + 1:
        raise FileFormatError("$.w0", f"expected {shape.m + 1} coordinates, got {len(w0)}")
    return HashParams(prime, shape, r, members, tuple(w0))


def load_hash_params(path: str | Path) -> HashParams:
    return hash_params_from_dict(_read_json(path))


# -- writing ------------------------------------------------------------------

def _terms_json(f: MultiPoly) -> list[dict]:
    return [{"exps": list(e), "coeff": c} for e, c in f.terms()]


def member_to_dict(sys: TriangularSystem) -> dict:
    return {
        "G": [_terms_json(g) for g in sys.G],
        "H": [_terms_json(h) for h in sys.H],
        "gm": sys.g_m,
        "hm": sys.h_m,
    }


def family_to_dict(shape: ShapeMatrix, members, schedule: Schedule | None = None) -> dict:
    members = list(members)
    schedule = schedule or Schedule()
    sched = list(schedule.indices) if schedule.kind == "explicit" else schedule.kind
    return {
        "p": members[0].p,
        "m": shape.m,
        "S": [list(row) for row in shape.s],
        "systems": [member_to_dict(s) for s in members],
        "schedule": sched,
    }


def hash_params_to_dict(params: HashParams) -> dict:
    doc = family_to_dict(params.shape, params.members)
    doc["members"] = doc.pop("systems")
    del doc["schedule"]
    doc["r"] = params.r
    doc["w0"] = list(params.w0)
    return doc
