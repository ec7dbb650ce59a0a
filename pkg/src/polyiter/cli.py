"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 budget exceeded, 3 I/O or
parse failure.  Numeric output is CSV with a header row; complex parts and
other floats are printed with 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from collections.abc import Sequence
from contextlib import contextmanager
from dataclasses import dataclass

from . import io as fileio
from .lincomp import linear_complexity, lower_bound_report
from .orbit import find_period, generate_points, truncate
from .polyhash import HashInputError, hash_bits, hex_to_bits
from .stats import DEFAULT_SWEEP_BUDGET, PointSet, discrepancy_exact, etk_bound, sum_S, sum_T, sum_U, sum_V
from .systems import DEFAULT_TERM_CAP, InvalidSystem, SizeGuardExceeded, check_degree_law, is_permutation, validate

BUDGET_ENV = "POLYITER_BUDGET"
TERM_CAP_ENV = "POLYITER_TERM_CAP"

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit with 2, which is reserved for budget failures
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class RunConfig:
    command: str
    args: argparse.Namespace

    @property
    def budget(self) -> int:
        return self.args.budget

    @property
    def workers(self) -> int:
        return self.args.workers


def _fmt(x: float) -> str:
    return format(x, ".12g")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not an integer") from None


# -- subcommands ------------------------------------------------------------

def cmd_validate(cfg: RunConfig, out) -> int:
    sf = fileio.load_system_file(cfg.args.system)
    failed = False
    for idx, member in enumerate(sf.members):
        report = validate(member)
        if not report.ok:
            failed = True
            prefix = f"system {idx}: " if len(sf.members) > 1 else ""
            for v in report.violations:
                print(f"{prefix}[{v.condition}] {v.message}", file=sys.stderr)
    if failed:
        print("invalid", file=out)
        return EXIT_INVALID
    checks = [is_permutation(s) for s in sf.members]
    if all(checks):
        print("ok, permutation: true", file=out)
    else:
        print("ok, permutation: false", file=out)
        for idx, chk in enumerate(checks):
            if not chk:
                a, b = chk.witness
                print(f"system {idx}: F({_vec(a)}) = F({_vec(b)})", file=out)
    return EXIT_OK


def _vec(w) -> str:
    return ",".join(str(int(x)) for x in w)


def _family(args):
    return fileio.load_system_file(args.system).family()


def _orbit(args, fam, N: int):
    init = _int_list(args.init)
    if len(init) != fam.m + 1:
        raise UsageError(f"--init needs {fam.m + 1} coordinates, got {len(init)}")
    sched = fam.schedule
    if sched.kind == "explicit" and N - 1 > len(sched.indices):
        raise UsageError(f"explicit schedule covers {len(sched.indices)} steps, {N - 1} needed")
    return generate_points(fam, init, N)


def cmd_gen(cfg: RunConfig, out) -> int:
    if cfg.args.period:
        return cmd_period(cfg, out)
    fam = _family(cfg.args)
    if cfg.args.count is None:
        raise UsageError("gen needs --count (or --period)")
    pts = _orbit(cfg.args, fam, cfg.args.count)
    if cfg.args.truncate:
        pts = truncate(pts)
    for w in pts:
        print(_vec(w), file=out)
    return EXIT_OK


def cmd_period(cfg: RunConfig, out) -> int:
    fam = _family(cfg.args)
    init = _int_list(cfg.args.init)
    if len(init) != fam.m + 1:
        raise UsageError(f"--init needs {fam.m + 1} coordinates, got {len(init)}")
    try:
        tail, tau = find_period(fam, init, guard=cfg.budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"{tail} {tau}", file=out)
    return EXIT_OK


def cmd_hash(cfg: RunConfig, out) -> int:
    params = fileio.load_hash_params(cfg.args.params)
    text = cfg.args.input.strip()
    bits = hex_to_bits(text) if text.lower().startswith("0x") else text
    digest = hash_bits(params, bits)
    if cfg.args.emit == "hex":
        print(digest.hex, file=out)
    elif cfg.args.emit == "coords":
        print(_vec(digest.coords), file=out)
    else:
        print(digest.bits, file=out)
    return EXIT_OK


def cmd_degrees(cfg: RunConfig, out) -> int:
    fam = _family(cfg.args)
    report = check_degree_law(fam, cfg.args.kmax, term_cap=cfg.args.term_cap)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["k", "i", "observed", "predicted", "equal"])
    for row in report.rows:
        w.writerow([row.k, row.i, row.observed, row.predicted, str(row.equal).lower()])
    return EXIT_OK


def cmd_sums(cfg: RunConfig, out) -> int:
    args = cfg.args
    fam = _family(args)
    if not args.a and not args.b:
        raise UsageError("give at least one --a or --b vector")
    pts = _orbit(args, fam, args.N)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["kind", "a_or_b", "N", "re", "im", "modulus"])
    for kind, vecs, fn, width in (("S", args.a, sum_S, fam.m), ("T", args.b, sum_T, fam.m + 1)):
        for text in vecs or ():
            vec = _int_list(text)
            if len(vec) != width:
                raise UsageError(f"{kind} needs a vector of length {width}, got {text!r}")
            res = fn(pts, vec, args.N, fam.p)
            z = res.value
            w.writerow([kind, " ".join(map(str, vec)), args.N, _fmt(z.real), _fmt(z.imag), _fmt(abs(z))])
    return EXIT_OK


def cmd_avg_sums(cfg: RunConfig, out) -> int:
    args = cfg.args
    fam = _family(args)
    vec = _int_list(args.vec)
    fn = sum_U if args.kind == "U" else sum_V
    width = fam.m if args.kind == "U" else fam.m + 1
    if len(vec) != width:
        raise UsageError(f"{args.kind} needs a vector of length {width}")
    value = fn(fam, vec, args.c, args.M, args.N, budget=cfg.budget, workers=cfg.workers)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["kind", "c", "M", "N", "value", "budget"])
    w.writerow([args.kind, args.c, args.M, args.N, _fmt(value), cfg.budget])
    return EXIT_OK


def cmd_discrepancy(cfg: RunConfig, out) -> int:
    args = cfg.args
    fam = _family(args)
    pts = _orbit(args, fam, args.N)
    if not args.full:
        pts = truncate(pts)
    ps = PointSet.from_residues(pts, fam.p)
    exact = discrepancy_exact(ps)
    C_s = args.C_s if args.C_s is not None else 1.5**ps.s
    bound = etk_bound(ps, args.H, C_s)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["N", "exact", "etk_bound", "H", "C_s"])
    w.writerow([args.N, _fmt(exact), _fmt(bound), args.H, _fmt(C_s)])
    return EXIT_OK


def cmd_lincomp(cfg: RunConfig, out) -> int:
    args = cfg.args
    fam = _family(args)
    u = truncate(_orbit(args, fam, args.N))
    if fam.m == 0:
        raise UsageError("linear complexity needs m >= 1")
    res = linear_complexity(u, args.N, fam.p)
    print(f"L {res.L}", file=out)
    for h, c in enumerate(res.witness.coeffs):
        print(f"c{h} {_vec(c)}", file=out)
    if res.window_empty:
        print("window empty", file=out)
    print(str(lower_bound_report(res.L, args.N, fam.p, fam.m)), file=out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    common.add_argument("--budget", type=int, default=None,
                        help=f"cap on p^(m+1)*N sweeps and state-space scans (default ${BUDGET_ENV} or {DEFAULT_SWEEP_BUDGET})")
    common.add_argument("--workers", type=int, default=1, help="processes for seed sweeps")

    sysopt = _Parser(add_help=False)
    sysopt.add_argument("--system", required=True, help="system family JSON file")

    orbit = _Parser(add_help=False)
    orbit.add_argument("--init", required=True, help="initial vector, comma separated")

    ap = _Parser(prog="polyiter", description="Triangular polynomial systems over prime fields.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common, sysopt], help="check membership and bijectivity")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", parents=[common, sysopt, orbit], help="print the first states of an orbit")
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--truncate", action="store_true", help="drop the last coordinate")
    p.add_argument("--period", action="store_true", help="print 'tail tau' instead of states")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("period", parents=[common, sysopt, orbit], help="print 'tail tau' of an orbit")
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("hash", parents=[common], help="hash a bit string")
    p.add_argument("--params", required=True)
    p.add_argument("--input", required=True, help="bit string, or hex prefixed with 0x")
    p.add_argument("--emit", choices=("bits", "hex", "coords"), default="bits")
    p.set_defaults(func=cmd_hash)

    an = sub.add_parser("analyze", help="statistics of orbits")
    asub = an.add_subparsers(dest="analysis", required=True, parser_class=_Parser)

    p = asub.add_parser("degrees", parents=[common, sysopt])
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--term-cap", type=int, default=None)
    p.set_defaults(func=cmd_degrees)

    p = asub.add_parser("sums", parents=[common, sysopt, orbit])
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--a", action="append", help="coefficients for S over truncated vectors (repeatable)")
    p.add_argument("--b", action="append", help="coefficients for T over full states (repeatable)")
    p.set_defaults(func=cmd_sums)

    p = asub.add_parser("avg-sums", parents=[common, sysopt])
    p.add_argument("--kind", choices=("U", "V"), required=True)
    p.add_argument("--vec", required=True, help="a (length m) for U, b (length m+1) for V")
    p.add_argument("--c", type=int, default=0)
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_avg_sums)

    p = asub.add_parser("discrepancy", parents=[common, sysopt, orbit])
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--H", type=int, default=32)
    p.add_argument("--C_s", "--cs", dest="C_s", type=float, default=None)
    p.add_argument("--full", action="store_true", help="use full states instead of truncated vectors")
    p.set_defaults(func=cmd_discrepancy)

    p = asub.add_parser("lincomp", parents=[common, sysopt, orbit])
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_lincomp)
    return ap


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise fileio.FileFormatError(path, exc.strerror or str(exc)) from None
    with fh:
        yield fh


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.budget is None:
            args.budget = _env_int(BUDGET_ENV, DEFAULT_SWEEP_BUDGET)
        if getattr(args, "term_cap", "absent") is None:
            args.term_cap = _env_int(TERM_CAP_ENV, DEFAULT_TERM_CAP)
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        cfg = RunConfig(args.command if args.command != "analyze" else f"analyze {args.analysis}", args)
        with _sink(args.output) as out:
            return args.func(cfg, out)
    except InvalidSystem as exc:
        where = f" ({exc.where})" if exc.where else ""
        print(f"error: invalid system{where}", file=sys.stderr)
        for v in exc.report.violations:
            print(f"[{v.condition}] {v.message}", file=sys.stderr)
        return EXIT_INVALID
    except SizeGuardExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (fileio.FileFormatError, HashInputError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        # remaining structural problems in otherwise well-formed files
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
