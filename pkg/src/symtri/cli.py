"""``symtri`` command line.

Exit codes for ``check``: 0 undecided, 2 infeasible-symmetric, 3 outside the
valid region (gray); anything above 3 is an error (4 usage, 5 resource
limit, 6 other failures).  ``witness derive`` exits 1 when the anchor is not
refuted.  ``verify-model`` exits 1 on a residual above tolerance.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from xml.sax.saxutils import escape

import mpmath

from .certificates import (Verdict, check_point, derive_witness, load_witness, make_target,
                           paper_witness)
from .dist import (CONSTANT_TAGS, DEFAULT_MAX_DENOMINATOR, DEFAULT_PRECISION, SymmetricDist,
                   constant, e3_interval)
from .errors import ResourceLimitError, SymtriError
from .inflation import (CERTIFICATE_FAMILIES, DEFAULT_FAMILIES, LPI_FAMILIES, HierarchyLevel,
                        RingSpec, assemble, parse_families)
from .lin import format_fraction
from .lp import DEFAULT_PIVOT_LIMIT, solve_feasibility, verify_certificate

EXIT_UNDECIDED = 0
EXIT_NOT_REFUTED = 1
EXIT_INFEASIBLE = 2
EXIT_GRAY = 3
EXIT_USAGE = 4
EXIT_RESOURCE = 5
EXIT_FAILURE = 6

VERDICT_EXIT = {Verdict.UNDECIDED: EXIT_UNDECIDED, Verdict.INFEASIBLE_SYMMETRIC: EXIT_INFEASIBLE,
                Verdict.INVALID_GRAY: EXIT_GRAY}
CSV_HEADER = ["e1_num", "e1_den", "e2_num", "e2_den", "verdict", "min_level", "pivots", "ms"]
THREADS_ENV = "SYMTRI_THREADS"
DEFAULT_STEP = Fraction(1, 100)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_rational(text: str, precision: int = DEFAULT_PRECISION,
                   max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> Fraction:
    """``num/den``, an exact decimal, or a constant tag such as ``E1C``."""
    text = text.strip()
    if text.upper() in CONSTANT_TAGS:
        return constant(text.upper(), precision, max_denominator).rational
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def parse_axis(text: str, step: Fraction | None = None, **kw) -> list[Fraction]:
    """``a,b,c`` lists values; ``lo:hi`` or ``lo:hi:step`` spans a range."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        lo, hi = parse_rational(parts[0], **kw), parse_rational(parts[1], **kw)
        st = parse_rational(parts[2], **kw) if len(parts) == 3 else (step or DEFAULT_STEP)
        if st <= 0:
            raise argparse.ArgumentTypeError("step must be positive")
        out, v = [], lo
        while v <= hi:
            out.append(v)
            v += st
        values = out
    else:
        values = [parse_rational(t, **kw) for t in text.split(",") if t.strip()]
    for v in values:
        if not -1 <= v <= 1:
            raise argparse.ArgumentTypeError(f"value {v} outside [-1, 1]")
    return values


def _target(args):
    try:
        return make_target(args.level, args.ring)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _families(text, default):
    if text is None:
        return default
    try:
        return parse_families(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _describe(target) -> str:
    return f"ring {target.m}" if isinstance(target, RingSpec) else f"level {target.n}"


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    e1, e2 = parse_rational(args.e1), parse_rational(args.e2)
    target = _target(args)
    families = _families(args.families, DEFAULT_FAMILIES)
    print(f"point     E1={format_fraction(e1)} E2={format_fraction(e2)}")
    print(f"system    {_describe(target)}, families {','.join(sorted(f.value for f in families))}")
    res = check_point(e1, e2, target, families)
    if res.verdict is Verdict.INVALID_GRAY:
        iv = e3_interval(e1, e2)
        print(f"E3 range  empty ([{format_fraction(iv.lower)}, {format_fraction(iv.upper)}])")
    else:
        st = res.outcome.stats
        print(f"lp        {st.rows} rows x {st.cols} cols, {st.active_rows} active, "
              f"{st.pivots} exact pivots, {st.method}, {st.seconds:.2f} s")
        print(f"verified  {res.certified}")
        if args.dump_certificate and not res.outcome.feasible:
            with open(args.dump_certificate, "w") as fh:
                for i, v in enumerate(res.outcome.y):
                    if v:
                        fh.write(f"{i} {format_fraction(v)}\n")
            print(f"certificate written to {args.dump_certificate}")
    print(f"verdict   {res.verdict}")
    return VERDICT_EXIT[res.verdict]


# ---------------------------------------------------------------------------
# scan


@dataclass
class ScanConfig:
    e1_values: list[Fraction] = field(default_factory=list)
    e2_values: list[Fraction] = field(default_factory=list)
    level: int | None = None
    ring: int | None = None
    min_level: int = 1
    families: frozenset = DEFAULT_FAMILIES
    pivot_limit: int = DEFAULT_PIVOT_LIMIT
    threads: int = 1
    precision_bits: int = DEFAULT_PRECISION
    max_denominator: int = DEFAULT_MAX_DENOMINATOR
    out: str = "scan.csv"
    svg: str | None = None

    def points(self):
        return [(e1, e2) for e2 in self.e2_values for e1 in self.e1_values]


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise argparse.ArgumentTypeError(f"{path}:{lineno}: expected key=value")
            out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


def build_scan_config(args) -> ScanConfig:
    raw = read_config(args.config) if args.config else {}
    for key in ("e1", "e2", "step", "level", "ring", "min_level", "families", "threads",
                "precision_bits", "max_denominator", "pivot_limit", "out", "svg"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = str(value)
    known = {"e1", "e2", "e1_range", "e2_range", "step", "level", "ring", "min_level",
             "families", "threads", "precision_bits", "max_denominator", "pivot_limit",
             "out", "svg"}
    unknown = set(raw) - known
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = ScanConfig()
    cfg.precision_bits = int(raw.get("precision_bits", cfg.precision_bits))
    cfg.max_denominator = int(raw.get("max_denominator", cfg.max_denominator))
    kw = {"precision": cfg.precision_bits, "max_denominator": cfg.max_denominator}
    step = parse_rational(raw["step"]) if "step" in raw else None
    if step is not None and step <= 0:
        raise argparse.ArgumentTypeError("step must be positive")
    cfg.e1_values = parse_axis(raw.get("e1", raw.get("e1_range", "")), step, **kw)
    cfg.e2_values = parse_axis(raw.get("e2", raw.get("e2_range", "")), step, **kw)
    cfg.level = int(raw["level"]) if "level" in raw else None
    cfg.ring = int(raw["ring"]) if "ring" in raw else None
    if cfg.level is None and cfg.ring is None:
        cfg.level = 4
    if cfg.level is not None and cfg.ring is not None:
        raise argparse.ArgumentTypeError("give level or ring, not both")
    _target(cfg)
    cfg.min_level = int(raw.get("min_level", 1))
    cfg.families = _families(raw.get("families"), DEFAULT_FAMILIES)
    cfg.pivot_limit = int(raw.get("pivot_limit", DEFAULT_PIVOT_LIMIT))
    threads = raw.get("threads") or os.environ.get(THREADS_ENV) or "1"
    cfg.threads = max(1, int(threads))
    cfg.out = raw.get("out", cfg.out)
    cfg.svg = raw.get("svg")
    return cfg


def scan_point(e1: Fraction, e2: Fraction, cfg: ScanConfig) -> list:
    """One CSV row; levels are tried in increasing order until one refutes."""
    t0 = time.perf_counter()
    verdict, min_level, pivots = Verdict.UNDECIDED, "", 0
    if e3_interval(e1, e2).empty:
        verdict = Verdict.INVALID_GRAY
    else:
        if cfg.ring is not None:
            targets = [(cfg.ring, RingSpec(cfg.ring))]
        else:
            targets = [(n, HierarchyLevel(n)) for n in range(cfg.min_level, cfg.level + 1)]
        d = SymmetricDist(e1, e2)
        for label, target in targets:
            lp = assemble(target, d, cfg.families)
            out = solve_feasibility(lp, pivot_limit=cfg.pivot_limit)
            pivots += out.stats.pivots
            if not verify_certificate(lp, out):
                raise SymtriError(f"unverifiable outcome at {e1}, {e2}")
            if not out.feasible:
                verdict, min_level = Verdict.INFEASIBLE_SYMMETRIC, label
                break
    ms = int(round((time.perf_counter() - t0) * 1000))
    return [e1.numerator, e1.denominator, e2.numerator, e2.denominator, verdict.value,
            min_level, pivots, ms]


def _scan_job(job):
    e1, e2, cfg = job
    return scan_point(e1, e2, cfg)


def _completed(path) -> set:
    done = set()
    if not os.path.exists(path) or os.path.getsize(path) == 0:
        return done
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise SymtriError(f"{path} exists and is not a scan CSV; refusing to append")
        for row in reader:
            if len(row) == len(CSV_HEADER):
                done.add((Fraction(int(row[0]), int(row[1])), Fraction(int(row[2]), int(row[3]))))
    return done


def run_scan(cfg: ScanConfig, log_fn=print) -> int:
    done = _completed(cfg.out)
    todo = [p for p in cfg.points() if p not in done]
    fresh = not done and not (os.path.exists(cfg.out) and os.path.getsize(cfg.out))
    if done:
        log_fn(f"resuming: {len(done)} points already in {cfg.out}")
    with open(cfg.out, "a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(CSV_HEADER)
            fh.flush()
        jobs = [(e1, e2, cfg) for e1, e2 in todo]
        try:
            if cfg.threads > 1 and len(jobs) > 1:
                with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
                    for row in pool.map(_scan_job, jobs):
                        writer.writerow(row)
                        fh.flush()
            else:
                for job in jobs:
                    writer.writerow(_scan_job(job))
                    fh.flush()
        except KeyboardInterrupt:
            log_fn("interrupted; completed rows are saved and the scan can be resumed")
            return 130
    if cfg.svg:
        write_svg(read_scan(cfg.out), cfg.svg)
    log_fn(f"{len(todo)} points scanned, results in {cfg.out}")
    return 0


def read_scan(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{"e1": Fraction(int(r["e1_num"]), int(r["e1_den"])),
                 "e2": Fraction(int(r["e2_num"]), int(r["e2_den"])),
                 "verdict": r["verdict"], "min_level": r["min_level"]} for r in reader]


COLORS = {"INVALID_GRAY": "#9e9e9e", "INFEASIBLE_SYMMETRIC": "#f39c12", "UNDECIDED": "#ffffff"}


def write_svg(rows: list[dict], path, cell: int = 12, margin: int = 48) -> None:
    """One rect per grid cell; E1 grows to the right, E2 upwards."""
    xs = sorted({r["e1"] for r in rows})
    ys = sorted({r["e2"] for r in rows})
    col = {v: i for i, v in enumerate(xs)}
    row = {v: i for i, v in enumerate(ys)}
    width = 2 * margin + cell * max(len(xs), 1)
    height = 2 * margin + cell * max(len(ys), 1)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">']
    for r in rows:
        x = margin + cell * col[r["e1"]]
        y = margin + cell * (len(ys) - 1 - row[r["e2"]])
        title = escape(f'E1={format_fraction(r["e1"])} E2={format_fraction(r["e2"])} '
                       f'{r["verdict"]} {r["min_level"]}'.strip())
        parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                     f'fill="{COLORS.get(r["verdict"], "#ff00ff")}" stroke="#dddddd" '
                     f'stroke-width="0.5"><title>{title}</title></rect>')
    x0, y0 = margin, height - margin
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{width - margin}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{margin}" stroke="black"/>')
    parts.append(f'<text x="{width - margin}" y="{y0 + 30}" text-anchor="end" '
                 f'font-size="12">E1</text>')
    parts.append(f'<text x="{x0 - 30}" y="{margin}" font-size="12">E2</text>')
    if xs:
        parts.append(f'<text x="{x0}" y="{y0 + 16}" font-size="10">{float(xs[0]):g}</text>')
        parts.append(f'<text x="{width - margin}" y="{y0 + 16}" text-anchor="end" '
                     f'font-size="10">{float(xs[-1]):g}</text>')
    if ys:
        parts.append(f'<text x="{x0 - 4}" y="{y0}" text-anchor="end" '
                     f'font-size="10">{float(ys[0]):g}</text>')
        parts.append(f'<text x="{x0 - 4}" y="{margin + 10}" text-anchor="end" '
                     f'font-size="10">{float(ys[-1]):g}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def cmd_scan(args) -> int:
    cfg = build_scan_config(args)
    return run_scan(cfg)


# ---------------------------------------------------------------------------
# witness


def cmd_witness_eval(args) -> int:
    if args.paper == bool(args.file):
        raise argparse.ArgumentTypeError("choose exactly one of --paper or --file")
    w = paper_witness() if args.paper else load_witness(args.file)
    e1, e2 = parse_rational(args.e1), parse_rational(args.e2)
    v = w(e1, e2)
    sign = "positive" if v > 0 else ("zero" if v == 0 else "negative")
    print(f"witness   {w.provenance.kind}, {len(w.poly.coeffs)} terms")
    print(f"value     {format_fraction(v)}  (~{float(v):.6g})")
    print(f"sign      {sign}")
    if v > 0:
        print("verdict   no symmetric realization at this point")
    return 0


def cmd_witness_derive(args) -> int:
    try:
        a1, a2 = args.anchor.split(",")
    except ValueError:
        raise argparse.ArgumentTypeError("--anchor takes E1,E2") from None
    e1, e2 = parse_rational(a1), parse_rational(a2)
    target = _target(args)
    families = _families(args.families, CERTIFICATE_FAMILIES)
    if families & LPI_FAMILIES:
        raise argparse.ArgumentTypeError("witnesses need families without L1/L2")
    print(f"anchor    E1={format_fraction(e1)} E2={format_fraction(e2)}, {_describe(target)}")
    w = derive_witness(target, e1, e2, families)
    if w is None:
        print(f"anchor not refuted at this {'ring' if args.ring else 'level'}; no file written")
        return EXIT_NOT_REFUTED
    w.save(args.out)
    print(f"witness   {len(w.poly.coeffs)} terms, value at anchor "
          f"{format_fraction(w(e1, e2))} (~{float(w(e1, e2)):.6g})")
    print(f"written   {args.out}")
    return 0


# ---------------------------------------------------------------------------
# verify-model


def _to_mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def cmd_verify_model(args) -> int:
    from .localmodel import (SymmetricClassicalModel, load_model, model_correlators,
                             resolve_wiring, simulate_symmetric_ring, simulate_triangle)
    precision = args.precision
    tol = 1e-8 if precision >= 100 else 1e-6
    if precision < 100:
        print(f"note      {precision}-bit run; residual tolerance relaxed to {tol:g}")
    if args.model:
        model = load_model(args.model)
        if isinstance(model, SymmetricClassicalModel):
            return _verify_symmetric(model, args.max_ring, model_correlators,
                                     simulate_symmetric_ring)
        with mpmath.workprec(precision):
            dist = simulate_triangle(model)
        print(f"model     {args.model}")
    else:
        match = resolve_wiring(precision=precision, tol=tol)
        model, dist = match.model, match.distribution
        print(f"wiring    {model.wiring.describe()}, sign map 0->{model.sign_map[0]:+d} "
              f"1->{model.sign_map[1]:+d} ({len(match.equivalent)} equivalent readings)")
    with mpmath.workprec(precision):
        target = (constant("E1C", precision).value, mpmath.mpf(-1) / 3,
                  constant("E3C", precision).value)
        got = tuple(_to_mpf(v) for v in dist.correlators)
        res = [abs(a - b) for a, b in zip(got, target)]
        defect = _to_mpf(dist.permutation_defect())
        for name, g, t, r in zip(("E1", "E2", "E3"), got, target, res):
            print(f"{name}        {mpmath.nstr(g, 20):>24}  target {mpmath.nstr(t, 20):>24}  "
                  f"residual {mpmath.nstr(r, 3)}")
        print(f"symmetry  max change under party permutations {mpmath.nstr(defect, 3)}")
    ok = all(r < tol for r in res) and defect < tol
    print(f"result    {'match' if ok else 'MISMATCH'} (tolerance {tol:g})")
    return 0 if ok else 1


def _verify_symmetric(model, max_ring, model_correlators, simulate_symmetric_ring) -> int:
    from .inflation import ALL_FAMILIES, build_system
    from .lp import Feasible, SolveStats
    from .symmetry import build_orbit_table
    e1, e2 = model_correlators(model)
    print(f"model     symmetric, alphabet {model.alphabet}")
    print(f"E1, E2    {format_fraction(e1)}, {format_fraction(e2)}")
    rings = range(4, max_ring + 1)
    system = build_system(rings, ALL_FAMILIES, SymmetricDist(e1, e2))
    x = []
    for m in system.rings:
        p = simulate_symmetric_ring(model, m)
        x += [p[int(r)] for r in build_orbit_table(m).reps]
    ok = verify_certificate(system.lp_at(e1, e2), Feasible(tuple(x), SolveStats()))
    print(f"rings     4..{max_ring}: {system.n_rows} constraint rows "
          f"{'all hold' if ok else 'VIOLATED'}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="symtri", description="Exact inflation tests for symmetric triangle models.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_target(sp, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--ring", type=int, help="single ring size m")
        g.add_argument("--level", type=int, help="hierarchy level n (rings 4..n+3)")

    c = sub.add_parser("check", help="classify one point")
    c.add_argument("--e1", required=True)
    c.add_argument("--e2", required=True)
    add_target(c)
    c.add_argument("--families", help="comma list, e.g. L1,L2,COUPLING")
    c.add_argument("--dump-certificate", metavar="PATH", help="write the Farkas dual")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("scan", help="classify a grid of points into a CSV")
    s.add_argument("--config", help="key=value file; flags override it")
    s.add_argument("--e1", help="values 'a,b,c' or range 'lo:hi[:step]'")
    s.add_argument("--e2", help="values 'a,b,c' or range 'lo:hi[:step]'")
    s.add_argument("--step", help="default range step (1/100)")
    s.add_argument("--level", type=int)
    s.add_argument("--ring", type=int)
    s.add_argument("--min-level", type=int, dest="min_level")
    s.add_argument("--families")
    s.add_argument("--threads", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")
    s.add_argument("--pivot-limit", type=int, dest="pivot_limit")
    s.add_argument("--precision-bits", type=int, dest="precision_bits")
    s.add_argument("--max-denominator", type=int, dest="max_denominator")
    s.add_argument("--out")
    s.add_argument("--svg")
    s.set_defaults(func=cmd_scan)

    w = sub.add_parser("witness", help="evaluate or derive polynomial witnesses")
    wsub = w.add_subparsers(dest="action", required=True, parser_class=_Parser)
    we = wsub.add_parser("eval")
    we.add_argument("--paper", action="store_true", help="use the published witness")
    we.add_argument("--file", help="witness file")
    we.add_argument("--e1", required=True)
    we.add_argument("--e2", required=True)
    we.set_defaults(func=cmd_witness_eval)
    wd = wsub.add_parser("derive")
    wd.add_argument("--anchor", required=True, help="E1,E2")
    add_target(wd)
    wd.add_argument("--families", help="default FACTORIZED,DIRECT_MARGINAL,COUPLING")
    wd.add_argument("--out", default="witness.txt")
    wd.set_defaults(func=cmd_witness_derive)

    v = sub.add_parser("verify-model", help="simulate the three-symbol local model")
    v.add_argument("--model", help="model file (triangle or symmetric)")
    v.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="bits")
    v.add_argument("--max-ring", type=int, default=8, dest="max_ring",
                   help="largest ring checked for symmetric models")
    v.set_defaults(func=cmd_verify_model)
    return p


def _join_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--e2 -1/3`` into ``--e2=-1/3``; argparse reads ``-1/3`` as a flag."""
    out: list[str] = []
    for tok in argv:
        if (out and re.match(r"^-[\d.]", tok) and out[-1].startswith("--")
                and "=" not in out[-1]):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:       # --help and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        print(f"symtri: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"symtri: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (SymtriError, ValueError, OSError) as exc:
        table = getattr(exc, "table", None)
        where = f" [table {table}]" if table else ""
        print(f"symtri: error{where}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as exc:  # keep the >3 exit contract for unexpected failures
        logging.getLogger(__name__).debug("unexpected failure", exc_info=True)
        print(f"symtri: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
