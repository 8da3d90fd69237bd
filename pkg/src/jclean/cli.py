"""``jclean`` command line.

Exit codes: 0 success (including "not clean" verdicts), 1 theorem-check
failure, 2 input error, 3 hypothesis error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .catalog import CATALOG_SPECS, DEFAULT_CATALOG, catalog_names, catalog_ring
from .clean import CleanKind, decide
from .config import Caps, caps_from_env, parse_caps
from .errors import CapExceeded, HypothesisError, RingConstructionError
from .formal import FMContext, parse_matrix
from .rings import FiniteRing, analyze, build_ring, is_weakly_bleached, j_s_set, load_ring_spec
from .suite import CHECK_IDS, census, census_csv, format_table, run_all, summarize

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_HYPOTHESIS = 0, 1, 2, 3


def resolve_ring(token: str, caps: Caps) -> FiniteRing:
    """A spec file path, or a catalog name (``z4``; ``z4.json`` also resolves when no such file exists)."""
    if os.path.isfile(token):
        return build_ring(load_ring_spec(token), cap=caps.analysis_cap)
    stem = os.path.basename(token)
    if stem.endswith(".json"):
        stem = stem[:-5]
    if stem.lower() in CATALOG_SPECS:
        return catalog_ring(stem)
    raise FileNotFoundError(f"{token}: no such spec file or catalog ring "
                            f"(catalog: {', '.join(catalog_names())})")


def _emit(obj, fmt: str, out):
    if fmt == "json":
        out.write(json.dumps(obj, indent=2) + "\n")
    else:
        for key, val in obj.items():
            if isinstance(val, (list, tuple)):
                val = "{" + ", ".join(map(str, val)) + "}"
            out.write(f"{key}: {val}\n")


def cmd_ring_analyze(args, caps: Caps, out) -> int:
    R = resolve_ring(args.spec, caps)
    an = analyze(R, caps.analysis_cap)
    info = an.summary(R)
    if an.is_local:
        flag, witness = is_weakly_bleached(R, an)
        info["is_weakly_bleached"] = flag
        if witness:
            a, b, which = witness
            info["bleaching_witness"] = [R.name(a), R.name(b), which]
    if args.j_s is not None:
        s = R.element(args.j_s)
        info["s"] = R.name(s)
        info["j_s"] = [R.name(x) for x in sorted(j_s_set(R, an, s))]
    _emit(info, args.format, out)
    return EXIT_OK


def cmd_matrix_decide(args, caps: Caps, out) -> int:
    R = resolve_ring(args.spec, caps)
    ctx = FMContext(R, args.s, analyze(R, caps.analysis_cap), caps)
    A = parse_matrix(ctx, args.matrix)
    verdict = decide(ctx, A, CleanKind.parse(args.kind), args.method, verify=args.verify)
    out.write(json.dumps(verdict, indent=2) + "\n")
    return EXIT_OK


def cmd_suite_run(args, caps: Caps, out) -> int:
    rings = [resolve_ring(r, caps) for r in args.ring] if args.ring else None
    if args.default_catalog or rings is None:
        rings = [catalog_ring(n) for n in DEFAULT_CATALOG] + (rings or [])
    checks = args.check or None
    for c in checks or ():
        if c not in CHECK_IDS:
            raise ValueError(f"unknown check {c!r}; known: {', '.join(CHECK_IDS)}")

    def progress(rep):
        if args.format == "json":
            out.write(json.dumps(rep.to_json()) + "\n")
            out.flush()

    reports = run_all(rings, caps, checks=checks, s_values=args.s or None, jobs=args.jobs,
                      progress=progress)
    if args.format == "table":
        out.write(format_table(reports) + "\n")
    summary = summarize(reports)
    failures = [r for r in reports if r.status == "fail"]
    for r in failures:
        sys.stderr.write(f"FAIL {r.check} {r.ring} s={r.s}: {json.dumps(r.counterexample)}\n")
    gated = [r for r in reports if r.status == "hypotheses-not-met"]
    if gated and args.format == "table":
        sys.stderr.write(f"notice: {len(gated)} check(s) had unmet hypotheses\n")
    sys.stderr.write(f"summary: {json.dumps(summary)}\n")
    return EXIT_CHECK_FAILED if failures else EXIT_OK


def cmd_census(args, caps: Caps, out) -> int:
    R = resolve_ring(args.spec, caps)
    an = analyze(R, caps.analysis_cap)
    svals = args.s or [int(x) for x in sorted(an.center)]
    rows = [census(FMContext(R, s, an, caps)) for s in svals]
    out.write(census_csv(rows))
    return EXIT_OK


def cmd_catalog_list(args, caps: Caps, out) -> int:
    for name in catalog_names():
        spec = CATALOG_SPECS[name]
        default = "*" if name in DEFAULT_CATALOG else " "
        out.write(f"{default} {name:6s} {spec.label or name} ({spec.kind})\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jclean", description="Strongly (J-)clean matrices in M2(R;s) over finite rings.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--caps", default="", help="cap overrides (JSON or k=v,...); applied after JCLEAN_CAPS")
    sub = p.add_subparsers(dest="command", required=True)

    ring = sub.add_parser("ring", help="ring utilities").add_subparsers(dest="action", required=True)
    ra = ring.add_parser("analyze", help="units, J, idempotents, center, locality")
    ra.add_argument("spec", help="ring spec JSON file or catalog name")
    ra.add_argument("--j-s", metavar="S", help="also print J_s(R) for this s")
    ra.add_argument("--format", choices=("json", "table"), default="table")
    ra.set_defaults(func=cmd_ring_analyze)

    matrix = sub.add_parser("matrix", help="matrix decisions").add_subparsers(dest="action", required=True)
    md = matrix.add_parser("decide", help="decide a clean kind for one matrix")
    md.add_argument("spec")
    md.add_argument("matrix", help='"[[a,b],[c,d]]" with entry names or indices')
    md.add_argument("--s", required=True)
    md.add_argument("--kind", choices=("sc", "sjc", "snc"), default="sjc")
    md.add_argument("--method", choices=("oracle", "auto"), default="oracle")
    md.add_argument("--verify", action="store_true", help="cross-check a theorem path against the oracle")
    md.set_defaults(func=cmd_matrix_decide)

    suite = sub.add_parser("suite", help="theorem checks").add_subparsers(dest="action", required=True)
    sr = suite.add_parser("run", help="run checks over rings and central s")
    sr.add_argument("--default-catalog", action="store_true")
    sr.add_argument("--check", action="append", metavar="ID")
    sr.add_argument("--ring", action="append", metavar="SPEC")
    sr.add_argument("--s", action="append", metavar="S")
    sr.add_argument("--jobs", type=int, default=1)
    sr.add_argument("--format", choices=("json", "table"), default="table")
    sr.set_defaults(func=cmd_suite_run)

    cen = sub.add_parser("census", help="CSV counts per context")
    cen.add_argument("spec")
    cen.add_argument("--s", action="append", metavar="S", help="default: every central s")
    cen.set_defaults(func=cmd_census)

    cat = sub.add_parser("catalog", help="built-in rings").add_subparsers(dest="action", required=True)
    cat.add_parser("list").set_defaults(func=cmd_catalog_list)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        caps = caps_from_env()
        if args.caps:
            caps = caps.override(**parse_caps(args.caps))
        if getattr(args, "jobs", 1) < 1:
            raise ValueError("--jobs must be positive")
        return args.func(args, caps, out)
    except HypothesisError as exc:
        sys.stderr.write(f"hypothesis error: {exc}\n")
        return EXIT_HYPOTHESIS
    except (RingConstructionError, ValueError, KeyError, OSError, CapExceeded) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT


def main_entry():
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
