"""Command-line interface.

Exit codes: 0 pass, 1 check failure, 2 usage or parse error, 3 budget exhausted.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import gen
from .amplify import certificate_violations, reconstruct_all
from .cleaning import (
    Mode,
    build_scheme,
    clean_all,
    fmt_rational,
    load_trace,
    save_trace,
    stage_chain_violations,
    survival_violations,
    verify_ledger,
)
from .core import (
    HypergraphError,
    format_hypergraph,
    format_pattern,
    parse_hypergraph,
    parse_pattern,
    read_hypergraph,
    read_pattern,
)
from .embed import OracleTooLarge, count_copies, count_copies_bruteforce, find_copy, per_edge_counts
from .farness import Indeterminate, exact_deletion_number, farness_bounds
from .pipeline import VerifyOptions, run_verify

log = logging.getLogger("ordremoval")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational P/Q: {text!r}") from None


def _emit(text: str, out: str | None = None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- commands --------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.kind == "binomial":
        p = gen.as_probability(args.p)
        G = gen.random_binomial(args.n, args.s, p, args.seed)
        comments = [f"binomial n={args.n} s={args.s} p={fmt_rational(p)} seed={args.seed} generator={gen.GENERATOR}"]
    elif args.kind == "complete":
        G = gen.complete(args.n, args.s)
        comments = [f"complete n={args.n} s={args.s}"]
    else:
        H = read_pattern(args.pattern)
        placements = [[int(x) for x in a.split(",")] for a in args.at or []]
        G = gen.planted(args.n, H, placements)
        comments = [f"planted n={args.n} copies={len(placements)}"]
    _emit(format_hypergraph(G, comments), args.output)
    return EXIT_OK


def cmd_count(args) -> int:
    G, H = read_hypergraph(args.graph), read_pattern(args.pattern)
    if args.per_edge:
        counts = per_edge_counts(G, H)
        lines = ["edge,count"] + [f"{' '.join(map(str, e))},{counts.get(e, 0)}" for e in G.sorted_edges()]
        _emit("\n".join(lines) + "\n")
        return EXIT_OK
    if args.brute:
        res = count_copies_bruteforce(G, H)
    else:
        res = count_copies(G, H, cap=args.cap, workers=args.threads)
    if args.json:
        _emit(_dump({"total": res.total, "truncated": res.truncated}))
    else:
        _emit(f"{res.total}\n")
    if res.truncated:
        log.info("stopped at cap %d", args.cap)
    return EXIT_OK


def cmd_farness(args) -> int:
    G, H = read_hypergraph(args.graph), read_pattern(args.pattern)
    fr = exact_deletion_number(G, H, args.budget) if args.exact else farness_bounds(G, H)
    out = {"lower": fr.lower, "upper": fr.upper, "exact": fr.exact, "epsilon_lower": fmt_rational(fr.epsilon_lower)}
    status = EXIT_OK if fr.exact or not args.exact else EXIT_BUDGET
    if args.eps is not None:
        threshold = args.eps * G.n**G.s
        if fr.lower >= threshold:
            out["eps_far"] = True
        elif fr.upper < threshold:
            out["eps_far"] = False
        else:
            out["eps_far"] = None
            status = EXIT_BUDGET
            log.warning("%s", Indeterminate(f"bounds [{fr.lower}, {fr.upper}] straddle {threshold}", fr))
        out["eps"] = fmt_rational(args.eps)
    if args.json:
        _emit(_dump(out))
    else:
        text = f"{fr.lower} {fr.upper} {str(fr.exact).lower()} {out['epsilon_lower']}\n"
        if args.eps is not None:
            verdict = "indeterminate" if out["eps_far"] is None else str(out["eps_far"]).lower()
            text += f"eps_far {out['eps']} {verdict}\n"
        _emit(text)
    return status


def cmd_clean(args) -> int:
    G = read_hypergraph(args.graph)
    pattern_text = None
    t = args.t
    if args.pattern:
        H = read_pattern(args.pattern)
        pattern_text = format_pattern(H)
        t = t or H.t
    if not t:
        raise HypergraphError("clean needs --t or --pattern")
    sc = build_scheme(G.n, args.k, t, args.mode, ratio=args.ratio)
    trace = clean_all(G, sc)
    save_trace(trace, args.trace, pattern_text)
    led = trace.ledger
    summary = {"strip": led.strip_deletions, "per_step": {str(k): v for k, v in led.per_step.items()},
               "stage_edges": [len(g) for g in trace.stages]}
    if args.json:
        _emit(_dump(summary))
    elif not args.quiet:
        _emit(f"strip {led.strip_deletions}\n" + "".join(f"step {k} {v}\n" for k, v in sorted(led.per_step.items())))
    return EXIT_OK


def cmd_verify_ledger(args) -> int:
    trace = load_trace(args.trace)
    rep = verify_ledger(trace)
    surv = survival_violations(trace, limit=10)
    chain = stage_chain_violations(trace)
    ok = rep.passed and not surv and not chain
    if args.json:
        _emit(_dump({
            "inequalities": [{"name": q.name, "lhs": fmt_rational(q.lhs), "op": q.op,
                              "rhs": fmt_rational(q.rhs), "passed": q.passed} for q in rep.checks],
            "survival_violations": surv, "stage_chain_violations": chain, "passed": ok,
        }))
    else:
        lines = [q.describe() for q in rep.checks]
        lines.append(f"survival: {'pass' if not surv else 'FAIL ' + surv[0]}")
        lines.append(f"stage_chain: {'pass' if not chain else 'FAIL ' + chain[0]}")
        _emit("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def _trace_pattern(args):
    if args.pattern:
        return read_pattern(args.pattern)
    p = Path(args.trace) / "pattern.txt"
    if not p.exists():
        raise HypergraphError("trace has no pattern.txt; pass --pattern")
    return read_pattern(p)


def cmd_amplify(args) -> int:
    trace = load_trace(args.trace)
    H = _trace_pattern(args)
    base = find_copy(trace.final, H)
    if base is None:
        log.warning("no copy in G_k")
        doc = {"base": None, "certified_count": "0", "complete": True}
        _emit(_dump(doc), args.output)
        return EXIT_OK
    cert = reconstruct_all(trace, H, base, cap=args.cap)
    viol = certificate_violations(trace, H, cert)
    doc = cert.to_json(sample=args.sample)
    doc["violations"] = viol
    _emit(_dump(doc), args.output)
    if not args.quiet and args.output:
        print(cert.certified_count)
    return EXIT_OK if not viol and not cert.family_failures else EXIT_FAIL


def cmd_verify(args) -> int:
    G, H = read_hypergraph(args.graph), read_pattern(args.pattern)
    opts = VerifyOptions(
        k=args.k, mode=Mode(args.mode), ratio=args.ratio, cap=args.cap, farness_cap=args.farness_cap,
        exact=args.exact, budget=args.budget, workers=args.threads,
    )
    rep = run_verify(G, H, opts)
    _emit(rep.to_json() if args.json else rep.to_text(), args.output)
    if not rep.passed:
        log.error("first failing check: %s", rep.first_failure)
        return EXIT_FAIL
    return EXIT_BUDGET if rep.budget_exhausted else EXIT_OK


def cmd_experiment(args) -> int:
    H = read_pattern(args.pattern)
    records, summary = gen.proposition_experiment(args.n, H, args.p, args.seeds, args.first_seed, args.threads)
    with open(args.output, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=gen.COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.row())
    if args.json:
        _emit(_dump(summary.as_dict()))
    elif not args.quiet:
        _emit("".join(f"{k} {v}\n" for k, v in summary.as_dict().items()))
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    raw = Path(args.file).read_text()
    if args.pattern:
        obj = parse_pattern(raw)
        canon = format_pattern(obj)
        again = parse_pattern(canon)
        same = again == obj
    else:
        obj = parse_hypergraph(raw)
        canon = format_hypergraph(obj)
        again = parse_hypergraph(canon)
        same = again.edges == obj.edges and (again.n, again.s) == (obj.n, obj.s)
    identical = canon == raw
    if not args.quiet:
        print("identical" if identical else "canonical form differs; semantically equal" if same else "MISMATCH")
    return EXIT_OK if same else EXIT_FAIL


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes (never changes results)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")

    parser = argparse.ArgumentParser(prog="ordremoval", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate an instance")
    gsub = g.add_subparsers(dest="kind", required=True)
    b = gsub.add_parser("binomial", parents=[common])
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--s", type=int, default=2)
    b.add_argument("--p", type=rational, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("-o", "--output")
    c = gsub.add_parser("complete", parents=[common])
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--s", type=int, default=2)
    c.add_argument("-o", "--output")
    pl = gsub.add_parser("planted", parents=[common])
    pl.add_argument("--n", type=int, required=True)
    pl.add_argument("--pattern", required=True)
    pl.add_argument("--at", action="append", help="comma-separated placement, repeatable")
    pl.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("count", parents=[common], help="count copies of a pattern")
    c.add_argument("--graph", required=True)
    c.add_argument("--pattern", required=True)
    c.add_argument("--brute", action="store_true")
    c.add_argument("--per-edge", action="store_true")
    c.add_argument("--cap", type=int)
    c.set_defaults(func=cmd_count)

    f = sub.add_parser("farness", parents=[common], help="bound the deletion number")
    f.add_argument("--graph", required=True)
    f.add_argument("--pattern", required=True)
    f.add_argument("--exact", action="store_true")
    f.add_argument("--eps", type=rational)
    f.add_argument("--budget", type=int, default=100_000)
    f.set_defaults(func=cmd_farness)

    cl = sub.add_parser("clean", parents=[common], help="run strip and cleaning, write a trace")
    cl.add_argument("--graph", required=True)
    cl.add_argument("--k", type=int, required=True)
    cl.add_argument("--t", type=int)
    cl.add_argument("--pattern", help="stored in the trace for amplify")
    cl.add_argument("--mode", choices=[m.value for m in Mode], default="floor")
    cl.add_argument("--ratio", type=int, help="refinement ratio (default 4tk)")
    cl.add_argument("--trace", required=True)
    cl.set_defaults(func=cmd_clean)

    vl = sub.add_parser("verify-ledger", parents=[common], help="check a trace's deletion bounds")
    vl.add_argument("--trace", required=True)
    vl.set_defaults(func=cmd_verify_ledger)

    a = sub.add_parser("amplify", parents=[common], help="certify a copy family from a trace")
    a.add_argument("--trace", required=True)
    a.add_argument("--pattern")
    a.add_argument("--cap", type=int, default=10_000)
    a.add_argument("--sample", type=int, default=20)
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_amplify)

    v = sub.add_parser("verify", parents=[common], help="end-to-end pipeline on one instance")
    v.add_argument("--graph", required=True)
    v.add_argument("--pattern", required=True)
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--mode", choices=[m.value for m in Mode], default="floor")
    v.add_argument("--ratio", type=int)
    v.add_argument("--cap", type=int, default=10_000)
    v.add_argument("--farness-cap", type=int, default=200_000)
    v.add_argument("--exact", action="store_true")
    v.add_argument("--budget", type=int, default=100_000)
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", parents=[common], help="random lower-bound experiment")
    esub = e.add_subparsers(dest="kind", required=True)
    pr = esub.add_parser("proposition", parents=[common])
    pr.add_argument("--n", type=int, default=40)
    pr.add_argument("--pattern", required=True)
    pr.add_argument("--p", type=rational, required=True)
    pr.add_argument("--seeds", type=int, default=30)
    pr.add_argument("--first-seed", type=int, default=0)
    pr.add_argument("-o", "--output", required=True)
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("roundtrip", parents=[common], help="parse and re-serialize a file")
    r.add_argument("file")
    r.add_argument("--pattern", action="store_true", help="parse as a pattern")
    r.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("threads", 1), ("quiet", False), ("json", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except OracleTooLarge as exc:
        log.error("%s", exc)
        return EXIT_BUDGET
    except (HypergraphError, OSError) as exc:
        log.error("error: %s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
