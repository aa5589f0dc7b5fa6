"""End-to-end run of the cleaning argument on one instance, as a canonical report."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .amplify import certificate_violations, reconstruct_all
from .cleaning import Inequality, Mode, build_scheme, clean_all, fmt_rational, stage_chain_violations, survival_violations, verify_ledger
from .core import OrderedHypergraph, OrderedMatchingPattern, format_hypergraph, format_pattern
from .embed import count_copies, find_copy
from .farness import exact_deletion_number, farness_bounds, witness_is_valid


@dataclass
class VerifyOptions:
    k: int
    mode: Mode = Mode.FLOOR
    ratio: int | None = None
    cap: int = 10_000  # materialized amplification copies
    node_budget: int = 1_000_000  # amplification expansions
    farness_cap: int = 200_000  # skip farness bounds above this many copies of H in G
    exact: bool = False
    budget: int = 100_000  # branch-and-bound nodes
    workers: int = 1


@dataclass
class VerifyReport:
    body: dict
    checks: list[dict] = field(default_factory=list)
    budget_exhausted: bool = False

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    @property
    def first_failure(self) -> str | None:
        return next((c["name"] for c in self.checks if not c["passed"]), None)

    def canonical(self) -> dict:
        out = dict(self.body)
        out["checks"] = self.checks
        out["verdict"] = "pass" if self.passed else "fail"
        out["first_failure"] = self.first_failure
        out["budget_exhausted"] = self.budget_exhausted
        return out

    def to_json(self) -> str:
        return json.dumps(self.canonical(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"{c['name']}: {'pass' if c['passed'] else 'FAIL'} {c['detail']}".rstrip() for c in self.checks]
        lines.append(f"verdict: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def _ineq(q: Inequality) -> dict:
    return {"name": q.name, "lhs": fmt_rational(q.lhs), "op": q.op, "rhs": fmt_rational(q.rhs), "passed": q.passed}


def input_digest(G: OrderedHypergraph, H: OrderedMatchingPattern) -> str:
    h = hashlib.sha256()
    h.update(format_hypergraph(G).encode())
    h.update(b"\0")
    h.update(format_pattern(H).encode())
    return h.hexdigest()


def run_verify(G: OrderedHypergraph, H: OrderedMatchingPattern, opts: VerifyOptions) -> VerifyReport:
    """Clean, check the ledger, look for a copy in ``G_k``, amplify it, and bound the farness of ``G``."""
    sc = build_scheme(G.n, opts.k, H.t, opts.mode, ratio=opts.ratio)
    trace = clean_all(G, sc)
    report = VerifyReport({})
    checks = report.checks

    def check(name: str, ok: bool, detail: str = "") -> None:
        checks.append({"name": name, "passed": bool(ok), "detail": detail})

    led = verify_ledger(trace)
    for q in led.checks:
        check(f"ledger.{q.name}", q.passed, f"{fmt_rational(q.lhs)} {q.op} {fmt_rational(q.rhs)}")
    chain = stage_chain_violations(trace)
    check("stage_chain", not chain, "; ".join(chain))
    surv = survival_violations(trace, limit=10)
    check("survival", not surv, "; ".join(surv[:3]))

    base = find_copy(trace.final, H)
    amp = None
    if base is not None:
        cert = reconstruct_all(trace, H, base, cap=opts.cap, node_budget=opts.node_budget)
        check("replacement_family", not cert.family_failures, "; ".join(cert.family_failures[:3]))
        viol = certificate_violations(trace, H, cert)
        check("amplification", not viol, "; ".join(viol))
        if cert.complete:
            in_g0 = count_copies(trace.stages[0], H, workers=opts.workers).total
            check("certified_le_copies_in_G0", cert.certified_count <= in_g0, f"{cert.certified_count} <= {in_g0}")
        else:
            check("amplification_complete", True, "node budget reached; certified count is a lower bound")
        amp = cert.to_json(sample=min(opts.cap, 20))

    total = trace.ledger.total
    farness: dict = {"skipped": True}
    probe = count_copies(G, H, cap=opts.farness_cap)
    if not probe.truncated:
        if opts.exact:
            fr = exact_deletion_number(G, H, opts.budget)
            report.budget_exhausted = not fr.exact
        else:
            fr = farness_bounds(G, H)
        check("farness.witness", witness_is_valid(G, H, fr.witness), f"{fr.upper} deletions")
        farness = {
            "skipped": False,
            "copies": probe.total,
            "lower": fr.lower,
            "upper": fr.upper,
            "exact": fr.exact,
            "epsilon_lower": fmt_rational(fr.epsilon_lower),
        }
        if base is None:
            # the pipeline deletions leave G_k, which is H-free, so they are a witness
            name = "contrapositive.exact_le_pipeline" if fr.exact else "contrapositive.lower_le_pipeline"
            check(name, fr.lower <= total, f"{fr.lower} <= {total}")
    if base is None and sc.mode is Mode.EXACT and sc.ratio == 4 * sc.t * sc.k:
        bound = sc.eps * Fraction(G.n) ** G.s
        check("not_eps_far", total < bound, f"{total} < {fmt_rational(bound)}")

    report.body = {
        "input_digest": input_digest(G, H),
        "graph": {"n": G.n, "s": G.s, "edges": len(G)},
        "pattern": {"t": H.t, "s": H.s, "m": H.m, "edges": [list(e) for e in H.edges]},
        "scheme": dict(
            sc.params(),
            ratio=sc.ratio,
            eps=fmt_rational(sc.eps),
            gamma=fmt_rational(sc.gamma),
            beta=fmt_rational(sc.beta),
            delta=fmt_rational(sc.delta),
        ),
        "ledger": {
            "strip": trace.ledger.strip_deletions,
            "per_step": {str(k): v for k, v in sorted(trace.ledger.per_step.items())},
            "stage_edges": [len(g) for g in trace.stages],
            "inequalities": [_ineq(q) for q in led.checks],
        },
        "survival_violations": len(surv),
        "gk_copy": {"found": base is not None, "witness": None if base is None else list(base)},
        "amplification": amp,
        "farness": farness,
        "pipeline_deletions": total,
    }
    return report
