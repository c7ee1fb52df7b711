"""Command-line front end: JSON in, JSON report out.

Exit codes: 0 every check conclusive, 2 some verdict rests on a truncation
trend (or is inconclusive), 1 premise violation / bad input / I/O error,
64 usage error.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, specs
from .errors import CarveError, DegenerateError, NormUnbounded, PremiseViolation, SearchFailure
from .mce import (DEFAULT_SAMPLES, INVERSE_GRID, PREMISE_GRID, MCEFamily,
                  estimate_gch_constant, lp_bridge_check, random_functions, necessary_condition_check,
                  atom_witness_inequality, sufficient_condition_check, integrability_converse_check, integrability_check)
from .orlicz import MEMBERSHIP_K_GRID, luxemburg_norm
from .ranges import classify, numeric_rank, tail_sum_check
from .report import CheckReport
from .witness import build_witness, certify_divergence, check_witness, dump
from .young import (DOMINANCE_GRID, TREND_DELTA, check_delta2, check_delta_prime, check_nabla_prime,
                    complementary)

EXIT_OK, EXIT_FAIL, EXIT_TREND, EXIT_USAGE = 0, 1, 2, 64
SCHEMA_VERSION = "1"
ANALYSIS_ERRORS = (PremiseViolation, DegenerateError, NormUnbounded, SearchFailure, CarveError, ValueError)


class UsageParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def plain(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to strings,
    sets sorted, tuples to lists."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(plain(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(doc):
    return json.dumps(plain(doc), sort_keys=True, indent=2) + "\n"


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def provenance(args, truncation, tol):
    return {"tool": "orlicz-mce", "version": __version__, "seed": args.seed,
            "tol": "per-check defaults" if tol is None else tol, "truncation": truncation,
            "trend_delta": TREND_DELTA,
            "grids": {"premise": [PREMISE_GRID[0], PREMISE_GRID[-1], len(PREMISE_GRID)],
                      "inverse": [INVERSE_GRID[1], INVERSE_GRID[-1], len(INVERSE_GRID)],
                      "membership_k": list(MEMBERSHIP_K_GRID),
                      "dominance": list(DOMINANCE_GRID)}}


# ---------------------------------------------------------------------------
# check dispatch


def _theta(request):
    spec = request.get("theta")
    if spec is None:
        raise PremiseViolation("this check needs a theta Young function in the request")
    return specs.young(spec)


def _base(op):
    return op.base if isinstance(op, MCEFamily) else op


def _gch(op, seed):
    m = _base(op)
    rng = np.random.default_rng(seed)
    fs = random_functions(m.space, rng, DEFAULT_SAMPLES)
    pairs = [(f, m.abs_u()) for f in fs] + list(zip(fs, random_functions(m.space, rng, DEFAULT_SAMPLES)))
    est = estimate_gch_constant(m.E, m.source, pairs)
    return CheckReport("gch", True, 0.0, est.sample_count, 0.0,
                       {"C_hat": est.C_hat, "worst_pair": est.worst_pair})


def run_check(name, request, op, seed, tol):
    """Returns (status, payload); status in ok | trend | inconclusive."""
    tk = {} if tol is None else {"tol": tol}
    rk = {} if tol is None else {"rel_tol": tol}
    if name == "necessary":
        rep = necessary_condition_check(op, _theta(request))
    elif name == "atom_witness":
        rep = atom_witness_inequality(_base(op), **tk)
    elif name == "sufficient":
        rep = sufficient_condition_check(op, seed=seed)
    elif name == "integrability":
        rep = integrability_check(op, _theta(request), seed=seed)
    elif name == "integrability_converse":
        rep = integrability_converse_check(op)
    elif name == "lp_bridge":
        lp = request.get("lp")
        if lp is None:
            raise PremiseViolation("lp_bridge needs an 'lp' block with p and q")
        rep = lp_bridge_check(op, lp["p"], lp["q"], seed=seed, **rk)
    elif name == "gch":
        rep = _gch(op, seed)
    elif name.startswith("classify_"):
        rep = classify(op, _theta(request), name.split("_", 1)[1])
        payload = rep.to_dict()
        payload["numeric_rank"] = numeric_rank(_base(op))
        return ("trend" if isinstance(op, MCEFamily) else "ok"), payload
    elif name.startswith("tail_sum_"):
        rep = tail_sum_check(op, _theta(request), name.split("_", 2)[2], **rk)
    else:  # guarded by the schema
        raise ValueError(f"unknown check {name!r}")
    payload = rep.to_dict()
    if isinstance(rep, CheckReport):
        return "ok", payload
    if rep.verdict == "inconclusive":
        return "inconclusive", payload
    return ("trend" if rep.trend_based else "ok"), payload


def _exit_code(statuses):
    if any(s == "failed" for s in statuses):
        return EXIT_FAIL
    if any(s in ("trend", "inconclusive") for s in statuses):
        return EXIT_TREND
    return EXIT_OK


def analyze(request, args, only=None):
    seed = request.get("seed", 0) if args.seed is None else args.seed
    args.seed = seed
    tol = args.tol if args.tol is not None else request.get("tol")
    op = specs.operator(request, args.truncation)
    trunc = op.N if isinstance(op, MCEFamily) else None
    checks = only if only is not None else request.get("checks", [])
    out, statuses = {}, []
    for name in checks:
        try:
            status, payload = run_check(name, request, op, seed, tol)
        except ANALYSIS_ERRORS as exc:
            status = "failed"
            payload = {"error": type(exc).__name__, "message": str(exc),
                       "worst": getattr(exc, "worst", None)}
        payload["status"] = status
        payload["computed_with"] = {"truncation": trunc, "tol": tol, "seed": seed}
        out[name] = payload
        statuses.append(status)
    code = _exit_code(statuses)
    report = {"schema_version": SCHEMA_VERSION, "provenance": provenance(args, trunc, tol),
              "checks": out, "exit_code": code}
    return report, code


def _key_quantity(payload):
    for key in ("verdict", "classification"):
        if key in payload:
            verdict = payload[key]
            break
    else:
        verdict = "passed" if payload.get("passed") else payload.get("error", "failed")
    q = payload.get("quantities", {})
    for k in ("atom_sup", "M", "g_norm_theta", "max_rel_term_error"):
        if k in q:
            return verdict, f"{k}={plain(q[k])}"
    if "rank" in payload:
        return verdict, f"rank={payload['rank']}"
    d = payload.get("details", {})
    for k in ("C_hat", "C", "norm_lower_bound"):
        if k in d:
            return verdict, f"{k}={plain(d[k])}"
    return verdict, payload.get("message", "")


def summary(report, stream):
    rows = [("check", "status", "verdict", "key quantity")]
    for name in sorted(report["checks"]):
        p = report["checks"][name]
        verdict, key = _key_quantity(p)
        rows.append((name, p["status"], str(verdict), str(key)))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)) + "  " + r[3], file=stream)
    print(f"exit code: {report['exit_code']}", file=stream)


def emit(report, args):
    """JSON to --report (table on stdout) or JSON on stdout (table on stderr)."""
    text = dumps(report)
    if args.report:
        Path(args.report).write_text(text)
        summary(report, sys.stdout)
    else:
        sys.stdout.write(text)
        summary(report, sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args):
    request = _load(args.request)
    report, code = analyze(request, args)
    emit(report, args)
    return code


def cmd_classify(args):
    request = _load(args.request)
    modes = [f"classify_{args.mode}", f"tail_sum_{args.mode}"]
    report, code = analyze(request, args, only=modes)
    emit(report, args)
    return code


def cmd_witness(args):
    request = _load(args.request)
    specs.validate(request, "request")
    phi, psi = specs.young(request["source"]), specs.young(request["target"])
    sp = specs.space(request["space"], args.truncation)
    w = request.get("witness", {})
    region = w.get("region") or [c.id for c in sp.nonatomic]
    N = args.truncation if args.truncation is not None else w.get("N", 32)
    alpha = w.get("alpha", 1.0)
    op_spec = request.get("operator")
    try:
        if op_spec is None:
            ws = build_witness(phi, psi, sp, region, N)
            op = None
        else:
            u = specs.function(op_spec["u"], sp)
            alg_spec = op_spec.get("algebra", request["space"].get("sigma_algebra"))
            ws = build_witness(phi, psi, sp, region, N, u=u, algebra=specs.algebra(alg_spec, sp))
            op = None
        cons = check_witness(ws, args.tol or 1e-9)
        cert = certify_divergence(ws, op, alpha, args.tol or 1e-9)
        payload = {"witness": dump(ws, cert), "construction": cons.to_dict(),
                   "certificate": {k: v for k, v in cert.to_dict().items() if k != "details"},
                   "certificate_details": {k: v for k, v in cert.details.items()
                                           if not k.endswith("partial_sums")}}
        status = "trend" if cons.passed and cert.passed else "failed"
    except ANALYSIS_ERRORS as exc:
        payload = {"error": type(exc).__name__, "message": str(exc), "worst": getattr(exc, "worst", None)}
        status = "failed"
    payload["status"] = status
    payload["computed_with"] = {"truncation": N, "tol": args.tol, "seed": args.seed}
    code = _exit_code([status])
    report = {"schema_version": SCHEMA_VERSION, "provenance": provenance(args, N, args.tol),
              "checks": {"witness": payload}, "exit_code": code}
    emit(report, args)
    return code


def young_info(phi):
    conj = complementary(phi)
    info = {"spec": phi.to_spec(), "a_phi": phi.a_phi, "b_phi": phi.b_phi,
            "complementary": conj.to_spec(),
            "complementary_samples": {repr(y): conj.evaluate(y) for y in (0.5, 1.0, 2.0, 4.0)}}
    for name, fn in (("delta2", check_delta2), ("delta_prime", check_delta_prime),
                     ("nabla_prime", check_nabla_prime)):
        try:
            ev = fn(phi)
            info[name] = {"holds": ev.holds, "constant": ev.constant, "growing": ev.growing,
                          "violation": ev.violation, "grid": list(ev.grid)}
        except DegenerateError as exc:
            info[name] = {"error": str(exc)}
    return info


def cmd_young_info(args):
    phi = specs.young(_load(args.spec))
    emit_plain({"schema_version": SCHEMA_VERSION, "young": young_info(phi)}, args)
    return EXIT_OK


def cmd_norm(args):
    space_doc = _load(args.space)
    specs.validate(space_doc, "space")
    sp = specs.space(space_doc, args.truncation)
    f_doc = _load(args.function)
    specs.validate(f_doc, "function")
    phi = specs.young(_load(args.phi))
    nrm = luxemburg_norm(phi, specs.function(f_doc, sp), sp)
    emit_plain({"schema_version": SCHEMA_VERSION, "norm": {"value": nrm.value, "iterations": nrm.iterations,
                                                           "bracket": list(nrm.bracket)}}, args)
    return EXIT_OK


def emit_plain(doc, args):
    text = dumps(doc)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser():
    common = UsageParser(add_help=False)
    common.add_argument("--truncation", type=int, default=None, help="atom truncation N for parametric spaces")
    common.add_argument("--tol", type=float, default=None, help="override per-check tolerances")
    common.add_argument("--seed", type=int, default=None, help="seed for sampled checks (default 0)")
    common.add_argument("--report", default=None, help="write the JSON report here")

    parser = UsageParser(prog="orlicz-mce", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=UsageParser)
    sub.required = True

    p = sub.add_parser("analyze", parents=[common], help="run the checks listed in a request")
    p.add_argument("request")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", parents=[common], help="support set, rank and tail-sum certificate")
    p.add_argument("request")
    p.add_argument("--mode", choices=["weight", "reciprocal"], default="weight")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("witness", parents=[common], help="build and certify the divergence witness")
    p.add_argument("request")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("norm", parents=[common], help="Luxemburg norm of a function")
    p.add_argument("space")
    p.add_argument("function")
    p.add_argument("phi")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("young", help="Young-function utilities")
    ysub = p.add_subparsers(dest="young_command", parser_class=UsageParser)
    ysub.required = True
    q = ysub.add_parser("info", parents=[common], help="a, b, growth evidence, conjugate samples")
    q.add_argument("spec")
    q.set_defaults(func=cmd_young_info)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed is None and args.func not in (cmd_analyze, cmd_classify):
        args.seed = 0
    try:
        return args.func(args)
    except specs.SpecError as exc:
        print(f"schema error at {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ANALYSIS_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
