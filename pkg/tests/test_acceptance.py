"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Every criterion is a function `criterion_k(seed)` returning (ok, summary); the
summary is JSON-serializable and free of timings so that criterion 9 can
compare report bytes across repeated runs.
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_algebra, random_nonneg, random_space
from orlicz_mce import specs
from orlicz_mce.cli import dumps, main
from orlicz_mce.expectation import (ConditionalExpectation, check_averaging, check_idempotent,
                                    check_jensen, check_module_property, check_positivity,
                                    check_support_equality)
from orlicz_mce.mce import MCEOperator, lp_bridge_check, atom_witness_inequality
from orlicz_mce.measure import MeasureSpace, SimpleFunction, SubSigmaAlgebra
from orlicz_mce.numerics import log_grid
from orlicz_mce.orlicz import luxemburg_norm
from orlicz_mce.ranges import classify, numeric_rank, tail_sum_check
from orlicz_mce.witness import build_witness, certify_divergence, check_witness
from orlicz_mce.young import (Conjugate, ExpGrowth, Power, check_inverse_product_sandwich, check_young_inequality,
                              complementary)

SEED = 0


def announce(capsys, k, ok, text):
    # bypass capture so the line shows up in every pytest run
    with capsys.disabled():
        print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'} {text}")


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def rel(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


# ---------------------------------------------------------------------------
# 1. Young calculus


def criterion_1(seed=SEED):
    xs = log_grid(1e-3, 1e3, 60)
    fams = {"x^2/2": Power(2.0, True), "x^3/3": Power(3.0, True), "x^1.5": Power(1.5), "exp": ExpGrowth()}
    out, ok = {}, True
    for name, phi in fams.items():
        conj = complementary(phi)
        young = check_young_inequality(phi, xs, conj=conj)
        prod_sandwich = check_inverse_product_sandwich(phi, xs, conj=conj)
        sandwich = 0.0
        for y in xs:
            back = phi.evaluate(phi.inverse(y))
            sandwich = max(sandwich, (back - y) / y, (y - back) / y)
        bic_err, inf_mismatch = 0.0, 0
        bic = Conjugate(Conjugate(phi))
        for x in xs:
            a, b = phi.evaluate(x), bic.evaluate(x)
            if math.isinf(a) or math.isinf(b):
                inf_mismatch += a != b
            else:
                bic_err = max(bic_err, rel(a, b))
        row = {"young": young.passed, "prod_sandwich": prod_sandwich.passed, "inverse_sandwich_rel": sandwich,
               "biconjugation_rel": bic_err, "inf_mismatch": inf_mismatch}
        good = young.passed and prod_sandwich.passed and sandwich <= 1e-9 and bic_err <= 1e-6 and inf_mismatch == 0
        if isinstance(phi, Power):
            num = Conjugate(phi)
            row["closed_vs_numeric_rel"] = max(rel(conj.evaluate(y), num.evaluate(y)) for y in xs)
            good = good and row["closed_vs_numeric_rel"] <= 1e-9
        out[name] = row
        ok = ok and good
    return ok, out


def test_criterion_1_young_calculus(capsys):
    (ok, out), dt = timed(criterion_1)
    ok = ok and dt < 10.0
    worst = max(r["biconjugation_rel"] for r in out.values())
    announce(capsys, 1, ok, f"4 families, worst biconjugation rel {worst:.1e}, {dt:.2f}s")
    assert ok, out


# ---------------------------------------------------------------------------
# 2. conditional expectation suite


def criterion_2(seed=SEED):
    rng = np.random.default_rng(seed)
    phis = (Power(2.0, True), Power(3.0), ExpGrowth())
    failures, max_cells = [], 0
    for t in range(200):
        sp = random_space(rng, 64)
        max_cells = max(max_cells, len(sp.cells))
        E = ConditionalExpectation(sp, random_algebra(rng, sp))
        f = random_nonneg(rng, len(sp.cells))
        g = E.apply_array(rng.normal(size=len(sp.cells)))
        phi = phis[t % len(phis)]
        checks = [check_averaging(E, f), check_idempotent(E, f), check_module_property(E, f, g),
                  check_jensen(E, f, phi), check_positivity(E, f), check_support_equality(E, f, phi)]
        ef, nf = luxemburg_norm(phi, E.apply_array(f), sp).value, luxemburg_norm(phi, f, sp).value
        contraction = ef <= nf * (1 + 1e-9)
        bad = [c.name for c in checks if not c.passed] + ([] if contraction else ["contraction"])
        if bad:
            failures.append({"trial": t, "failed": bad})
    return not failures, {"trials": 200, "max_cells": max_cells, "failures": failures}


def test_criterion_2_conditional_expectation(capsys):
    (ok, out), dt = timed(criterion_2)
    ok = ok and dt < 30.0 and out["max_cells"] <= 64
    announce(capsys, 2, ok, f"200 triples (<= {out['max_cells']} cells), {len(out['failures'])} failures, {dt:.2f}s")
    assert ok, out


# ---------------------------------------------------------------------------
# 3. Luxemburg norm against the p-norm


def criterion_3(seed=SEED):
    rng = np.random.default_rng(seed)
    worst_rel, worst_bracket = 0.0, 0.0
    for p in (1.5, 2.0, 3.0):
        phi = Power(p)
        for _ in range(100):
            n = int(rng.integers(1, 30))
            masses = 10.0 ** rng.uniform(-3, 1, n)
            sp = MeasureSpace.from_masses({f"a{i}": m for i, m in enumerate(masses)})
            f = rng.normal(size=n) * 10.0 ** rng.uniform(-2, 2)
            oracle = math.fsum((np.abs(f) ** p * masses).tolist()) ** (1.0 / p)
            res = luxemburg_norm(phi, f, sp)
            lo, hi = res.bracket
            worst_rel = max(worst_rel, rel(res.value, oracle))
            worst_bracket = max(worst_bracket, (hi - lo) / hi)
    ok = worst_rel <= 1e-9 and worst_bracket <= 1e-10
    return ok, {"worst_rel": worst_rel, "worst_bracket": worst_bracket, "functions": 300}


def test_criterion_3_luxemburg_vs_pnorm(capsys):
    ok, out = criterion_3()
    announce(capsys, 3, ok, f"300 functions, worst rel {out['worst_rel']:.1e}, bracket {out['worst_bracket']:.1e}")
    assert ok, out


# ---------------------------------------------------------------------------
# 4. witness inequality for the necessary condition


def criterion_4(seed=SEED):
    rng = np.random.default_rng(seed)
    phi, psi = Power(2.0, True), Power(4.0, True)
    worst_excess, worst_norm, worst_oracle, atoms = -math.inf, 0.0, 0.0, 0
    for _ in range(50):
        masses = 10.0 ** rng.uniform(-3, 0, 10)
        sp = MeasureSpace.from_masses({f"a{i}": m for i, m in enumerate(masses)})
        u = random_nonneg(rng, 10, zero_frac=0.2)
        op = MCEOperator(SimpleFunction.from_array(sp, u), ConditionalExpectation(sp), phi, psi)
        rep = atom_witness_inequality(op, tol=1e-8)
        for name, row in rep.details["blocks"].items():
            i = int(name[1:])
            atoms += 1
            worst_excess = max(worst_excess, row["lhs"] - row["rhs"])
            worst_norm = max(worst_norm, abs(row["f_norm"] - 1.0))
            # ||c chi_A||_psi = c / psi^{-1}(1/mu) with c = u phi^{-1}(1/mu)
            closed = u[i] * (2.0 / masses[i]) ** 0.5 / (4.0 / masses[i]) ** 0.25
            worst_oracle = max(worst_oracle, abs(row["rhs"] - closed) / max(closed, 1e-300))
    ok = worst_excess <= 1e-8 and worst_norm <= 1e-8 and worst_oracle <= 1e-9
    return ok, {"atoms": atoms, "worst_excess": worst_excess, "worst_norm_dev": worst_norm,
                "worst_rhs_vs_closed_form": worst_oracle}


def test_criterion_4_witness_inequality(capsys):
    ok, out = criterion_4()
    announce(capsys, 4, ok, f"{out['atoms']} atoms, max lhs-rhs {out['worst_excess']:.1e}, "
                    f"max |norm-1| {out['worst_norm_dev']:.1e}")
    assert ok, out


# ---------------------------------------------------------------------------
# 5. L^p bridge


def lp_config(rng, regime, N=16):
    """Parametric request with an analytic verdict, kept away from the threshold."""
    if regime == "p<q":
        p = float(rng.choice([1.5, 2.0, 3.0]))
        q = p + float(rng.choice([0.5, 1.0, 2.0]))
        # sup_n u^q mu^{1-q/p} with mu = 2^-n, u = 2^{-cn} is finite iff c >= 1/p - 1/q
        thr = 1.0 / p - 1.0 / q
        c = max(thr + float(rng.choice([-1.0, 1.0])) * float(rng.uniform(0.15, 0.5)), 0.0)
        mass, u, bounded = "2^-n", f"2^(-{c!r}*n)", c >= thr
    else:
        q = float(rng.choice([1.5, 2.0, 3.0]))
        p = q + float(rng.choice([1.0, 2.0]))
        r = p * q / (p - q)
        # sum u^r mu = sum n^{-(b r + a)} is finite iff b r + a > 1
        a = float(rng.uniform(0.0, 1.0))
        s = float(rng.uniform(2.0, 4.0)) if rng.random() < 0.5 else float(rng.uniform(0.0, 0.9))
        b = max((s - a) / r, 0.0)
        mass, u, bounded = f"n^(-{a!r})", f"n^(-{b!r})", b * r + a > 1.0
    req = {"space": {"parametric": {"mass_formula": mass, "N": N}},
           "operator": {"u": {"formula": u}},
           "source": {"family": "power", "p": p, "scaled": True},
           "target": {"family": "power", "p": q, "scaled": True}}
    return req, p, q, bounded


def criterion_5(seed=SEED):
    rng = np.random.default_rng(seed)
    rows, ok = [], True
    for regime in ("p<q", "q<p"):
        for _ in range(20):
            req, p, q, bounded = lp_config(rng, regime)
            rep = lp_bridge_check(specs.operator(req), p, q, rel_tol=1e-6, seed=seed)
            qd = rep.quantities
            expected = "satisfied" if bounded else "violated"
            good = (qd["verdicts_agree"] and qd["max_rel_term_error"] <= 1e-6
                    and qd["generic_verdict"] == expected)
            ok = ok and good
            rows.append({"regime": regime, "p": p, "q": q, "u": req["operator"]["u"]["formula"],
                         "mass": req["space"]["parametric"]["mass_formula"],
                         "generic": qd["generic_verdict"], "closed": qd["closed_verdict"],
                         "analytic": expected, "max_rel_term_error": qd["max_rel_term_error"]})
    return ok, {"configs": rows}


def test_criterion_5_lp_bridge(capsys):
    ok, out = criterion_5()
    worst = max(r["max_rel_term_error"] for r in out["configs"])
    agree = sum(r["generic"] == r["closed"] == r["analytic"] for r in out["configs"])
    announce(capsys, 5, ok, f"{agree}/40 configurations agree, worst quantity rel {worst:.1e}")
    assert ok, out


# ---------------------------------------------------------------------------
# 6. support size equals numeric rank


T_WEIGHT = (Power(4.0, True), Power(2.0, True), Power(4.0, True))
T_RECIP = (Power(2.0, True), Power(4.0, True), Power(4.0, True))


def criterion_6(seed=SEED):
    rng = np.random.default_rng(seed)
    mismatches = []
    for t in range(100):
        sp = random_space(rng, 20, atomic_only=True)
        n = len(sp.cells)
        vals = rng.uniform(0.1, 10.0, n) * (rng.random(n) < 0.6)
        mode = "weight" if t % 2 == 0 else "reciprocal"
        phi, psi, theta = T_WEIGHT if mode == "weight" else T_RECIP
        alg = SubSigmaAlgebra.finest(sp) if t % 3 == 0 else random_algebra(rng, sp)
        op = MCEOperator(SimpleFunction.from_array(sp, vals), ConditionalExpectation(sp, alg), phi, psi)
        rep = classify(op, theta, mode=mode)
        rank = numeric_rank(op)
        if len(rep.support_set_E) != rank:
            mismatches.append({"trial": t, "support": len(rep.support_set_E), "rank": rank})
    return not mismatches, {"spaces": 100, "mismatches": mismatches}


def test_criterion_6_rank_equivalence(capsys):
    ok, out = criterion_6()
    announce(capsys, 6, ok, f"100 spaces, {len(out['mismatches'])} support/rank mismatches")
    assert ok, out


# ---------------------------------------------------------------------------
# 7. divergence witness


def criterion_7(seed=SEED):
    phi, psi, N = Power(2.0), Power(4.0), 32
    sp = MeasureSpace.from_masses(nonatomic={"F": 1.0})
    ws = build_witness(phi, psi, sp, ["F"], N)
    # exact inequalities psi(y_n) > phi(2^n n^3 y_n) in rationals
    exact = all(Fraction(y) ** 4 > (Fraction(2) ** n * n ** 3 * Fraction(y)) ** 2
                for n, y in enumerate(ws.y, start=1))
    construction = check_witness(ws).passed
    scale = ws.F_mass * phi.evaluate(ws.y[0])
    per_alpha = {}
    ok = exact and construction
    for alpha in (0.5, 1.0, 2.0):
        cert = certify_divergence(ws, alpha=alpha)
        d = cert.details
        n0, m0 = math.floor(alpha) + 1, math.floor(1.0 / alpha) + 1
        carved = [ws.space.mass_of(s) for s in ws.F_sets]
        phi_terms = [phi.evaluate(alpha * b) * m for b, m in zip(ws.b, carved)]
        geometric = all(t <= scale * 2.0 ** -n * (1 + 1e-9)
                        for n, t in enumerate(phi_terms, start=1) if n > n0)
        harmonic = math.fsum(1.0 / k for k in range(m0 + 1, N + 1))  # H_32 - H_m0
        s32, s16 = d["psi_partial_sums"][-1], d["psi_partial_sums"][15]
        lower = s32 >= scale * harmonic * (1 - 1e-9)
        ratio = s32 / s16
        good = geometric and lower and ratio > 1.05 and cert.passed
        ok = ok and good
        per_alpha[repr(alpha)] = {"geometric": geometric, "lower_bound": lower, "S32": s32,
                                  "bound": scale * harmonic, "S32_over_S16": ratio, "certificate": cert.passed}
    return ok, {"exact_inequalities": exact, "construction": construction,
                "y": [repr(y) for y in ws.y], "per_alpha": per_alpha}


def test_criterion_7_divergence_witness(capsys):
    (ok, out), dt = timed(criterion_7)
    ok = ok and dt < 5.0
    ratio = out["per_alpha"]["1.0"]["S32_over_S16"]
    announce(capsys, 7, ok, f"N=32 exact inequalities {out['exact_inequalities']}, S32/S16 {ratio:.3g}, {dt:.2f}s")
    assert ok, out


# ---------------------------------------------------------------------------
# 8. tail-sum certificate


def criterion_8(seed=SEED):
    rng = np.random.default_rng(seed)
    rows, ok = [], True
    for t in range(20):
        mode = "weight" if t % 2 == 0 else "reciprocal"
        phi, psi, theta = T_WEIGHT if mode == "weight" else T_RECIP
        n = int(rng.integers(2, 25))
        masses = 10.0 ** rng.uniform(-3, 0, n)
        sp = MeasureSpace.from_masses({f"a{i}": m for i, m in enumerate(masses)})
        u = rng.uniform(0.1, 5.0, n) * (rng.random(n) < 0.7)
        u[0] = max(u[0], 0.5)  # keep the support non-empty
        op = MCEOperator(SimpleFunction.from_array(sp, u), ConditionalExpectation(sp), phi, psi)
        rep = tail_sum_check(op, theta, mode)
        # oracle on the atoms directly: theta(x) = x^4/4, theta^{-1}(s) = (4 s)^{1/4}
        on = u > 0
        inv = (4.0 / masses[on]) ** 0.25
        if mode == "weight":
            C = float(np.max(inv / u[on]))
            terms = (C * u[on]) ** 4 / 4.0 * masses[on]
        else:
            C = float(np.max(u[on] * inv))
            terms = (C / u[on]) ** 4 / 4.0 * masses[on]
        per_atom = bool(np.all(terms >= 1.0 - 1e-9))
        count = int(on.sum()) <= math.fsum(terms.tolist()) * (1 + 1e-9)
        agree = rel(rep.details["C"], C) <= 1e-12 and rep.details["support_size"] == int(on.sum())
        good = rep.passed and per_atom and count and agree
        ok = ok and good
        rows.append({"mode": mode, "support": int(on.sum()), "theta_sum": rep.details["theta_sum"],
                     "per_atom": per_atom, "count": bool(count), "library_passed": rep.passed})
    return ok, {"configs": rows}


def test_criterion_8_tail_sum(capsys):
    ok, out = criterion_8()
    passed = sum(r["library_passed"] and r["per_atom"] and r["count"] for r in out["configs"])
    announce(capsys, 8, ok, f"{passed}/20 configurations certified")
    assert ok, out


# ---------------------------------------------------------------------------
# 9. determinism


CLI_REQUEST = {"space": {"parametric": {"mass_formula": "2^-n", "N": 8}},
               "operator": {"u": {"formula": "2^(-n/4)"}},
               "source": {"family": "power", "p": 2.0, "scaled": True},
               "target": {"family": "power", "p": 4.0, "scaled": True},
               "theta": {"family": "power", "p": 4.0, "scaled": True},
               "checks": ["necessary", "sufficient", "lp_bridge", "gch", "classify_reciprocal", "tail_sum_reciprocal"],
               "lp": {"p": 2.0, "q": 4.0}}


def test_criterion_9_determinism(tmp_path, capsys):
    criteria = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
                criterion_7, criterion_8]
    differing = []
    for k, fn in enumerate(criteria, start=1):
        a, b = dumps(fn(SEED)), dumps(fn(SEED))
        if a != b:
            differing.append(k)
    req = tmp_path / "req.json"
    req.write_text(json.dumps(CLI_REQUEST))
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        main(["analyze", str(req), "--seed", "7", "--report", str(path)])
        outs.append(path.read_bytes())
    capsys.readouterr()
    cli_same = outs[0] == outs[1]
    ok = not differing and cli_same
    announce(capsys, 9, ok, f"criteria 1-8 and CLI report bytes identical on rerun (differing: {differing or 'none'})")
    assert ok


if __name__ == "__main__":
    pytest.main([__file__, "-s"])
