"""Multiplication conditional expectation operators f -> E(u f) and the
boundedness criteria evaluated on finite or truncated-countable spaces.

Terminology used throughout:

* an *atomic block* is a block of the sub-sigma-algebra made only of atoms;
  these are the atoms of the sub-sigma-algebra and carry the per-atom terms;
* every other block meets the non-atomic part and is checked by the
  "vanishes on the non-atomic part" conditions;
* a *family* is an operator given at every truncation N of a countable atom
  family; sups over the family are compared at N and 2N and reported as a
  trend, never as a certainty.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import PremiseViolation
from .expectation import ConditionalExpectation
from .measure import SimpleFunction, support_eps
from .numerics import log_grid
from .orlicz import luxemburg_norm, membership_trend, modular, partial_sum_trend
from .report import CheckReport
from .young import (TREND_DELTA, Chain, Composed, Power, check_delta2, check_delta_prime,
                    check_premise, complementary, validate)

PREMISE_GRID = tuple(log_grid(1e-2, 1e2, 25))
INVERSE_GRID = (0.0,) + tuple(log_grid(1e-3, 1e3, 40))
GCH_EXCLUDE = 1e-12
DEFAULT_SAMPLES = 20
BOUND_REL_TOL = 1e-9


@dataclass(frozen=True)
class MCEOperator:
    u: SimpleFunction
    E: ConditionalExpectation
    source: object
    target: object

    @property
    def space(self):
        return self.E.space

    def u_array(self):
        return self.u.as_array(self.space)

    def abs_u(self):
        return np.abs(self.u_array())

    def apply_array(self, f):
        fv = f.as_array(self.space) if isinstance(f, SimpleFunction) else np.asarray(f, float)
        return self.E.apply_array(self.u_array() * fv)

    def apply(self, f):
        return SimpleFunction.from_array(self.space, self.apply_array(f))


@dataclass(frozen=True)
class MCEFamily:
    """Operator on a countable atom family, materialized on demand at N atoms."""

    factory: Callable
    N: int

    def at(self, n):
        return self.factory(n)

    @property
    def base(self):
        return self.factory(self.N)


@dataclass
class CriterionReport:
    name: str
    verdict: str  # satisfied | violated | inconclusive
    quantities: dict = field(default_factory=dict)
    truncation: object = None
    trend: object = None  # None, or bounded / diverging / member / inconclusive
    constants: dict = field(default_factory=dict)
    premises: list = field(default_factory=list)
    trend_based: bool = False

    def to_dict(self):
        return asdict(self)


def materializations(op):
    """[(N, operator)] for a plain operator, [(N, op_N), (2N, op_2N)] for a family."""
    if isinstance(op, MCEFamily):
        return [(op.N, op.at(op.N)), (2 * op.N, op.at(2 * op.N))]
    return [(None, op)]


def sup_trend(s1, s2, delta=TREND_DELTA):
    """Compare sups at N and 2N: growth by more than (1 + delta) means diverging."""
    if math.isinf(s2) or s2 > (1.0 + delta) * s1:
        return "diverging"
    return "bounded"


def atomic_terms(E, block_values, term):
    """{block: term(value, mass)} over atomic blocks."""
    out = {}
    for b, name in enumerate(E.block_names):
        if E.block_atomic[b]:
            out[name] = term(float(block_values[b]), float(E.block_masses[b]))
    return out


def nonatomic_max(E, block_values):
    mask = ~E.block_atomic
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(block_values[mask])))


def _sup(terms):
    return max(terms.values()) if terms else 0.0


def _eps(values):
    return support_eps(np.asarray(values, dtype=float))


def _finish(report, i_ok, sups, truncs):
    """Fill verdict/trend from the (i) flag and the per-truncation sups."""
    if not i_ok:
        report.verdict = "violated"
        return report
    if len(sups) == 1:
        report.verdict = "satisfied" if math.isfinite(sups[0]) else "violated"
        return report
    report.trend = sup_trend(*sups)
    report.trend_based = True
    report.truncation = truncs[0]
    report.quantities["sup_by_truncation"] = dict(zip(map(str, truncs), sups))
    report.verdict = "satisfied" if report.trend == "bounded" else "violated"
    return report


# ---------------------------------------------------------------------------
# necessary conditions under phi(xy) <= psi(x) + theta(y)


def necessary_condition_check(op, theta, grid=PREMISE_GRID):
    """(i) E|u| vanishes on the non-atomic part; (ii) the atomic-block terms
    E|u|(A) * theta^{-1}(1 / mu(A)) have a finite sup."""
    first = materializations(op)[0][1]
    check_premise(first.source, first.target, theta, grid)
    rep = CriterionReport("necessary", "inconclusive", premises=["phi(xy) <= psi(x) + theta(y) on grid"])
    sups, truncs, i_ok = [], [], True
    for n, m in materializations(op):
        eu = m.E.block_means(m.abs_u())
        i_val = nonatomic_max(m.E, eu)
        i_ok = i_ok and i_val <= _eps(eu)
        terms = atomic_terms(m.E, eu, lambda v, mu: v * theta.inverse(1.0 / mu))
        if not truncs:
            rep.quantities.update({"max_Eu_on_nonatomic": i_val, "atom_terms_by_block": terms})
        sups.append(_sup(terms))
        truncs.append(n)
    rep.quantities["atom_sup"] = sups[0]
    return _finish(rep, i_ok, sups, truncs)


def atom_witness_inequality(op, tol=1e-8):
    """For each atomic block C put f = phi^{-1}(1/mu(C)) chi_C and compare
    E|u|(C) phi^{-1}(1/mu) / psi^{-1}(1/mu) with ||E(u f)||_psi.

    Also checks ||f||_phi = 1. The largest right-hand side is a lower bound
    for the operator norm.
    """
    phi, psi, E = op.source, op.target, op.E
    eu = E.block_means(op.abs_u())
    rows, worst, ok = {}, -math.inf, True
    for b, name in enumerate(E.block_names):
        if not E.block_atomic[b]:
            continue
        mu = float(E.block_masses[b])
        h = phi.inverse(1.0 / mu)
        f = np.where(E.block_index == b, h, 0.0)
        f_norm = luxemburg_norm(phi, f, op.space).value
        rhs = luxemburg_norm(psi, op.apply_array(f), op.space).value
        lhs = float(eu[b]) * h / psi.inverse(1.0 / mu)
        excess = lhs - rhs
        worst = max(worst, excess)
        good = excess <= tol and abs(f_norm - 1.0) <= tol
        ok = ok and good
        rows[name] = {"lhs": lhs, "rhs": rhs, "f_norm": f_norm, "holds": good}
    lower = max((r["rhs"] for r in rows.values()), default=0.0)
    return CheckReport("atom_witness_inequality", ok, worst if rows else 0.0, len(rows), tol,
                       {"blocks": rows, "norm_lower_bound": lower})


# ---------------------------------------------------------------------------
# generalized conditional Hoelder constant


@dataclass
class GCHEstimate:
    C_hat: float
    sample_count: int
    worst_pair: tuple


def gch_ratios(E, phi, f, g, conj=None):
    """Block-wise E|fg| / (phi^{-1}(E phi(f)) phi*^{-1}(E phi*(g))), nan where excluded."""
    conj = complementary(phi) if conj is None else conj
    f, g = np.abs(f), np.abs(g)
    lhs = E.block_means(f * g)
    a = np.array([phi.inverse(v) for v in E.block_means(phi.evaluate_many(f))])
    bb = np.array([conj.inverse(v) for v in E.block_means(conj.evaluate_many(g))])
    rhs = a * bb
    out = np.full(lhs.shape, np.nan)
    keep = rhs >= GCH_EXCLUDE
    out[keep] = lhs[keep] / rhs[keep]
    return out


def estimate_gch_constant(E, phi, sample_family, conj=None):
    """Largest observed ratio over the sampled pairs; a lower estimate of C."""
    conj = complementary(phi) if conj is None else conj
    best, worst, count = 0.0, None, 0
    for k, (f, g) in enumerate(sample_family):
        r = gch_ratios(E, phi, f, g, conj)
        count += 1
        if np.all(np.isnan(r)):
            continue
        b = int(np.nanargmax(r))
        if r[b] > best:
            best, worst = float(r[b]), (k, E.block_names[b])
    if count == 0:
        raise ValueError("GCH estimation needs at least one sample pair")
    return GCHEstimate(best, count, worst)


def random_functions(space, rng, n):
    """Nonnegative test functions with random supports and spread-out values."""
    out = []
    for _ in range(n):
        v = rng.lognormal(0.0, 1.0, len(space.cells))
        v[rng.random(len(space.cells)) < 0.3] = 0.0
        out.append(v)
    return out


def _unit_ball_samples(phi, space, rng, n):
    fs = []
    for f in random_functions(space, rng, n):
        nrm = luxemburg_norm(phi, f, space).value
        if nrm > 0:
            fs.append(f / nrm)
    return fs


# ---------------------------------------------------------------------------
# sufficient condition via Delta' constants and the GCH inequality


def delta_prime_constants(phi, psi, horizon=1e3):
    """(c1, c2): c1 turns phi in Delta' into phi^{-1}(s) phi^{-1}(t) <= c1 phi^{-1}(st),
    c2 is the Delta' constant of psi. Both from grid evidence."""
    ev_phi = check_delta_prime(phi, 0.0, horizon)
    ev_psi = check_delta_prime(psi, 0.0, horizon)
    for name, ev in (("phi", ev_phi), ("psi", ev_psi)):
        if not ev.holds:
            raise PremiseViolation(f"{name} fails the Delta' evidence check",
                                   {"constant": ev.constant, "growing": ev.growing})
    return max(ev_phi.constant, 1.0), ev_psi.constant


def sufficient_condition_check(op, C=None, c1=None, c2=None, n_samples=DEFAULT_SAMPLES, seed=0):
    """(i) E(phi*(|u|)) vanishes on the non-atomic part; (ii) the M-terms
    psi(C c1 phi*^{-1}(E phi*(|u|))(A) / phi^{-1}(mu(A))) mu(A) have finite sup.

    When satisfied, random f in the unit ball are checked against
    I_psi(E(u f)) <= c2 M psi(phi^{-1}(1)).
    """
    first = materializations(op)[0][1]
    phi, psi = first.source, first.target
    d_c1, d_c2 = delta_prime_constants(phi, psi)
    c1 = d_c1 if c1 is None else c1
    c2 = d_c2 if c2 is None else c2
    comp = Composed(psi, phi)
    vrep = validate(comp)
    if not vrep.passed:
        raise PremiseViolation("psi o phi^{-1} fails the Young-function checks",
                               vrep.details.get("problems"))
    conj = complementary(phi)
    rng = np.random.default_rng(seed)
    rep = CriterionReport("sufficient", "inconclusive",
                          premises=["phi, psi in Delta' (grid evidence)",
                                    "psi o phi^{-1} is a Young function (samples)",
                                    "GCH constant estimated from samples"])
    sups, truncs, i_ok = [], [], True
    samples, gch = None, None
    for n, m in materializations(op):
        if samples is None:
            samples = _unit_ball_samples(phi, m.space, rng, n_samples)
            if C is None:
                pairs = [(f, m.abs_u()) for f in samples]
                pairs += list(zip(random_functions(m.space, rng, n_samples),
                                  random_functions(m.space, rng, n_samples)))
                gch = estimate_gch_constant(m.E, phi, pairs, conj)
                C = gch.C_hat
        w = m.E.block_means(conj.evaluate_many(m.abs_u()))
        i_val = nonatomic_max(m.E, w)
        i_ok = i_ok and i_val <= _eps(w)
        terms = atomic_terms(m.E, w, lambda v, mu: psi.evaluate(C * c1 * conj.inverse(v) / phi.inverse(mu)) * mu)
        if not truncs:
            rep.quantities.update({"max_on_nonatomic": i_val, "M_terms": terms})
        sups.append(_sup(terms))
        truncs.append(n)
    rep.quantities["M"] = sups[0]
    rep.constants = {"C": C, "c1": c1, "c2": c2}
    if gch is not None:
        rep.constants["gch_samples"] = gch.sample_count
    _finish(rep, i_ok, sups, truncs)
    if rep.verdict == "satisfied" and math.isfinite(sups[0]):
        m = materializations(op)[0][1]
        bound = c2 * sups[0] * psi.evaluate(phi.inverse(1.0))
        worst = max((modular(psi, m.apply_array(f), m.space) for f in samples), default=0.0)
        rep.quantities["sampled_max_modular"] = worst
        rep.quantities["modular_bound"] = bound
        rep.quantities["bound_holds"] = bool(worst <= bound * (1 + BOUND_REL_TOL) + BOUND_REL_TOL)
    return rep


# ---------------------------------------------------------------------------
# integrability criterion


def check_inverse_premise(phi, theta, psi, xs=INVERSE_GRID, tol=1e-9):
    """phi^{-1}(x) theta^{-1}(x) <= psi^{-1}(x) on the grid."""
    worst, worst_x = -math.inf, None
    for x in xs:
        lhs = phi.inverse(x) * theta.inverse(x)
        rhs = psi.inverse(x)
        excess = (lhs - rhs) / max(1.0, rhs)
        if excess > worst:
            worst, worst_x = excess, x
    if worst > tol:
        raise PremiseViolation("phi^{-1} theta^{-1} <= psi^{-1} fails on the grid",
                               {"x": worst_x, "excess": worst})
    return worst


def default_holder_constant(phi, psi, theta):
    # 1 is exact when all three are powers; 2 is the general constant
    return 1.0 if all(isinstance(h, Power) for h in (phi, psi, theta)) else 2.0


def _family_of(op, fn):
    """N -> (array, space) built from each materialization."""
    def family(n):
        m = op.at(n)
        return fn(m), m.space
    return family


def integrability_check(op, theta, holder_constant=None, n_samples=DEFAULT_SAMPLES, seed=0):
    """g = phi*^{-1}(E phi*(|u|)) in L^theta makes the operator bounded, with
    ||E(uf)||_psi <= K C ||f||_phi ||g||_theta checked on random f."""
    first = materializations(op)[0][1]
    phi, psi = first.source, first.target
    check_inverse_premise(phi, theta, psi)
    conj = complementary(phi)
    K = default_holder_constant(phi, psi, theta) if holder_constant is None else holder_constant

    def g_of(m):
        return np.array([conj.inverse(v) for v in m.E.apply_array(conj.evaluate_many(m.abs_u()))])

    rep = CriterionReport("integrability", "inconclusive", constants={"holder_constant": K},
                          premises=["phi^{-1} theta^{-1} <= psi^{-1} on grid"])
    g = g_of(first)
    g_norm = luxemburg_norm(theta, g, first.space).value
    rep.quantities["g_norm_theta"] = g_norm
    if isinstance(op, MCEFamily):
        mv = membership_trend(theta, _family_of(op, g_of), op.N)
        rep.trend, rep.trend_based, rep.truncation = mv.verdict, True, op.N
        rep.quantities["membership"] = mv.to_dict()
        rep.verdict = {"member": "satisfied", "diverging": "violated"}.get(mv.verdict, "inconclusive")
    else:
        rep.verdict = "satisfied" if math.isfinite(g_norm) else "violated"
    if rep.verdict == "satisfied":
        rng = np.random.default_rng(seed)
        fs = random_functions(first.space, rng, n_samples)
        gch = estimate_gch_constant(first.E, phi, [(f, first.abs_u()) for f in fs], conj)
        rep.constants["C"] = gch.C_hat
        worst = -math.inf
        for f in fs:
            lhs = luxemburg_norm(psi, first.apply_array(f), first.space).value
            rhs = K * max(gch.C_hat, 1e-300) * luxemburg_norm(phi, f, first.space).value * g_norm
            if rhs > 0:
                worst = max(worst, lhs / rhs - 1.0)
            elif lhs > 0:
                worst = math.inf
        rep.quantities["bound_worst_rel_excess"] = worst if fs else 0.0
        rep.quantities["bound_holds"] = bool(worst <= BOUND_REL_TOL)
    return rep


def integrability_converse_check(op):
    """Necessary condition: E(phi*(|u|)) in L^{theta*} and
    phi*^{-1}(E phi*(|u|)) in L^{theta* o phi*}, theta = psi* o phi*^{-1}."""
    first = materializations(op)[0][1]
    phi, psi = first.source, first.target
    phi_c, psi_c = complementary(phi), complementary(psi)
    theta = Composed(psi_c, phi_c)
    vrep = validate(theta)
    if not vrep.passed:
        raise PremiseViolation("psi* o phi*^{-1} fails the Young-function checks",
                               vrep.details.get("problems"))
    for name, fn in (("theta", theta), ("phi*", phi_c)):
        ev = check_delta2(fn, 0.0, 1e3)
        if not ev.holds:
            raise PremiseViolation(f"{name} fails the Delta2 evidence check", {"K": ev.constant})
    theta_c = complementary(theta)
    chain = Chain(theta_c, phi_c)

    def h_of(m):
        return m.E.apply_array(phi_c.evaluate_many(m.abs_u()))

    def g_of(m):
        return np.array([phi_c.inverse(v) for v in h_of(m)])

    rep = CriterionReport("integrability_converse", "inconclusive",
                          premises=["theta = psi* o phi*^{-1} is a Young function (samples)",
                                    "theta, phi* in Delta2 (grid evidence)"])
    if isinstance(op, MCEFamily):
        mh = membership_trend(theta_c, _family_of(op, h_of), op.N)
        mg = membership_trend(chain, _family_of(op, g_of), op.N)
        rep.trend_based, rep.truncation = True, op.N
        rep.quantities = {"h_membership": mh.to_dict(), "g_membership": mg.to_dict()}
        verdicts = {mh.verdict, mg.verdict}
        rep.trend = mh.verdict if mh.verdict == mg.verdict else "inconclusive"
    else:
        hn = luxemburg_norm(theta_c, h_of(first), first.space).value
        gn = luxemburg_norm(chain, g_of(first), first.space).value
        rep.quantities = {"h_norm_theta_star": hn, "g_norm_chain": gn}
        verdicts = {"member" if math.isfinite(v) else "diverging" for v in (hn, gn)}
    if verdicts == {"member"}:
        rep.verdict = "satisfied"
    elif "diverging" in verdicts:
        rep.verdict = "violated"
    return rep


# ---------------------------------------------------------------------------
# power-function specializations


def _check_powers(op, p, q):
    m = materializations(op)[0][1]
    for h, e in ((m.source, p), (m.target, q)):
        if not (isinstance(h, Power) and h.scaled and h.coef is None and h.p == e):
            raise ValueError("lp_bridge_check needs scaled power source/target matching p and q")
    if not (1.0 < p < math.inf and 1.0 < q < math.inf) or p == q:
        raise ValueError("lp_bridge_check needs 1 < p, q < inf and p != q")


def lp_theta(p, q):
    """Power Young function with phi^{-1} theta^{-1} = psi^{-1} exactly for
    phi = x^p/p, psi = x^q/q, q < p."""
    r = p * q / (p - q)
    kappa = q ** (1.0 / q) / p ** (1.0 / p)
    return Power(r, coef=kappa ** (-r)), r, kappa


def _rel(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def lp_bridge_check(op, p, q, rel_tol=1e-6, seed=0):
    """Compare the generic criteria with their closed forms for powers.

    p < q: M-terms of the sufficient condition, divided by
    (C c1)^q p^{-q/p} / q, against E(u^{p'})^{q/p'} mu^{1 - q/p}.
    q < p: ||g||_theta against kappa^{-1} ||E(u^{p'})^{1/p'}||_r.
    """
    _check_powers(op, p, q)
    pp = p / (p - 1.0)
    out = {"p": p, "q": q}
    if p < q:
        gen = sufficient_condition_check(op, seed=seed)
        C, c1 = gen.constants["C"], gen.constants["c1"]
        K = (C * c1) ** q * p ** (-q / p) / q
        closed_sups, closed_i, worst = [], True, 0.0
        for k, (n, m) in enumerate(materializations(op)):
            w = m.E.block_means(m.abs_u() ** pp)
            closed_i = closed_i and nonatomic_max(m.E, w) <= _eps(w)
            terms = atomic_terms(m.E, w, lambda v, mu: v ** (q / pp) * mu ** (1.0 - q / p))
            closed_sups.append(_sup(terms))
            if k == 0 and K > 0:
                for name, t in terms.items():
                    worst = max(worst, _rel(gen.quantities["M_terms"][name] / K, t))
        generic_sups = [gen.quantities["M"]]
        if gen.trend_based:
            generic_sups = list(gen.quantities["sup_by_truncation"].values())
        closed = CriterionReport("lp_closed_form", "inconclusive")
        _finish(closed, closed_i, closed_sups, [n for n, _ in materializations(op)])
        sup_err = max(_rel(g / K, c) if K > 0 else _rel(g, c) for g, c in zip(generic_sups, closed_sups))
        if K == 0:
            worst = 0.0
        out.update({"regime": "p<q", "normalizer": K, "generic_verdict": gen.verdict,
                    "closed_verdict": closed.verdict, "generic_trend": gen.trend,
                    "closed_trend": closed.trend, "closed_sups": closed_sups,
                    "generic_sups_normalized": [g / K if K > 0 else g for g in generic_sups],
                    "max_rel_term_error": max(worst, sup_err)})
    else:
        theta, r, kappa = lp_theta(p, q)
        gen = integrability_check(op, theta, seed=seed)
        truncs = [n for n, _ in materializations(op)]
        if isinstance(op, MCEFamily):
            truncs = [op.N, 2 * op.N, 4 * op.N]
        sums, norms_closed = [], []
        for n in truncs:
            m = op.at(n) if n is not None else op
            g = m.E.apply_array(m.abs_u() ** pp) ** (1.0 / pp)
            s = math.fsum((g ** r * m.space.masses).tolist())
            sums.append(s)
            norms_closed.append(s ** (1.0 / r) / kappa)
        if len(sums) == 3:
            t = partial_sum_trend(*sums)
            closed_verdict = {"flat": "satisfied", "growing": "violated"}.get(t, "inconclusive")
        else:
            t = None
            closed_verdict = "satisfied" if math.isfinite(sums[0]) else "violated"
        err = _rel(gen.quantities["g_norm_theta"], norms_closed[0])
        out.update({"regime": "q<p", "r": r, "kappa": kappa, "generic_verdict": gen.verdict,
                    "closed_verdict": closed_verdict, "generic_trend": gen.trend, "closed_trend": t,
                    "closed_partial_sums": sums, "closed_norm": norms_closed[0],
                    "generic_norm": gen.quantities["g_norm_theta"], "max_rel_term_error": err})
    agree = out["generic_verdict"] == out["closed_verdict"]
    ok = agree and out["max_rel_term_error"] <= rel_tol
    out["verdicts_agree"] = agree
    rep = CriterionReport("lp_bridge", gen.verdict,
                          quantities=out, truncation=op.N if isinstance(op, MCEFamily) else None,
                          trend=gen.trend, constants=gen.constants, premises=gen.premises,
                          trend_based=gen.trend_based)
    rep.quantities["agreement"] = ok
    return rep
