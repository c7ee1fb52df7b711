"""Explicit sequences showing that no nonzero E(u .) maps L^phi into L^psi
on a non-atomic region when psi is not dominated by phi at infinity.

Construction: y_n with psi(y_n) > phi(2^n n^3 y_n), disjoint F_n of mass
phi(y_1) mu(F) / (2^n phi(n^3 y_n)) and f = sum n^2 y_n chi_{F_n}.  Then
I_phi(alpha f) converges for every alpha while I_psi(alpha E(u f)) grows at
least like a harmonic series.

With a weight u and a sub-sigma-algebra the sets F_n must be measurable for
the algebra, so the sequence is built on the quotient space: one non-atomic
cell per block, carrying the weight E(u). For such f, E(u f) = f E(u) and all
modulars agree with those on the original space.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import PremiseViolation, SearchFailure
from .expectation import ConditionalExpectation
from .measure import MeasureSpace, SimpleFunction, SubSigmaAlgebra, carve_subsets
from .mce import MCEOperator
from .orlicz import membership_trend, modular
from .report import CheckReport
from .young import TREND_DELTA, dominance

LOG_MARGIN = 1e-9
MAX_DOUBLINGS = 4000
EXTRA_DEPTH = 48
# 1/E(u) within this of an integer counts as that integer
LEVEL_SLACK = 1e-9


@dataclass(frozen=True)
class WitnessSequence:
    phi: object
    psi: object
    y: tuple
    b: tuple
    F_masses: tuple
    F_sets: tuple
    F_mass: float
    space: object
    region: tuple
    N: int
    weight: SimpleFunction = None  # E(u) on the quotient space; None means u = 1

    @property
    def f(self):
        vals = {}
        for bn, ids in zip(self.b, self.F_sets):
            for i in ids:
                vals[i] = bn
        return SimpleFunction(vals, 0.0)


def exceeds(psi, phi, y, n):
    """psi(y) > phi(2^n n^3 y), exactly when both functions allow it."""
    x = Fraction(2) ** n * n ** 3 * Fraction(y)
    a, b = psi.exact(Fraction(y)), phi.exact(x)
    if a is not None and b is not None:
        return a > b
    la = psi.log_evaluate(y)
    lb = phi.log_evaluate(float(x))
    return la > lb + LOG_MARGIN * max(1.0, abs(lb))


def find_y(psi, phi, n, start):
    """Smallest power of two >= start (itself a power of two) with the
    defining inequality."""
    y = start
    for _ in range(MAX_DOUBLINGS):
        if exceeds(psi, phi, y, n):
            return y
        y *= 2.0
        if not math.isfinite(y):
            break
    raise SearchFailure(f"no y_{n} found below the float horizon")


def witness_masses(phi, y, F_mass):
    """phi(y_1) mu(F) / (2^n phi(n^3 y_n)), computed in log space."""
    l1 = phi.log_evaluate(y[0])
    return [math.exp(l1 + math.log(F_mass) - n * math.log(2.0) - phi.log_evaluate(n ** 3 * yn))
            for n, yn in enumerate(y, start=1)]


def quotient(space, algebra, u, region):
    """(space, weight, region): blocks of `algebra` inside `region` as
    non-atomic cells with their masses, weight = block means of u."""
    E = ConditionalExpectation(space, algebra)
    inside = {c.id for c in space.region_cells(region)}
    means = E.block_means(u.as_array(space))
    masses, weight = {}, {}
    for b, name in enumerate(E.block_names):
        cells = set(E.block_cells(b))
        if not cells & inside:
            continue
        if E.block_atomic[b] or not cells <= inside:
            raise PremiseViolation("witness region must be a union of non-atomic blocks", {"block": name})
        masses[name] = float(E.block_masses[b])
        weight[name] = float(means[b])
    return MeasureSpace.from_masses(nonatomic=masses), SimpleFunction(weight), list(masses)


def build_witness(phi, psi, space, F_region, N, u=None, algebra=None, check_dominance=True):
    """Construct y_n, b_n and carve F_n inside F_region for n = 1..N.

    With `u` the construction moves to the quotient by `algebra` (finest when
    omitted) and F_n only uses blocks where E(u) >= 1/n.
    """
    if check_dominance:
        dom = dominance(phi, psi, "at_infinity")
        if dom.holds:
            raise PremiseViolation("psi is dominated by phi at infinity on the grid",
                                   {"a": dom.a, "x0": dom.x0})
    region_cells = space.region_cells(F_region)
    if not region_cells or any(c.atomic for c in region_cells):
        raise PremiseViolation("witness region must be non-empty and non-atomic")
    weight = None
    if u is not None:
        algebra = SubSigmaAlgebra.finest(space) if algebra is None else algebra
        space, weight, F_region = quotient(space, algebra, u, F_region)
        region_cells = space.region_cells(F_region)
    F_mass = math.fsum(c.mass for c in region_cells)
    ys = []
    prev = 1.0
    for n in range(1, N + 1):
        yn = find_y(psi, phi, n, prev)
        ys.append(yn)
        prev = yn
    masses = witness_masses(phi, ys, F_mass)
    def first_level(c):
        # first n with E(u) >= 1/n on this cell
        v = weight.value_at(c.id)
        return math.ceil(1.0 / v - LEVEL_SLACK) if v > 0 else math.inf
    levels = None if weight is None else first_level
    depth = EXTRA_DEPTH + math.ceil(-math.log2(min(masses) / F_mass)) if masses else 60
    new_space, sets = carve_subsets(space, F_region, masses, max_depth=max(60, depth), levels=levels)
    b = tuple(n * n * yn for n, yn in enumerate(ys, start=1))
    return WitnessSequence(phi, psi, tuple(ys), b, tuple(masses), tuple(sets), F_mass,
                           new_space, tuple(F_region), N, weight)


def witness_operator(ws):
    """Multiplication by the weight (u = 1 without one), finest algebra on the refined space."""
    sp = ws.space
    w = SimpleFunction.constant(1.0) if ws.weight is None else ws.weight
    return MCEOperator(w, ConditionalExpectation(sp, SubSigmaAlgebra.finest(sp)), ws.phi, ws.psi)


def check_witness(ws, tol=1e-9):
    """Defining inequalities, monotone y, carved masses and disjointness."""
    ineq = all(exceeds(ws.psi, ws.phi, y, n) for n, y in enumerate(ws.y, start=1))
    mono = all(a <= b for a, b in zip(ws.y, ws.y[1:]))
    carved = [ws.space.mass_of(s) for s in ws.F_sets]
    rel = max((abs(c - t) / t for c, t in zip(carved, ws.F_masses)), default=0.0)
    union = set()
    disjoint = True
    for s in ws.F_sets:
        disjoint = disjoint and not (union & s)
        union |= s
    total_ok = math.fsum(ws.F_masses) <= ws.F_mass * (1 + tol)
    ok = ineq and mono and rel <= tol and disjoint and total_ok
    return CheckReport("witness_construction", ok, rel, ws.N, tol,
                       {"inequalities": ineq, "monotone": mono, "disjoint": disjoint,
                        "mass_sum_ok": total_ok})


def _term_sums(fn, coeffs, masses):
    """Partial sums of fn(c_n) * m_n, compensated, for every n."""
    terms = [fn.evaluate(c) * m for c, m in zip(coeffs, masses)]
    out, acc = [], []
    for t in terms:
        acc.append(t)
        out.append(math.fsum(acc))
    return terms, out


def certify_divergence(ws, op=None, alpha=1.0, tol=1e-9):
    """`op` defaults to the weight operator of the sequence.

    (a) I_phi(alpha f): terms past n0 = floor(alpha) + 1 under the geometric
    bound mu(F) phi(y_1) 2^-n; (b) I_psi(alpha E(u f)): partial sums above
    mu(F) phi(y_1) sum_{m0..N} 1/n, m0 = floor(1/alpha) + 1, and S_N / S_{N/2}
    above 1 + delta."""
    op = witness_operator(ws) if op is None else op
    if ws.N == 0:
        return CheckReport("witness_divergence", True, 0.0, 0, tol,
                           {"phi_partial_sums": [], "psi_partial_sums": []})
    sp = op.space
    eu = op.E.apply_array(op.u_array())
    pos = {cid: i for i, cid in enumerate(sp.ids)}
    for n, s in enumerate(ws.F_sets, start=1):
        low = min(eu[pos[c]] for c in s)
        if low * n < 1.0 - tol:
            raise PremiseViolation(f"E(u) < 1/n on F_{n}", {"n": n, "min_Eu": float(low)})
    # with the finest algebra on the quotient, E(u f) = E(u) b_n on F_n
    g = alpha * op.apply_array(ws.f)
    carved = [sp.mass_of(s) for s in ws.F_sets]
    phi_terms, phi_sums = _term_sums(ws.phi, [alpha * b for b in ws.b], carved)
    psi_terms = []
    for s in ws.F_sets:
        idx = [pos[c] for c in s]
        psi_terms.append(math.fsum((ws.psi.evaluate_many(g[idx]) * sp.masses[idx]).tolist()))
    psi_sums = [math.fsum(psi_terms[:k]) for k in range(1, len(psi_terms) + 1)]
    scale = ws.F_mass * ws.phi.evaluate(ws.y[0])
    n0 = math.floor(alpha) + 1
    geo_ok = all(t <= scale * 2.0 ** -n * (1 + tol)
                 for n, t in enumerate(phi_terms, start=1) if n > n0)
    m0 = math.floor(1.0 / alpha) + 1
    harmonic = math.fsum(1.0 / n for n in range(m0, ws.N + 1))
    lower = scale * harmonic
    lower_ok = psi_sums[-1] >= lower * (1 - tol)
    half = ws.N // 2
    ratio = psi_sums[-1] / psi_sums[half - 1] if half >= 1 and psi_sums[half - 1] > 0 else math.inf
    growth_ok = ratio > 1.0 + TREND_DELTA
    tail_bound = scale * 2.0 ** -half if half >= n0 else math.inf
    tail = phi_sums[-1] - phi_sums[half - 1] if half >= 1 else phi_sums[-1]
    ok = geo_ok and lower_ok and growth_ok and tail <= tail_bound * (1 + tol)
    return CheckReport("witness_divergence", ok, 0.0 if ok else 1.0, ws.N, tol,
                       {"alpha": alpha, "n0": n0, "m0": m0, "geometric_ok": geo_ok,
                        "harmonic_lower_bound": lower, "lower_bound_ok": lower_ok,
                        "psi_ratio": ratio, "growth_ok": growth_ok,
                        "phi_tail": tail, "phi_tail_bound": tail_bound,
                        "phi_partial_sums": phi_sums, "psi_partial_sums": psi_sums,
                        "modular_phi": modular(ws.phi, alpha * ws.f.as_array(sp), sp)})


def restriction_witness(phi, psi, space, E_region, N):
    """f in L^phi whose restriction to E_region is not in L^psi.

    Returns (f, space, phi_verdict, psi_verdict); the verdicts come from
    membership trends at N, 2N, 4N.
    """
    cache = {}

    def family(n):
        if n not in cache:
            ws = build_witness(phi, psi, space, E_region, n)
            cache[n] = (ws.f.as_array(ws.space), ws.space)
        return cache[n]

    phi_v = membership_trend(phi, family, N)
    psi_v = membership_trend(psi, family, N)
    ws = build_witness(phi, psi, space, E_region, N)
    return ws.f, ws.space, phi_v, psi_v


def dump(ws, report):
    """Plot-ready JSON payload."""
    return {"y": list(ws.y), "F_masses": list(ws.F_masses),
            "partial_sums": {"phi": report.details["phi_partial_sums"],
                             "psi": report.details["psi_partial_sums"]}}
