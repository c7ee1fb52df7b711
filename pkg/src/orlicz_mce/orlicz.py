"""Modular, Luxemburg norm and membership verdicts for truncated families."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NormUnbounded
from .measure import SimpleFunction
from .young import TREND_DELTA

NORM_REL_TOL = 1e-10
NORM_MAX_ITER = 200
BRACKET_SHIFT = 2.0 ** -60
EXPANSION_LIMIT = 2000  # doublings before giving up on a bracket end

MEMBERSHIP_K_GRID = (1e-3, 1e-2, 0.1, 1.0, 10.0)
FLAT_ABS = 1e-9
FLAT_RATIO = 0.6
GROWING_RATIO = 0.9


def _values(f, space):
    if isinstance(f, SimpleFunction):
        return f.as_array(space)
    return np.asarray(f, dtype=float)


def modular(phi, f, space):
    """Integral of phi(f); saturates to inf."""
    v = phi.evaluate_many(np.abs(_values(f, space)))
    if np.any(np.isinf(v)):
        return math.inf
    with np.errstate(over="ignore"):
        terms = v * space.masses
    if np.any(np.isinf(terms)):
        return math.inf
    return math.fsum(terms.tolist())


@dataclass(frozen=True)
class LuxemburgNorm:
    """`value` is the upper end of the final bracket, so modular(f/value) <= 1
    holds by construction; modular(f/bracket[0]) > 1."""

    value: float
    iterations: int
    bracket: tuple

    def __float__(self):
        return self.value


def luxemburg_norm(phi, f, space, rel_tol=NORM_REL_TOL, max_iter=NORM_MAX_ITER):
    v = np.abs(_values(f, space))
    top = float(v.max()) if v.size else 0.0
    if top == 0.0:
        return LuxemburgNorm(0.0, 0, (0.0, 0.0))
    if not math.isfinite(top):
        return LuxemburgNorm(math.inf, 0, (math.inf, math.inf))

    def small_enough(k):
        return modular(phi, v / k, space) <= 1.0

    hi = top * (1.0 + space.total_mass)
    steps = 0
    while not small_enough(hi):
        hi *= 2.0
        steps += 1
        if steps > EXPANSION_LIMIT or not math.isfinite(hi):
            raise NormUnbounded(f"modular stays above 1 up to k = {hi:g}")
    lo = hi * BRACKET_SHIFT
    while small_enough(lo):
        hi = lo
        lo *= BRACKET_SHIFT
        if lo == 0.0:
            return LuxemburgNorm(0.0, 0, (0.0, hi))
    it = 0
    while hi / lo - 1.0 > rel_tol and it < max_iter:
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if small_enough(mid):
            hi = mid
        else:
            lo = mid
        it += 1
    return LuxemburgNorm(hi, it, (lo, hi))


# ---------------------------------------------------------------------------
# trend verdicts for countable families represented by truncations


def partial_sum_trend(s1, s2, s4):
    """Classify S_N, S_2N, S_4N as 'flat', 'growing' or 'unclear'."""
    if math.isinf(s4):
        return "growing"
    d1, d2 = s2 - s1, s4 - s2
    if d2 <= FLAT_ABS * max(abs(s4), 1e-300) or (d1 > 0 and d2 <= FLAT_RATIO * d1):
        return "flat"
    if d2 >= GROWING_RATIO * d1 and s4 > (1.0 + TREND_DELTA) * s2:
        return "growing"
    return "unclear"


@dataclass
class MembershipVerdict:
    verdict: str  # member | diverging | inconclusive
    truncations: tuple
    per_k: dict = field(default_factory=dict)

    def to_dict(self):
        return {"verdict": self.verdict, "truncations": list(self.truncations),
                "per_k": {repr(k): v for k, v in self.per_k.items()}}


def membership_trend(phi, family, N, k_grid=MEMBERSHIP_K_GRID):
    """Decide whether some multiple of f has a finite modular.

    `family(n)` returns (f, space) for the truncation at n atoms.  Partial
    modulars are taken at N, 2N and 4N for every k; a flat sequence for some k
    means member, growth for every k means diverging.
    """
    truncs = (N, 2 * N, 4 * N)
    mats = [family(n) for n in truncs]
    per_k = {}
    for k in k_grid:
        sums = [modular(phi, k * _values(f, sp), sp) for f, sp in mats]
        per_k[k] = {"sums": sums, "trend": partial_sum_trend(*sums)}
    trends = [d["trend"] for d in per_k.values()]
    if "flat" in trends:
        verdict = "member"
    elif all(t == "growing" for t in trends):
        verdict = "diverging"
    else:
        verdict = "inconclusive"
    return MembershipVerdict(verdict, truncs, per_k)
