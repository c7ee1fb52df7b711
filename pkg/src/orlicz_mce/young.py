"""Young functions and their single-function calculus.

A Young function is convex, even, vanishes at 0 and may jump to +inf past
``b_phi``.  Values are plain floats; ``math.inf`` is the extended value and
IEEE arithmetic gives the saturating behaviour (finite + inf == inf) that the
modular needs.

Families
--------
``Power``            c|x|^p (``scaled`` picks c = 1/p, otherwise c = 1)
``ExpGrowth``        e^|x| - |x| - 1
``PiecewiseLinear``  convex interpolant through points, optional cutoff
``Composed``         outer(inner^{-1}(|x|))
``Chain``            outer(inner(|x|))
``Conjugate``        numerically maximized sup_x {x|y| - Phi(x)}
"""

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

import numpy as np

from .errors import DegenerateError, PremiseViolation
from .numerics import FAR_HORIZON, SEARCH_HORIZON, Unbounded, bisect_threshold, log_grid, maximize_concave
from .report import CheckReport

INF = math.inf
TREND_DELTA = 0.05


class YoungFunction:
    """Base class. Subclasses implement `evaluate` and usually override the
    numerically-derived attributes with exact ones."""

    family = "abstract"

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        raise NotImplementedError

    def evaluate_many(self, xs):
        xs = np.abs(np.asarray(xs, dtype=float))
        out = np.fromiter((self.evaluate(v) for v in xs.ravel()), dtype=float, count=xs.size)
        return out.reshape(xs.shape)

    def log_evaluate(self, x):
        v = self.evaluate(x)
        if v == 0.0:
            return -INF
        return math.log(v)

    def inverse(self, y):
        return _bisect_inverse(self, y)

    @cached_property
    def a_phi(self):
        return _bisect_inverse(self, 0.0, use_a=False)

    @cached_property
    def b_phi(self):
        x = 1.0
        while math.isfinite(self.evaluate(x)):
            if x >= SEARCH_HORIZON:
                return INF
            x *= 2.0
        lo, _ = bisect_threshold(lambda t: not math.isfinite(self.evaluate(t)), 0.5 * x if x > 1.0 else 0.0, x)
        return lo

    # right derivative at 0 and asymptotic slope; None when not known exactly
    slope_at_zero = None
    slope_at_infinity = None

    def exact(self, x):
        """Exact rational value at a rational point, or None if unavailable."""
        return None

    def to_spec(self):
        raise NotImplementedError


def _bisect_inverse(phi, y, use_a=True):
    # inf{x >= 0 : phi(x) > y}; returns the largest float with phi(x) <= y
    if not y >= 0.0:
        raise ValueError(f"generalized inverse needs y >= 0, got {y!r}")
    if y == INF:
        return phi.b_phi
    if y == 0.0 and use_a:
        return phi.a_phi
    b = phi.b_phi if use_a else INF
    hi = min(1.0, b)
    while phi.evaluate(hi) <= y:
        if hi >= b or hi == INF:
            return hi
        hi = min(2.0 * hi, b)
    lo = 0.5 * hi
    while lo > 0.0 and phi.evaluate(lo) > y:
        hi, lo = lo, 0.5 * lo
    lo, _ = bisect_threshold(lambda t: phi.evaluate(t) > y, lo, hi)
    return lo


@dataclass(frozen=True)
class Power(YoungFunction):
    p: float
    scaled: bool = False
    coef: float = None

    family = "power"

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1.0):
            raise ValueError(f"power family needs finite p >= 1, got {self.p!r}")
        if self.coef is not None and not (math.isfinite(self.coef) and self.coef > 0):
            raise ValueError(f"coef must be positive, got {self.coef!r}")

    @property
    def c(self):
        if self.coef is not None:
            return self.coef
        return 1.0 / self.p if self.scaled else 1.0

    def evaluate(self, x):
        ax = abs(x)
        if ax == 0.0:
            return 0.0
        try:
            return self.c * ax ** self.p
        except OverflowError:
            return INF

    def evaluate_many(self, xs):
        with np.errstate(over="ignore"):
            return self.c * np.abs(np.asarray(xs, dtype=float)) ** self.p

    def log_evaluate(self, x):
        ax = abs(x)
        if ax == 0.0:
            return -INF
        return math.log(self.c) + self.p * math.log(ax)

    def inverse(self, y):
        if not y >= 0.0:
            raise ValueError(f"generalized inverse needs y >= 0, got {y!r}")
        if y == INF:
            return INF
        return (y / self.c) ** (1.0 / self.p)

    a_phi = 0.0
    b_phi = INF

    @property
    def slope_at_zero(self):
        return 0.0 if self.p > 1.0 else self.c

    @property
    def slope_at_infinity(self):
        return INF if self.p > 1.0 else self.c

    def exact(self, x):
        if self.p != int(self.p):
            return None
        if self.coef is None:
            c = Fraction(1, int(self.p)) if self.scaled else Fraction(1)
        else:
            c = Fraction(self.coef)
        return c * abs(Fraction(x)) ** int(self.p)

    def conjugate_exponent(self):
        return self.p / (self.p - 1.0)

    def closed_conjugate(self):
        """c x^p  ->  c* y^p' with c* = (p-1) p^{-p'} c^{-1/(p-1)}."""
        if self.p == 1.0:
            raise DegenerateError("conjugate of a linear Young function is 0 / inf valued")
        q = self.conjugate_exponent()
        if self.coef is None and self.scaled:
            return Power(q, scaled=True)
        cstar = (self.p - 1.0) * self.p ** (-q) * self.c ** (-1.0 / (self.p - 1.0))
        return Power(q, coef=cstar)

    def to_spec(self):
        spec = {"family": "power", "p": self.p, "scaled": self.scaled}
        if self.coef is not None:
            spec["coef"] = self.coef
        return spec


@dataclass(frozen=True)
class ExpGrowth(YoungFunction):
    family = "exp_growth"

    def evaluate(self, x):
        ax = abs(x)
        if ax < 1e-2:
            # series; expm1(x) - x cancels badly near 0
            t = ax
            s, k, term = 0.0, 2, ax * ax / 2.0
            while term > 1e-18 * max(s, 1e-300) and k < 30:
                s += term
                k += 1
                term *= t / k
            return s
        if ax > 709.0:
            return INF
        return math.expm1(ax) - ax

    def evaluate_many(self, xs):
        return np.fromiter((self.evaluate(v) for v in np.ravel(xs)), dtype=float).reshape(np.shape(xs))

    def log_evaluate(self, x):
        ax = abs(x)
        if ax == 0.0:
            return -INF
        if ax > 30.0:
            return ax + math.log1p(-(1.0 + ax) * math.exp(-ax))
        return math.log(self.evaluate(ax))

    a_phi = 0.0
    b_phi = INF
    slope_at_zero = 0.0
    slope_at_infinity = INF

    def to_spec(self):
        return {"family": "exp_growth"}


@dataclass(frozen=True)
class PiecewiseLinear(YoungFunction):
    """Convex piecewise-linear Young function, extended linearly past the last
    point, or set to +inf past `cutoff` when one is given."""

    points: tuple
    cutoff: float = None

    family = "piecewise_linear"

    def __post_init__(self):
        pts = sorted((float(x), float(y)) for x, y in self.points)
        if not pts or pts[0][0] > 0.0:
            pts.insert(0, (0.0, 0.0))
        if pts[0] != (0.0, 0.0):
            raise ValueError("piecewise_linear must pass through (0, 0)")
        if len(pts) < 2:
            raise ValueError("piecewise_linear needs at least one point besides the origin")
        xs = [x for x, _ in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("piecewise_linear x-coordinates must be distinct")
        if any(y < 0.0 or not math.isfinite(y) for _, y in pts):
            raise ValueError("piecewise_linear values must be finite and >= 0")
        slopes = [(y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(pts, pts[1:])]
        for s0, s1 in zip(slopes, slopes[1:]):
            if s1 < s0 - 1e-12 * max(1.0, abs(s0)):
                raise ValueError("piecewise_linear points are not convex")
        if slopes[0] < 0.0:
            raise ValueError("piecewise_linear must be nondecreasing")
        if self.cutoff is not None and not self.cutoff > 0.0:
            raise ValueError("cutoff must be positive")
        if slopes[-1] == 0.0 and self.cutoff is None:
            raise ValueError("piecewise_linear is identically zero")
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "_xs", tuple(xs))
        object.__setattr__(self, "_slopes", tuple(slopes))

    def evaluate(self, x):
        ax = abs(x)
        if self.cutoff is not None and ax > self.cutoff:
            return INF
        xs, pts = self._xs, self.points
        if ax >= xs[-1]:
            return pts[-1][1] + self._slopes[-1] * (ax - xs[-1])
        i = bisect_right(xs, ax) - 1
        return pts[i][1] + self._slopes[i] * (ax - xs[i])

    def evaluate_many(self, xs):
        ax = np.abs(np.asarray(xs, dtype=float))
        px = np.array(self._xs)
        py = np.array([y for _, y in self.points])
        out = np.interp(ax, px, py)
        tail = ax > px[-1]
        out[tail] = py[-1] + self._slopes[-1] * (ax[tail] - px[-1])
        if self.cutoff is not None:
            out[ax > self.cutoff] = INF
        return out

    @property
    def a_phi(self):
        return max(x for x, y in self.points if y == 0.0)

    @property
    def b_phi(self):
        return INF if self.cutoff is None else self.cutoff

    @property
    def slope_at_zero(self):
        return self._slopes[0]

    @property
    def slope_at_infinity(self):
        return INF if self.cutoff is not None else self._slopes[-1]

    def to_spec(self):
        spec = {"family": "piecewise_linear", "points": [list(p) for p in self.points]}
        if self.cutoff is not None:
            spec["cutoff"] = self.cutoff
        return spec


@dataclass(frozen=True)
class Composed(YoungFunction):
    """x -> outer(inner^{-1}(|x|)); used for Psi o Phi^{-1} and Psi* o Phi*^{-1}.

    Convexity is not automatic; run `validate` before relying on it.
    """

    outer: YoungFunction
    inner: YoungFunction

    family = "composed"

    def evaluate(self, x):
        t = self.inner.inverse(abs(x))
        return self.outer.evaluate(t)

    @cached_property
    def a_phi(self):
        return self.inner.evaluate(self.outer.a_phi)

    @cached_property
    def b_phi(self):
        if math.isinf(self.outer.b_phi):
            return INF
        return self.inner.evaluate(self.outer.b_phi)

    def to_spec(self):
        return {"family": "composed", "outer": self.outer.to_spec(), "inner_inverse": self.inner.to_spec()}


@dataclass(frozen=True)
class Chain(YoungFunction):
    """x -> outer(inner(|x|)); convex when outer is convex nondecreasing."""

    outer: YoungFunction
    inner: YoungFunction

    family = "chain"

    def evaluate(self, x):
        return self.outer.evaluate(self.inner.evaluate(abs(x)))

    def to_spec(self):
        return {"family": "chain", "outer": self.outer.to_spec(), "inner": self.inner.to_spec()}


@dataclass(frozen=True)
class Conjugate(YoungFunction):
    """Complementary function computed by golden-section maximization."""

    base: YoungFunction

    family = "complementary"

    def evaluate(self, y):
        ay = abs(y)
        if ay == 0.0:
            return 0.0
        base = self.base
        s_inf = base.slope_at_infinity
        if s_inf is not None and ay > s_inf:
            return INF
        s0 = base.slope_at_zero
        if s0 is not None and ay <= s0:
            return 0.0

        def g(x):
            v = base.evaluate(x)
            return -INF if v == INF else x * ay - v

        # strictly below the slope at infinity the sup is finite, however far out
        horizon = FAR_HORIZON if s_inf is not None and ay < s_inf else SEARCH_HORIZON
        try:
            _, val = maximize_concave(g, upper=base.b_phi, horizon=horizon)
        except Unbounded:
            return INF
        return max(val, 0.0)

    @cached_property
    def a_phi(self):
        s0 = self.base.slope_at_zero
        return s0 if s0 is not None else YoungFunction.a_phi.func(self)

    @cached_property
    def b_phi(self):
        s = self.base.slope_at_infinity
        return s if s is not None else YoungFunction.b_phi.func(self)

    @property
    def slope_at_zero(self):
        return self.base.a_phi

    @property
    def slope_at_infinity(self):
        return self.base.b_phi

    def to_spec(self):
        return {"family": "complementary", "of": self.base.to_spec()}


# ---------------------------------------------------------------------------
# construction from JSON-style specs


def from_spec(spec):
    fam = spec["family"]
    if fam == "power":
        return Power(float(spec["p"]), bool(spec.get("scaled", False)), spec.get("coef"))
    if fam == "exp_growth":
        return ExpGrowth()
    if fam == "piecewise_linear":
        return PiecewiseLinear(tuple(tuple(p) for p in spec["points"]), spec.get("cutoff"))
    if fam == "composed":
        return Composed(from_spec(spec["outer"]), from_spec(spec["inner_inverse"]))
    if fam == "chain":
        return Chain(from_spec(spec["outer"]), from_spec(spec["inner"]))
    if fam == "complementary":
        return Conjugate(from_spec(spec["of"]))
    raise ValueError(f"unknown Young family {fam!r}")


# ---------------------------------------------------------------------------
# calculus


def evaluate(phi, x):
    return phi.evaluate(x)


def generalized_inverse(phi, y):
    """inf{x >= 0 : phi(x) > y}. Returns b_phi when phi never exceeds y."""
    return phi.inverse(y)


def complementary(phi):
    """Closed form for powers with p > 1, numeric maximization otherwise."""
    if isinstance(phi, Power) and phi.p > 1.0:
        return phi.closed_conjugate()
    return Conjugate(phi)


def numeric_conjugate(phi):
    return Conjugate(phi)


def validate(phi, xs=None, tol=1e-9, nfunction=False):
    """Spot-check the Young-function axioms on a sample grid.

    Checks phi(0) = 0, evenness, monotonicity on [0, b), strict increase on
    [a, b) and midpoint/quarter-point convexity over all sample pairs.
    """
    if xs is None:
        xs = [0.0] + log_grid(1e-3, 1e3, 40)
    xs = sorted(set(abs(x) for x in xs))
    b = phi.b_phi
    a = phi.a_phi
    vals = [phi.evaluate(x) for x in xs]
    problems = []
    worst = 0.0
    if phi.evaluate(0.0) != 0.0:
        problems.append(("phi(0) != 0", 0.0))
    for x, v in zip(xs, vals):
        if phi.evaluate(-x) != v:
            problems.append(("not even", x))
    for (x0, v0), (x1, v1) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
        if x1 > b:
            break
        if v1 < v0 - tol * max(1.0, abs(v0)):
            problems.append(("decreasing", x1))
        if x0 >= a and x1 < b and math.isfinite(v1) and v0 > 0.0 and not v1 > v0:
            problems.append(("not strictly increasing", x1))
    finite = [(x, v) for x, v in zip(xs, vals) if math.isfinite(v)]
    for (x, vx), (y, vy) in product(finite, finite):
        if y <= x:
            continue
        for lam in (0.25, 0.5, 0.75):
            m = lam * x + (1 - lam) * y
            lhs = phi.evaluate(m)
            rhs = lam * vx + (1 - lam) * vy
            excess = lhs - rhs
            if excess > tol * max(1.0, abs(rhs)):
                problems.append(("not convex", (x, y, lam)))
                worst = max(worst, excess)
    if nfunction:
        lo, hi = 1e-8, 1e12
        if a != 0.0 or b != INF:
            problems.append(("N-function needs a=0, b=inf", (a, b)))
        elif not (phi.evaluate(lo) / lo < 1e-2 and phi.evaluate(hi) / hi > 1e2):
            problems.append(("N-function endpoint ratios", (lo, hi)))
    return CheckReport("young_validate", not problems, worst, len(xs), tol, {"problems": problems[:20]})


def check_young_inequality(phi, xs, ys=None, tol=1e-9, conj=None):
    """x y <= phi(x) + phi*(y) over the sample grid."""
    conj = complementary(phi) if conj is None else conj
    ys = xs if ys is None else ys
    px = {x: phi.evaluate(x) for x in xs}
    py = {y: conj.evaluate(y) for y in ys}
    worst, worst_pt, bad = -INF, None, 0
    for x, y in product(xs, ys):
        excess = x * y - px[x] - py[y]
        rel = excess / max(1.0, x * y)
        if rel > worst:
            worst, worst_pt = rel, (x, y)
        if rel > tol:
            bad += 1
    return CheckReport("young_inequality", bad == 0, worst, len(xs) * len(ys), tol,
                       {"violations": bad, "worst_point": worst_pt})


def check_inverse_product_sandwich(phi, xs, tol=1e-9, conj=None):
    """x < phi^{-1}(x) phi*^{-1}(x) <= 2x, lower bound non-strict, x = 0 exempt."""
    conj = complementary(phi) if conj is None else conj
    worst, worst_pt, bad = -INF, None, 0
    lo_ratio, hi_ratio = INF, -INF
    for x in xs:
        prod_ = phi.inverse(x) * conj.inverse(x)
        if x == 0.0:
            excess = abs(prod_)
        else:
            scale = max(1.0, x)
            excess = max((x - prod_) / scale, (prod_ - 2.0 * x) / scale)
            lo_ratio = min(lo_ratio, prod_ / x)
            hi_ratio = max(hi_ratio, prod_ / x)
        if excess > worst:
            worst, worst_pt = excess, x
        if excess > tol:
            bad += 1
    return CheckReport("inverse_product_sandwich", bad == 0, worst, len(xs), tol,
                       {"violations": bad, "worst_point": worst_pt,
                        "min_ratio": lo_ratio, "max_ratio": hi_ratio})


@dataclass
class GrowthEvidence:
    """Sampled evidence for a growth condition; never a proof.

    `constant` is the max sampled ratio (K, c or b); `growing` flags a tail
    trend that suggests no finite constant exists; `violation` flags an
    infinite value inside the grid.
    """

    condition: str
    constant: float
    growing: bool
    violation: bool
    grid: tuple
    details: dict = field(default_factory=dict)

    @property
    def holds(self):
        return not (self.growing or self.violation) and math.isfinite(self.constant)


def _growth_grid(phi, x0, horizon, n):
    start = max(x0, phi.a_phi + 1e-3)
    if not start < horizon:
        raise ValueError("need max(x0, a_phi + eps) < horizon")
    return log_grid(start, horizon, n)


def check_delta2(phi, x0=0.0, horizon=1e3, n=200):
    """K-hat = max phi(2x)/phi(x) over a log grid on [max(x0, a+eps), horizon]."""
    xs = _growth_grid(phi, x0, horizon, n)
    logs, violation = [], False
    for x in xs:
        lx = phi.log_evaluate(x)
        if lx == -INF:
            continue
        if math.isinf(phi.evaluate(2 * x)) and 2 * x > phi.b_phi:
            violation = True
            logs.append((x, INF))
            continue
        logs.append((x, phi.log_evaluate(2 * x) - lx))
    if not logs:
        raise DegenerateError("phi vanishes on the whole Delta2 range")
    log_k = max(v for _, v in logs)
    half = [v for x, v in logs if x <= 0.5 * horizon]
    growing = bool(half) and logs[-1][1] - half[-1] > math.log1p(TREND_DELTA)
    return GrowthEvidence("delta2", _safe_exp(log_k), growing, violation, (xs[0], horizon, n),
                          {"tail_ratio": _safe_exp(logs[-1][1])})


def _pair_logs(phi, xs):
    out = {}
    lphi = {x: phi.log_evaluate(x) for x in xs}
    violation = False
    for x, y in product(xs, xs):
        if lphi[x] == -INF or lphi[y] == -INF:
            continue
        if x * y > phi.b_phi:
            violation = True
            out[(x, y)] = INF
            continue
        out[(x, y)] = phi.log_evaluate(x * y) - lphi[x] - lphi[y]
    return out, violation


def check_delta_prime(phi, x0=0.0, horizon=1e3, n=40):
    """c-hat = max phi(xy) / (phi(x) phi(y)) over grid pairs x, y >= x0."""
    xs = _growth_grid(phi, x0, horizon, n)
    logs, violation = _pair_logs(phi, xs)
    if not logs:
        raise DegenerateError("phi vanishes on the whole Delta' range")
    log_c = max(logs.values())
    half = [v for (x, y), v in logs.items() if x <= 0.5 * horizon and y <= 0.5 * horizon]
    growing = bool(half) and log_c - max(half) > math.log1p(TREND_DELTA)
    return GrowthEvidence("delta_prime", _safe_exp(log_c), growing, violation, (xs[0], horizon, n),
                          {"min_ratio": _safe_exp(min(logs.values()))})


def check_nabla_prime(phi, x0=0.0, horizon=1e3, n=40):
    """b-hat = max phi^{-1}(phi(x) phi(y)) / (xy), the smallest b making
    phi(bxy) >= phi(x) phi(y) on the grid; also reports min phi(xy)/(phi(x)phi(y))."""
    xs = _growth_grid(phi, x0, horizon, n)
    logs, _ = _pair_logs(phi, xs)
    if not logs:
        raise DegenerateError("phi vanishes on the whole nabla' range")
    bs = {}
    for x, y in product(xs, xs):
        v = phi.evaluate(x) * phi.evaluate(y)
        if v == 0.0:
            continue
        bs[(x, y)] = phi.inverse(v) / (x * y)
    b_hat = max(bs.values())
    half = [v for (x, y), v in bs.items() if x <= 0.5 * horizon and y <= 0.5 * horizon]
    growing = bool(half) and b_hat > (1 + TREND_DELTA) * max(half)
    return GrowthEvidence("nabla_prime", b_hat, growing, not math.isfinite(b_hat), (xs[0], horizon, n),
                          {"min_ratio": _safe_exp(min(logs.values()))})


def _safe_exp(v):
    try:
        return math.exp(v)
    except OverflowError:
        return INF


@dataclass
class DominanceVerdict:
    """`holds` with witness (a, x0), or counterevidence x_star at scale a_max."""

    holds: bool
    a: float
    x0: float
    x_star: float
    is_global: bool
    a_max: float
    grid: tuple

    @property
    def relation(self):
        return "holds_with_witness" if self.holds else "counterevidence"


DOMINANCE_SCALES = tuple(2.0 ** k for k in range(0, 21))
DOMINANCE_GRID = (1e-3, 1e15, 400)


def dominance(phi, psi, mode="at_infinity", scales=DOMINANCE_SCALES, grid=DOMINANCE_GRID):
    """Search for psi(x) <= phi(a x) on the sampled tail (mode 'at_infinity')
    or on the whole grid (mode 'global'). Comparisons are made in log space."""
    if mode not in ("at_infinity", "global"):
        raise ValueError(f"unknown dominance mode {mode!r}")
    xs = log_grid(*grid)
    lpsi = [psi.log_evaluate(x) for x in xs]
    min_tail = len(xs) // 4
    for a in scales:
        ok = [lp <= phi.log_evaluate(a * x) + 1e-12 * abs(lp) for x, lp in zip(xs, lpsi)]
        i = len(ok)
        while i > 0 and ok[i - 1]:
            i -= 1
        tail = len(ok) - i
        if i == 0:
            return DominanceVerdict(True, a, 0.0, None, True, scales[-1], grid)
        if mode == "at_infinity" and tail >= min_tail:
            return DominanceVerdict(True, a, xs[i], None, False, scales[-1], grid)
    a_max = scales[-1]
    bad = [x for x, lp in zip(xs, lpsi) if lp > phi.log_evaluate(a_max * x) + 1e-12 * abs(lp)]
    return DominanceVerdict(False, None, None, bad[-1], False, a_max, grid)


def check_premise(phi, psi, theta, xs, tol=1e-9):
    """phi(xy) <= psi(x) + theta(y) on all grid pairs, or PremiseViolation."""
    worst, worst_pt = -INF, None
    for x, y in product(xs, xs):
        lhs = phi.evaluate(x * y)
        rhs = psi.evaluate(x) + theta.evaluate(y)
        excess = (lhs - rhs) / max(1.0, rhs) if math.isfinite(rhs) else -INF
        if lhs == INF and rhs != INF:
            excess = INF
        if excess > worst:
            worst, worst_pt = excess, (x, y)
    if worst > tol:
        raise PremiseViolation("phi(xy) <= psi(x) + theta(y) fails on the grid",
                               {"x": worst_pt[0], "y": worst_pt[1], "excess": worst})
    return worst


def check_premise_inverse_bound(phi, psi, theta, xs=None, ts=None, tol=1e-9):
    """Under phi(xy) <= psi(x) + theta(y): psi^{-1} theta^{-1} <= 2 phi^{-1}
    on the t-grid, and psi is not dominated by phi at infinity."""
    xs = log_grid(1e-2, 1e2, 25) if xs is None else xs
    ts = [0.0] + log_grid(1e-3, 1e3, 40) if ts is None else ts
    check_premise(phi, psi, theta, xs, tol)
    worst, worst_pt = -INF, None
    for t in ts:
        lhs = psi.inverse(t) * theta.inverse(t)
        rhs = 2.0 * phi.inverse(t)
        excess = (lhs - rhs) / max(1.0, rhs)
        if excess > worst:
            worst, worst_pt = excess, t
    dom = dominance(phi, psi)
    passed = worst <= tol and not dom.holds
    return CheckReport("premise_inverse_bound", passed, worst, len(ts), tol,
                       {"worst_t": worst_pt, "dominance": dom.relation, "x_star": dom.x_star})
