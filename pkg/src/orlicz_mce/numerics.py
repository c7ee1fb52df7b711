"""Scalar search routines shared by the Young-function and norm code."""

import math

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
INV_GOLDEN_SQ = (3.0 - math.sqrt(5.0)) / 2.0

GSS_ABS_TOL = 1e-12
GSS_REL_TOL = 1e-10
GSS_MAX_ITER = 200
# x beyond this is treated as "objective unbounded"
SEARCH_HORIZON = 2.0 ** 60
# used when the objective is known to be bounded
FAR_HORIZON = 2.0 ** 1023


class Unbounded(Exception):
    """Raised when a maximization keeps improving up to the search horizon."""


def golden_section_max(g, a, b, abs_tol=GSS_ABS_TOL, rel_tol=GSS_REL_TOL, max_iter=GSS_MAX_ITER):
    """Maximize a unimodal function on [a, b].

    Returns (x_best, g_best) over every point evaluated, so the value is never
    worse than the endpoints' interior probes.
    """
    h = b - a
    c = a + INV_GOLDEN_SQ * h
    d = a + INV_GOLDEN * h
    gc, gd = g(c), g(d)
    best_x, best_g = (c, gc) if gc >= gd else (d, gd)
    for _ in range(max_iter):
        if (b - a) <= abs_tol + rel_tol * abs(best_x):
            break
        if gc >= gd:
            b, d, gd = d, c, gc
            h = b - a
            c = a + INV_GOLDEN_SQ * h
            gc = g(c)
            if gc > best_g:
                best_x, best_g = c, gc
        else:
            a, c, gc = c, d, gd
            h = b - a
            d = a + INV_GOLDEN * h
            gd = g(d)
            if gd > best_g:
                best_x, best_g = d, gd
    return best_x, best_g


def maximize_concave(g, upper=math.inf, start=1.0, horizon=SEARCH_HORIZON):
    """Maximize a concave g on [0, upper] with geometric bracket expansion.

    The bracket grows by a factor 2 until g stops increasing; if it is still
    increasing at `horizon` the objective is declared unbounded.
    """
    g0 = g(0.0)
    x = min(start, upper)
    gx = g(x)
    if gx <= g0:
        # maximum sits in [0, x]
        bx, bg = golden_section_max(g, 0.0, x)
        return (0.0, g0) if g0 >= bg else (bx, bg)
    lo = 0.0
    while True:
        nxt = min(2.0 * x, upper)
        if nxt == x:
            # hit the domain cap while still increasing
            bx, bg = golden_section_max(g, lo, x)
            return (x, gx) if gx >= bg else (bx, bg)
        gn = g(nxt)
        if gn <= gx:
            bx, bg = golden_section_max(g, lo, nxt)
            return (x, gx) if gx >= bg else (bx, bg)
        if nxt >= horizon:
            raise Unbounded(nxt)
        lo, x, gx = x, nxt, gn


def bisect_threshold(pred, lo, hi, max_iter=2000):
    """Locate the switch point of a monotone predicate false on lo, true on hi.

    Iterates until lo and hi are adjacent floats (or max_iter) and returns
    (lo, hi).
    """
    for _ in range(max_iter):
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def log_grid(lo, hi, n):
    """n points geometrically spaced on [lo, hi]."""
    if n == 1:
        return [lo]
    r = math.log(hi / lo) / (n - 1)
    return [lo * math.exp(r * i) for i in range(n)]
