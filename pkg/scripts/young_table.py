"""Table of Young-function facts: a, b, growth evidence, the x < phi^{-1} phi*^{-1} <= 2x
sandwich and the biconjugation error on a log grid."""

import math

from orlicz_mce.numerics import log_grid
from orlicz_mce.young import (Conjugate, ExpGrowth, PiecewiseLinear, Power, check_delta2,
                              check_delta_prime, check_inverse_product_sandwich, complementary)

FAMILIES = {
    "x^2/2": Power(2.0, scaled=True),
    "x^3/3": Power(3.0, scaled=True),
    "x^1.5": Power(1.5),
    "e^x-1-x": ExpGrowth(),
    "pl(1,0)(2,1)": PiecewiseLinear(((1.0, 0.0), (2.0, 1.0))),
}


def biconj_error(phi, xs):
    bic = Conjugate(Conjugate(phi))
    worst = 0.0
    for x in xs:
        a, b = phi.evaluate(x), bic.evaluate(x)
        if math.isfinite(a) and math.isfinite(b) and a > 0:
            worst = max(worst, abs(a - b) / a)
    return worst


def main():
    xs = log_grid(1e-3, 1e3, 40)
    head = f"{'family':<14}{'a':>7}{'b':>7}{'D2':>7}{'Dprime':>8}{'ratio min':>11}{'ratio max':>11}{'biconj':>10}"
    print(head)
    print("-" * len(head))
    for name, phi in FAMILIES.items():
        d2, dp = check_delta2(phi), check_delta_prime(phi)
        if phi.a_phi == 0.0:
            s = check_inverse_product_sandwich(phi, xs, conj=complementary(phi)).details
            lo, hi = f"{s['min_ratio']:.4f}", f"{s['max_ratio']:.4f}"
        else:
            lo = hi = "-"
        print(f"{name:<14}{phi.a_phi:>7.3g}{phi.b_phi:>7.3g}{str(d2.holds):>7}{str(dp.holds):>8}"
              f"{lo:>11}{hi:>11}{biconj_error(phi, xs):>10.1e}")


if __name__ == "__main__":
    main()
