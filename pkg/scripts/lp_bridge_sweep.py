"""Sweep the L^p bridge: generic criterion vs closed form on power-law
families, across the decay rate of the weight.

p < q: mu_n = 2^-n, u_n = 2^{-c n}, bounded iff c >= 1/p - 1/q.
q < p: mu_n = 1, u_n = n^{-b}, member iff b r > 1 with r = pq/(p-q).
"""

import argparse

import numpy as np

from orlicz_mce import specs
from orlicz_mce.mce import lp_bridge_check


def request(mass, u, p, q, N):
    return {"space": {"parametric": {"mass_formula": mass, "N": N}},
            "operator": {"u": {"formula": u}},
            "source": {"family": "power", "p": p, "scaled": True},
            "target": {"family": "power", "p": q, "scaled": True}}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=4.0)
    ap.add_argument("--N", type=int, default=16)
    ap.add_argument("--points", type=int, default=9)
    args = ap.parse_args()
    p, q = args.p, args.q
    if p < q:
        thr = 1.0 / p - 1.0 / q
        rates = np.linspace(0.0, 2.0 * thr, args.points).tolist()
        cases = [(c, request("2^-n", f"2^(-{c!r}*n)", p, q, args.N), c >= thr) for c in rates]
        print(f"p={p:g} < q={q:g}: threshold c = {thr:.4f}")
    else:
        r = p * q / (p - q)
        rates = np.linspace(0.0, 2.0 / r, args.points).tolist()
        cases = [(b, request("1", f"n^(-{b!r})", p, q, args.N), b * r > 1.0) for b in rates]
        print(f"q={q:g} < p={p:g}: r = {r:.4f}, threshold b = {1.0 / r:.4f}")
    print(f"{'rate':>8}  {'analytic':>9}  {'generic':>12}  {'closed':>12}  {'rel err':>9}")
    for rate, req, bounded in cases:
        rep = lp_bridge_check(specs.operator(req), p, q)
        qd = rep.quantities
        print(f"{rate:8.4f}  {'bounded' if bounded else 'unbounded':>9}  {qd['generic_verdict']:>12}  "
              f"{qd['closed_verdict']:>12}  {qd['max_rel_term_error']:9.1e}")


if __name__ == "__main__":
    main()
