"""Zero / finite-rank / closed-range classification of E(u .) operators.

Two modes, differing in the premise and in which block function decides the
support set:

* ``weight``: psi(xy) <= phi(x) + theta(y), u in L^theta; support of E(phi*(|u|));
* ``reciprocal``: phi(xy) <= psi(x) + theta(y), 1/E(u) in L^theta; support of E(|u|).

The support set is reported as atomic blocks (the atoms of the sub-sigma-algebra).
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateError, PremiseViolation
from .mce import PREMISE_GRID, MCEFamily, materializations, nonatomic_max
from .measure import support_eps
from .orlicz import luxemburg_norm, membership_trend, modular
from .report import CheckReport
from .young import check_delta2, check_premise, complementary

RANK_REL_TOL = 1e-10
TAIL_REL_TOL = 1e-9


@dataclass
class RangeReport:
    support_set_E: list
    support_atoms: list
    nonatomic_support_mass: float
    rank: object  # int, or "infinite-trend"
    classification: str  # zero | finite_rank_closed | diverging_support | nonatomic_support
    premises: list = field(default_factory=list)
    truncation: object = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _premises(op, theta, mode, grid):
    phi, psi = op.source, op.target
    notes = []
    if mode == "weight":
        check_premise(psi, phi, theta, grid)
        notes.append("psi(xy) <= phi(x) + theta(y) on grid")
    elif mode == "reciprocal":
        check_premise(phi, psi, theta, grid)
        notes.append("phi(xy) <= psi(x) + theta(y) on grid")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for name, fn in (("psi", psi), ("theta", theta)):
        ev = check_delta2(fn, 0.0, 1e3)
        if not ev.holds:
            raise PremiseViolation(f"{name} fails the Delta2 evidence check", {"K": ev.constant})
    notes.append("psi, theta in Delta2 (grid evidence)")
    return notes


def deciding_values(op, mode):
    """Block values whose support decides the classification."""
    if mode == "weight":
        conj = complementary(op.source)
        return op.E.block_means(conj.evaluate_many(op.abs_u()))
    return op.E.block_means(op.abs_u())


def _support(op, mode):
    E = op.E
    vals = deciding_values(op, mode)
    eps = support_eps(vals)
    on = np.abs(vals) > eps
    blocks = [E.block_names[b] for b in range(len(vals)) if on[b] and E.block_atomic[b]]
    atoms = sorted({c for b in range(len(vals)) if on[b] and E.block_atomic[b] for c in E.block_cells(b)})
    non_mask = on & ~E.block_atomic
    nonatomic_mass = float(np.sum(E.block_masses[non_mask]))
    return vals, blocks, atoms, nonatomic_mass, eps


def _integrability(op, theta, mode):
    """Norm of u (weight) or of 1/E(u) on the support (reciprocal) in L^theta."""
    if mode == "weight":
        return luxemburg_norm(theta, op.abs_u(), op.space).value, None
    eu = op.E.apply_array(op.abs_u())
    undefined = sorted({op.E.block_names[i] for i in op.E.block_index[eu == 0.0]})
    with np.errstate(divide="ignore"):
        inv = np.where(eu > 0, 1.0 / np.where(eu > 0, eu, 1.0), 0.0)
    return luxemburg_norm(theta, inv, op.space).value, undefined


def classify(op, theta, mode="weight", grid=PREMISE_GRID):
    first = materializations(op)[0][1]
    premises = _premises(first, theta, mode, grid)
    if mode == "reciprocal":
        eu = first.E.block_means(first.abs_u())
        off = nonatomic_max(first.E, eu)
        if off > support_eps(eu):
            raise PremiseViolation("E(u) must vanish on the non-atomic part for a bounded operator",
                                   {"max_on_nonatomic": off})
    reports = []
    for n, m in materializations(op):
        vals, blocks, atoms, nmass, eps = _support(m, mode)
        norm, undefined = _integrability(m, theta, mode)
        reports.append((n, m, blocks, atoms, nmass, norm, undefined))
    n, m, blocks, atoms, nmass, norm, undefined = reports[0]
    details = {"integrability_norm": norm, "support_eps": float(support_eps(deciding_values(m, mode)))}
    if undefined:
        details["reciprocal_undefined_blocks"] = undefined
    if isinstance(op, MCEFamily):
        details["support_size_by_truncation"] = {str(r[0]): len(r[2]) for r in reports}
        growing = len(reports[1][2]) > (1 + 0.05) * len(blocks)
        fam = op
        if mode == "weight":
            mv = membership_trend(theta, lambda k: (fam.at(k).abs_u(), fam.at(k).space), op.N)
            details["u_membership"] = mv.verdict
        else:
            def recip(k):
                mk = fam.at(k)
                eu = mk.E.apply_array(mk.abs_u())
                return np.where(eu > 0, 1.0 / np.where(eu > 0, eu, 1.0), 0.0), mk.space
            details["reciprocal_membership"] = membership_trend(theta, recip, op.N).verdict
    else:
        growing = False
    if nmass > 0.0:
        cls = "nonatomic_support"
    elif not blocks:
        cls = "zero"
    elif growing:
        cls = "diverging_support"
    else:
        cls = "finite_rank_closed"
    rank = "infinite-trend" if cls == "diverging_support" else len(blocks) + _nonatomic_rank(m, mode)
    return RangeReport(blocks, atoms, nmass, rank, cls, premises, n, details)


def _nonatomic_rank(op, mode):
    vals = deciding_values(op, mode)
    eps = support_eps(vals)
    return int(np.sum((np.abs(vals) > eps) & ~op.E.block_atomic))


def operator_matrix(op):
    """Column j = E(u chi_j) over all cells."""
    n = len(op.space.cells)
    eye = np.eye(n)
    return np.column_stack([op.apply_array(eye[:, j]) for j in range(n)])


def numeric_rank(op, rel_tol=RANK_REL_TOL):
    """Number of singular values above rel_tol times the largest."""
    a = operator_matrix(op)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def tail_sum_check(op, theta, mode="weight", rel_tol=TAIL_REL_TOL):
    """Per-atom inequality 1 <= theta(C x_n) mu_n behind the finiteness of
    the support set, with x_n = E(u)(A_n) (weight) or 1 / E(u)(A_n) (reciprocal).

    C is the sup over the support of theta^{-1}(1/mu_n) / E(u)(A_n) (weight)
    or E(u)(A_n) theta^{-1}(1/mu_n) (reciprocal). Also checks that the sum of the
    terms is at most the integral of theta(C u) (resp. theta(C / E(u))).
    """
    if isinstance(op, MCEFamily):
        op = op.base
    E = op.E
    eu = E.block_means(op.abs_u())
    _, blocks, _, _, _ = _support(op, mode)
    idx = [E.block_names.index(b) for b in blocks]
    if not idx:
        return CheckReport("tail_sum", True, 0.0, 0, rel_tol, {"vacuous": True, "support_size": 0})
    mus = E.block_masses[idx]
    xs = eu[idx]
    if np.any(xs <= 0):
        raise DegenerateError("E(u) vanishes on a support block; the reciprocal is undefined")
    inv = np.array([theta.inverse(1.0 / mu) for mu in mus])
    if mode == "weight":
        C = float(np.max(inv / xs))
        args = C * xs
        bound = modular(theta, C * op.abs_u(), op.space)
    else:
        C = float(np.max(xs * inv))
        args = C / xs
        full = E.apply_array(op.abs_u())
        on = np.isin(E.block_index, idx)
        bound = modular(theta, np.where(on, C / np.where(on, full, 1.0), 0.0), op.space)
    terms = theta.evaluate_many(args) * mus
    per_atom_ok = bool(np.all(terms >= 1.0 - rel_tol))
    total = math.fsum(terms.tolist())
    count_ok = len(idx) <= total * (1 + rel_tol)
    bound_ok = total <= bound * (1 + rel_tol)
    worst = float(np.max(1.0 - terms))
    return CheckReport("tail_sum", per_atom_ok and count_ok and bound_ok, worst, len(idx), rel_tol,
                       {"C": C, "support_size": len(idx), "theta_sum": total, "integral_bound": bound,
                        "per_atom_ok": per_atom_ok, "count_ok": bool(count_ok),
                        "integral_ok": bool(bound_ok), "mode": mode})
