"""Conditional expectation onto a partition sub-sigma-algebra."""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import PremiseViolation
from .measure import SimpleFunction, SubSigmaAlgebra
from .report import CheckReport


def _values(f, space):
    if isinstance(f, SimpleFunction):
        return f.as_array(space)
    return np.asarray(f, dtype=float)


@dataclass(frozen=True)
class ConditionalExpectation:
    space: object
    algebra: SubSigmaAlgebra = None

    @classmethod
    def identity(cls, space):
        return cls(space, SubSigmaAlgebra.finest(space))

    @cached_property
    def _labels(self):
        alg = self.algebra or SubSigmaAlgebra.finest(self.space)
        return alg.labels(self.space)

    @property
    def block_names(self):
        return self._labels[0]

    @property
    def block_index(self):
        """Block number of every cell, aligned with space.cells."""
        return self._labels[1]

    @cached_property
    def block_masses(self):
        return np.bincount(self.block_index, weights=self.space.masses,
                           minlength=len(self.block_names))

    @cached_property
    def block_atomic(self):
        """True for blocks made of atoms only; these are the atoms of the algebra."""
        nonatomic = np.bincount(self.block_index, weights=(~self.space.atomic_mask).astype(float),
                                minlength=len(self.block_names))
        return nonatomic == 0

    def block_cells(self, b):
        return [self.space.ids[i] for i in np.flatnonzero(self.block_index == b)]

    def block_means(self, f):
        """One weighted average per block."""
        v = _values(f, self.space)
        with np.errstate(invalid="ignore", over="ignore"):
            sums = np.bincount(self.block_index, weights=v * self.space.masses,
                               minlength=len(self.block_names))
        return sums / self.block_masses

    def apply_array(self, f):
        return self.block_means(f)[self.block_index]

    def apply(self, f):
        return SimpleFunction.from_array(self.space, self.apply_array(f))

    def is_measurable(self, g, tol=1e-12):
        v = _values(g, self.space)
        lo = np.full(len(self.block_names), np.inf)
        hi = np.full(len(self.block_names), -np.inf)
        np.minimum.at(lo, self.block_index, v)
        np.maximum.at(hi, self.block_index, v)
        scale = np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
        return bool(np.all(hi - lo <= tol * scale))


def _cellwise_report(name, lhs, rhs, tol, **details):
    """Report for lhs <= rhs + tol * max(1, |rhs|) cell by cell."""
    excess = (lhs - rhs) / np.maximum(1.0, np.abs(rhs))
    worst = float(np.max(excess)) if excess.size else 0.0
    return CheckReport(name, bool(worst <= tol), worst, int(excess.size), tol, details)


def check_averaging(E, f, tol=1e-12):
    """Integral over each block is preserved."""
    v = _values(f, E.space)
    m = E.space.masses
    before = np.bincount(E.block_index, weights=v * m)
    after = np.bincount(E.block_index, weights=E.apply_array(v) * m)
    err = np.abs(before - after) / np.maximum(1.0, np.abs(before))
    worst = float(err.max()) if err.size else 0.0
    return CheckReport("averaging_identity", worst <= tol, worst, err.size, tol)


def check_module_property(E, f, g, tol=1e-12):
    """E(fg) = E(f) g for block-constant g."""
    fv, gv = _values(f, E.space), _values(g, E.space)
    if not E.is_measurable(gv):
        raise PremiseViolation("g is not constant on the blocks of the algebra")
    lhs = E.apply_array(fv * gv)
    rhs = E.apply_array(fv) * gv
    err = np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))
    worst = float(err.max()) if err.size else 0.0
    return CheckReport("module_property", worst <= tol, worst, err.size, tol)


def check_jensen(E, f, phi, tol=1e-12):
    """phi(E f) <= E(phi(f)) on every cell."""
    fv = _values(f, E.space)
    lhs = phi.evaluate_many(E.apply_array(fv))
    rhs = E.apply_array(phi.evaluate_many(fv))
    return _cellwise_report("jensen", lhs, rhs, tol)


def check_support_equality(E, f, phi, eps=0.0):
    """For f >= 0 and phi vanishing only at 0: E(f) and E(phi(f)) have the
    same support, and the support of f sits inside the support of E(f).

    Supports are compared at threshold `eps`; the default 0 compares exact
    zero sets, which is what "= 0 a.e." means for nonnegative f.
    """
    if phi.a_phi != 0.0:
        raise PremiseViolation("support comparison needs phi vanishing only at zero",
                               {"a_phi": phi.a_phi})
    fv = _values(f, E.space)
    if np.any(fv < 0):
        raise PremiseViolation("support comparison needs f >= 0")
    ef = E.block_means(fv)
    ephi = E.block_means(phi.evaluate_many(fv))
    s_ef = {E.block_names[i] for i in np.flatnonzero(ef > eps)}
    s_ephi = {E.block_names[i] for i in np.flatnonzero(ephi > eps)}
    cells_f = np.flatnonzero(fv > eps)
    inside = bool(np.all(E.apply_array(fv)[cells_f] > eps))
    ok = s_ef == s_ephi and inside
    return CheckReport("support_equality", ok, 0.0 if ok else 1.0, len(E.block_names), eps,
                       {"support_Ef": sorted(s_ef), "support_Ephif": sorted(s_ephi),
                        "cell_support_inside": inside})


def check_positivity(E, f):
    fv = _values(f, E.space)
    if np.any(fv < 0):
        raise PremiseViolation("positivity check needs f >= 0")
    ef = E.block_means(fv)
    pos = np.bincount(E.block_index, weights=(fv > 0).astype(float), minlength=len(ef)) > 0
    ok = bool(np.all(ef >= 0) and np.all(ef[pos] > 0))
    return CheckReport("positivity", ok, 0.0 if ok else 1.0, len(ef), 0.0)


def check_idempotent(E, f, tol=1e-12):
    once = E.apply_array(f)
    twice = E.apply_array(once)
    err = np.abs(once - twice) / np.maximum(1.0, np.abs(once))
    worst = float(err.max()) if err.size else 0.0
    return CheckReport("idempotence", worst <= tol, worst, err.size, tol)


def block_integral(E, f):
    """Integral of f over each block (compensated)."""
    v = _values(f, E.space) * E.space.masses
    return [math.fsum(v[E.block_index == b].tolist()) for b in range(len(E.block_names))]
