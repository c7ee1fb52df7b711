import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_algebra
from orlicz_mce import specs
from orlicz_mce.errors import PremiseViolation
from orlicz_mce.expectation import ConditionalExpectation
from orlicz_mce.mce import MCEOperator
from orlicz_mce.measure import MeasureSpace, SimpleFunction, SubSigmaAlgebra
from orlicz_mce.ranges import classify, numeric_rank, operator_matrix, tail_sum_check
from orlicz_mce.young import Power

# weight: psi(xy) <= phi(x) + theta(y) with phi = x^4/4, psi = x^2/2, theta = x^4/4
T_WEIGHT = (Power(4.0, True), Power(2.0, True), Power(4.0, True))
# reciprocal: phi(xy) <= psi(x) + theta(y) with phi = x^2/2, psi = x^4/4, theta = x^4/4
T_RECIP = (Power(2.0, True), Power(4.0, True), Power(4.0, True))


def op_on(u, masses, algebra=None, triple=T_WEIGHT, nonatomic=None):
    sp = MeasureSpace.from_masses({f"a{i}": m for i, m in enumerate(masses)}, nonatomic)
    alg = SubSigmaAlgebra.finest(sp) if algebra is None else SubSigmaAlgebra(algebra)
    return MCEOperator(SimpleFunction(u), ConditionalExpectation(sp, alg), triple[0], triple[1])


def gauss_rank(a, tol=1e-9):
    """Rank by partial-pivot elimination; independent of the SVD route."""
    a = np.array(a, dtype=float)
    scale = np.abs(a).max() if a.size else 0.0
    rank, rows, cols = 0, a.shape[0], a.shape[1] if a.ndim == 2 else 0
    for c in range(cols):
        if rank == rows:
            break
        piv = rank + int(np.argmax(np.abs(a[rank:, c])))
        if abs(a[piv, c]) <= tol * max(scale, 1e-300):
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, c] / a[rank, c], a[rank])
        rank += 1
    return rank


def test_zero_operator():
    rep = classify(op_on({}, [1.0, 2.0]), T_WEIGHT[2])
    assert rep.classification == "zero" and rep.rank == 0 and rep.support_set_E == []


def test_finite_rank_blocks():
    op = op_on({"a0": 1.0, "a2": 3.0}, [1.0, 1.0, 0.5, 0.5],
               algebra={"G1": ("a0", "a1"), "G2": ("a2", "a3")})
    rep = classify(op, T_WEIGHT[2])
    assert rep.classification == "finite_rank_closed"
    assert rep.support_set_E == ["G1", "G2"] and rep.rank == 2 == numeric_rank(op)
    assert rep.support_atoms == ["a0", "a1", "a2", "a3"]


def test_nonatomic_support_reported():
    op = op_on({"B": 1.0}, [1.0], nonatomic={"B": 2.0})
    rep = classify(op, T_WEIGHT[2])
    assert rep.classification == "nonatomic_support" and rep.nonatomic_support_mass == 2.0


def test_reciprocal_requires_vanishing_on_nonatomic_part():
    op = op_on({"B": 1.0}, [1.0], nonatomic={"B": 2.0}, triple=T_RECIP)
    with pytest.raises(PremiseViolation):
        classify(op, T_RECIP[2], mode="reciprocal")


def test_premise_mode_mismatch():
    with pytest.raises(PremiseViolation):
        classify(op_on({"a0": 1.0}, [1.0], triple=T_RECIP), T_RECIP[2], mode="weight")


def test_diverging_support_on_family():
    req = {"space": {"parametric": {"mass_formula": "2^-n", "N": 8}},
           "operator": {"u": {"constant": 1.0}},
           "source": {"family": "power", "p": 2.0, "scaled": True},
           "target": {"family": "power", "p": 4.0, "scaled": True}}
    rep = classify(specs.operator(req), T_RECIP[2], mode="reciprocal")
    assert rep.classification == "diverging_support" and rep.rank == "infinite-trend"
    assert rep.details["support_size_by_truncation"] == {"8": 8, "16": 16}


def test_operator_matrix_diagonal_for_finest_algebra():
    op = op_on({"a0": 2.0, "a1": -1.0}, [1.0, 1.0])
    np.testing.assert_array_equal(operator_matrix(op), np.diag([2.0, -1.0]))


def test_tail_sum_by_hand():
    # weight, theta = x^4/4, masses 1 and 1/16, u = 1 on both atoms
    op = op_on({"a0": 1.0, "a1": 1.0}, [1.0, 1.0 / 16.0])
    rep = tail_sum_check(op, T_WEIGHT[2])
    # C = max theta^{-1}(1/mu) = (4 * 16)^{1/4}
    assert rep.details["C"] == pytest.approx(64 ** 0.25)
    assert rep.passed and rep.details["support_size"] == 2


def test_tail_sum_vacuous():
    rep = tail_sum_check(op_on({}, [1.0]), T_WEIGHT[2])
    assert rep.passed and rep.details["vacuous"]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), mode=st.sampled_from(["weight", "reciprocal"]))
def test_support_matches_rank_property(seed, mode):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 15))
    sp = MeasureSpace.from_masses({f"a{i}": m for i, m in enumerate(10 ** rng.uniform(-2, 0, n))})
    vals = rng.uniform(0.1, 10.0, n) * (rng.random(n) < 0.6)
    triple = T_WEIGHT if mode == "weight" else T_RECIP
    op = MCEOperator(SimpleFunction.from_array(sp, vals), ConditionalExpectation(sp, random_algebra(rng, sp)),
                     triple[0], triple[1])
    rep = classify(op, triple[2], mode=mode)
    assert len(rep.support_set_E) == numeric_rank(op) == gauss_rank(operator_matrix(op))
