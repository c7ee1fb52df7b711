"""Orlicz-space calculus and boundedness / range criteria for operators
f -> E(u f) on finitely represented measure spaces."""

__version__ = "0.1.0"

from .expectation import ConditionalExpectation
from .measure import MeasureSpace, SimpleFunction, SubSigmaAlgebra, carve_subsets, integrate, refine
from .mce import (CriterionReport, GCHEstimate, MCEFamily, MCEOperator, estimate_gch_constant,
                  lp_bridge_check, necessary_condition_check, atom_witness_inequality, sufficient_condition_check,
                  integrability_converse_check, integrability_check)
from .orlicz import LuxemburgNorm, luxemburg_norm, membership_trend, modular
from .ranges import RangeReport, classify, numeric_rank, tail_sum_check
from .witness import WitnessSequence, build_witness, certify_divergence, restriction_witness
from .young import (Composed, Conjugate, ExpGrowth, PiecewiseLinear, Power, YoungFunction,
                    complementary, dominance, evaluate, generalized_inverse)
