# pylint: skip-file
"""
Tests for the regular_norms stage
"""
import math

import numpy as np
import pytest

from lattice_spaces.scripts.errors import CertificationError, GuardError, LatticeInputError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.settings import GROTHENDIECK_CONSTANT
from lattice_spaces.scripts.spaces import FunctionSpace, OperatorMatrix
from regular_norms.scripts.ascent import RatioObjective
from regular_norms.scripts.bounds import analytic_rho_upper, modulus_bound
from regular_norms.scripts.estimates import ORACLE_EXACT, NormEstimate, RegularityParams
from regular_norms.scripts.regular_norms import (bilinear_PT_norm, compose, composition_bound,
                                                 concavity_norm, convexity_norm, rho_growth_witness,
                                                 rho_lower_bound, rho_oracle)


@pytest.fixture
def rng():
    return np.random.default_rng(5)


@pytest.fixture
def hadamard():
    return OperatorMatrix(FunctionSpace.lr("inf", atoms=2), FunctionSpace.lr(1, atoms=2), [[1, 1], [1, -1]])


def identity(r, n):
    space = FunctionSpace.lr(r, atoms=n)
    return OperatorMatrix(space, space, np.eye(n))


def ratio(operator, members, p, q):
    return RatioObjective(operator, p, q).ratio(np.asarray(members)[None])


"""
Tests for estimates.py
"""


def test_norm_estimate_rejects_crossed_bounds():
    with pytest.raises(CertificationError):
        NormEstimate(2.0, None, 1.0, ORACLE_EXACT)
    assert NormEstimate(1.0 + 1e-12, None, 1.0, ORACLE_EXACT).lower > 1.0


def test_regularity_params_order_guard():
    with pytest.raises(GuardError) as error:
        RegularityParams(1, 2).require_ordered()
    assert error.value.guard == "exponent_order"
    with pytest.raises(LatticeInputError):
        RegularityParams(0.5, 0.5)


"""
Tests for rho_lower_bound
"""


@pytest.mark.parametrize("r", [1, 2, 3, "inf"])
def test_identity_has_rho_one(r):
    for p, q in [(1, 1), (2, 1), ("inf", 2), (3, 3)]:
        estimate = rho_lower_bound(identity(r, 3), RegularityParams(p, q), 3, restarts=4)
        assert 1 - 1e-6 <= estimate.lower <= 1 + 1e-9
        assert estimate.upper == pytest.approx(1.0)


def test_homogeneity_of_the_lower_bound(rng):
    operator = OperatorMatrix(FunctionSpace.lr(2, atoms=3), FunctionSpace.lr(3, atoms=2), rng.standard_normal((2, 3)))
    base = rho_lower_bound(operator, RegularityParams(2, 1), 2, seed=1, restarts=4)
    scaled = rho_lower_bound(operator.scaled(-3.0), RegularityParams(2, 1), 2, seed=1, restarts=4)
    assert scaled.lower == pytest.approx(3.0 * base.lower, rel=1e-6)


def test_hadamard_rho_exceeds_operator_norm(hadamard):
    estimate = rho_lower_bound(hadamard, RegularityParams(2, 2), 2, restarts=4)
    assert estimate.lower >= 2 * math.sqrt(2) - 1e-9
    assert operator_norm_bounds(hadamard).upper == pytest.approx(2.0)
    assert estimate.upper <= GROTHENDIECK_CONSTANT * 2.0 + 1e-12


def test_single_member_tuples_give_the_operator_norm(rng):
    domain = FunctionSpace.lr(2, weights=[0.5, 1.0, 2.0])
    codomain = FunctionSpace.lr(2, weights=[1.0, 3.0])
    operator = OperatorMatrix(domain, codomain, rng.standard_normal((2, 3)))
    estimate = rho_lower_bound(operator, RegularityParams(3, 1.5), 1, restarts=2)
    assert estimate.lower == pytest.approx(operator_norm_bounds(operator).lower, rel=1e-9)


def test_exponent_monotonicity_on_witnesses(rng):
    operator = OperatorMatrix(FunctionSpace.lr(3, atoms=3), FunctionSpace.lr(1.5, atoms=3), rng.standard_normal((3, 3)))
    for (p1, q1), (p, q) in [((3, 1), (2, 2)), (("inf", 1), (2, 1)), ((4, 2), (2, 2))]:
        estimate = rho_lower_bound(operator, RegularityParams(p1, q1), 3, restarts=4)
        assert estimate.lower <= ratio(operator, estimate.lower_witness.members, p, q) * (1 + 1e-12)


def test_tuple_size_must_be_positive(hadamard):
    with pytest.raises(LatticeInputError):
        rho_lower_bound(hadamard, RegularityParams(2, 2), 0)


def test_t_r_regularity_matches_operator_norm(rng):
    for r, t in [(1, 1), (1, 2), (1, "inf"), (2, 2), (2, "inf"), ("inf", "inf")]:
        operator = OperatorMatrix(FunctionSpace.lr(r, atoms=3), FunctionSpace.lr(t, atoms=3), rng.standard_normal((3, 3)))
        size = operator_norm_bounds(operator)
        estimate = rho_lower_bound(operator, RegularityParams(t, r), 3, restarts=4)
        assert size.upper * (1 - 1e-3) <= estimate.lower <= size.upper * (1 + 1e-9)


def test_krivine_bound_holds_on_random_operators(rng):
    for _ in range(8):
        domain = FunctionSpace.lr(rng.choice([1, 1.5, 2, 4, math.inf]), weights=rng.uniform(0.3, 2, size=3))
        codomain = FunctionSpace.lr(rng.choice([1, 1.5, 2, 4, math.inf]), weights=rng.uniform(0.3, 2, size=3))
        operator = OperatorMatrix(domain, codomain, rng.standard_normal((3, 3)))
        estimate = rho_lower_bound(operator, RegularityParams(2, 2), 3, restarts=4)
        assert estimate.lower <= GROTHENDIECK_CONSTANT * operator_norm_bounds(operator).upper


def test_positive_operators_have_rho_at_most_norm(rng):
    operator = OperatorMatrix(FunctionSpace.lr(2, atoms=3), FunctionSpace.lr(3, atoms=3), rng.uniform(0, 1, (3, 3)))
    estimate = rho_lower_bound(operator, RegularityParams(2, 2), 3, restarts=4)
    name = analytic_rho_upper(operator, 2, 2)[1]
    assert name in ("positive", "lattice_exponents")
    assert estimate.lower <= operator_norm_bounds(operator).upper * (1 + 1e-9)


def test_modulus_bound_dominates(rng, hadamard):
    assert modulus_bound(hadamard) == pytest.approx(4.0)
    estimate = rho_lower_bound(hadamard, RegularityParams(2, 1), 2, restarts=4)
    assert estimate.lower <= modulus_bound(hadamard)


"""
Tests for rho_oracle
"""


def test_oracle_examples(hadamard):
    ones = identity(1, 2)
    assert rho_oracle(ones, RegularityParams(1, 1), 2).lower == pytest.approx(1.0)
    scalar = OperatorMatrix(FunctionSpace.lr(1, atoms=1), FunctionSpace.lr(1, atoms=1), [[3.0]])
    exact = rho_oracle(scalar, RegularityParams(1, 1), 1)
    assert exact.lower == exact.upper == pytest.approx(3.0)
    assert exact.upper_kind == ORACLE_EXACT
    interval = rho_oracle(hadamard, RegularityParams(2, 2), 2, grid=1e-3)
    assert interval.lower <= 2 * math.sqrt(2) + 1e-12 <= interval.upper + 2e-12
    assert interval.upper - interval.lower <= 1e-3


def test_oracle_size_guard():
    with pytest.raises(GuardError) as error:
        rho_oracle(identity(2, 4), RegularityParams(2, 2), 4)
    assert error.value.guard == "oracle_size"


def test_oracle_vertex_enumeration_matches_ascent(hadamard):
    for p, q in [(2, 1), ("inf", 1), ("inf", "inf"), (2, "inf")]:
        params = RegularityParams(p, q)
        if params.p < params.q:
            continue
        oracle = rho_oracle(hadamard, params, 2)
        estimate = rho_lower_bound(hadamard, params, 2, restarts=8)
        assert estimate.lower <= oracle.upper * (1 + 1e-9)
        assert oracle.upper_kind == ORACLE_EXACT


def test_ascent_stays_below_oracle_on_random_instances(rng):
    for _ in range(3):
        operator = OperatorMatrix(FunctionSpace.lr("inf", atoms=2), FunctionSpace.lr(2, atoms=2), rng.standard_normal((2, 2)))
        oracle = rho_oracle(operator, RegularityParams(2, 1), 2)
        estimate = rho_lower_bound(operator, RegularityParams(2, 1), 2, restarts=8)
        assert estimate.lower <= oracle.upper * (1 + 1e-9)
        assert estimate.lower >= oracle.lower * (1 - 1e-2)


"""
Tests for rho_growth_witness
"""


def test_growth_witness_examples():
    operator = identity(2, 1)
    assert rho_growth_witness(operator, RegularityParams(1, 2), [1.0], 1) == pytest.approx(1.0)
    assert rho_growth_witness(operator, RegularityParams(1, 2), [1.0], 4) == pytest.approx(2.0)
    assert rho_growth_witness(operator, RegularityParams(1, "inf"), [1.0], 10) == pytest.approx(10.0)


def test_growth_witness_follows_power_law(rng):
    operator = OperatorMatrix(FunctionSpace.lr(2, atoms=2), FunctionSpace.lr(3, atoms=2), rng.standard_normal((2, 2)))
    x = rng.standard_normal(2)
    base = rho_growth_witness(operator, RegularityParams(1.5, 3), x, 1)
    for n in range(1, 65):
        grown = rho_growth_witness(operator, RegularityParams(1.5, 3), x, n)
        assert grown == pytest.approx(base * n ** (1 / 1.5 - 1 / 3), rel=1e-12)


def test_growth_witness_errors():
    with pytest.raises(LatticeInputError):
        rho_growth_witness(identity(2, 1), RegularityParams(2, 1), [1.0], 3)
    with pytest.raises(LatticeInputError):
        rho_growth_witness(identity(2, 1).scaled(0.0), RegularityParams(1, 2), [1.0], 3)


"""
Tests for concavity, convexity and the bilinear form
"""


def test_identity_is_p_concave_with_constant_one():
    estimate = concavity_norm(identity(3, 3), 3, 3, 3, restarts=4)
    assert estimate.lower == pytest.approx(1.0, rel=1e-6)
    assert estimate.upper == pytest.approx(1.0)


def test_single_members_reduce_to_operator_norm(hadamard):
    assert concavity_norm(hadamard, 2, 2, 1, restarts=2).lower == pytest.approx(2.0)
    assert convexity_norm(hadamard, 2, 2, 1, restarts=2).lower == pytest.approx(2.0)


def test_convexity_equals_rho_on_lq_domains(rng):
    l1_operator = OperatorMatrix(FunctionSpace.lr(1, atoms=3), FunctionSpace.lr(3, atoms=3), rng.standard_normal((3, 3)))
    convexity = convexity_norm(l1_operator, 2, 1, 3, restarts=4)
    rho = rho_lower_bound(l1_operator, RegularityParams(2, 1), 3, restarts=4)
    assert convexity.lower == pytest.approx(rho.lower, rel=1e-2)
    l2_operator = OperatorMatrix(FunctionSpace.lr(2, atoms=3), FunctionSpace.lr(2, atoms=3), rng.standard_normal((3, 3)))
    convexity = convexity_norm(l2_operator, 2, 2, 3, restarts=4)
    rho = rho_lower_bound(l2_operator, RegularityParams(2, 2), 3, restarts=4)
    assert convexity.lower == pytest.approx(rho.lower, rel=1e-2)


def test_composition_bound(rng):
    space = FunctionSpace.lr(2, atoms=3)
    left = OperatorMatrix(space, space, rng.standard_normal((3, 3)))
    right = OperatorMatrix(space, space, rng.standard_normal((3, 3)))
    bound = composition_bound(left, right, 2, 2, 3, restarts=4)
    assert bound.certified
    estimate = rho_lower_bound(compose(left, right), RegularityParams(2, 2), 3, restarts=4)
    assert estimate.lower <= bound.value * (1 + 1e-2)


def test_bilinear_form_of_zero_operator(hadamard):
    assert bilinear_PT_norm(hadamard.scaled(0.0), 1, 2, 2, 2).lower == 0.0


def test_bilinear_form_agrees_with_rho_on_hadamard(hadamard):
    bilinear = bilinear_PT_norm(hadamard, 1, 2, 2, 2, restarts=4)
    rho = rho_lower_bound(hadamard, RegularityParams(2, 2), 2, restarts=4)
    assert bilinear.lower == pytest.approx(rho.lower, abs=1e-3)


def test_bilinear_form_with_one_member_is_operator_norm(rng):
    operator = OperatorMatrix(FunctionSpace.lr(2, atoms=2), FunctionSpace.lr(2, atoms=3), rng.standard_normal((3, 2)))
    bilinear = bilinear_PT_norm(operator, 1, 2, 2, 1, restarts=2)
    assert bilinear.lower == pytest.approx(operator_norm_bounds(operator).upper, rel=1e-6)


def test_bilinear_form_rejects_bad_exponents(hadamard):
    with pytest.raises(LatticeInputError):
        bilinear_PT_norm(hadamard, 2, 1, 1, 2)
