# pylint: skip-file
"""
Tests for vector_calculus.py and branch_bound.py
"""
import math

import numpy as np
import pytest

from lattice_spaces.scripts.branch_bound import certify_tuple_ratio, crude_ratio_upper
from lattice_spaces.scripts.errors import LatticeInputError
from lattice_spaces.scripts.spaces import (Exponent, FunctionSpace, OperatorMatrix, conjugate_exponent,
                                           dual_norm)
from lattice_spaces.scripts.vector_calculus import (VectorMatrix, VectorTuple, dual_witness,
                                                    holder_check, mixed_matrix_norm, norming_matrix,
                                                    norming_tuple, p_sum, pointwise_product,
                                                    psum_norm, sequence_norming,
                                                    sup_representation_check)

HOLDER_TRIPLES = [(1, 2, 2), (1, "inf", 1), (2, 4, 4), (1, 3, 1.5)]


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.fixture
def l2_pair():
    return FunctionSpace.lr(2, atoms=2)


def random_space(rng, r):
    return FunctionSpace.lr(r, weights=rng.uniform(0.2, 2.0, size=int(rng.integers(1, 5))))


"""
Tests for p-sums and mixed norms
"""


def test_p_sum_examples(l2_pair):
    assert np.allclose(p_sum(VectorTuple(l2_pair, [[3, 0], [4, 0]]), 2), [5, 0])
    assert np.allclose(p_sum(VectorTuple(l2_pair, [[1, -2], [0, 3]]), "inf"), [1, 3])
    repeated = VectorTuple(l2_pair, [[1, 1]] * 5)
    assert np.allclose(p_sum(repeated, 3), 5 ** (1 / 3) * np.ones(2))


def test_p_sum_of_empty_tuple_is_zero(l2_pair):
    assert np.array_equal(p_sum(VectorTuple(l2_pair, []), 2), np.zeros(2))


def test_psum_norm_examples():
    basis = [[1, 0], [0, 1]]
    assert psum_norm(VectorTuple(FunctionSpace.lr(1, atoms=2), basis), 1) == pytest.approx(2)
    assert psum_norm(VectorTuple(FunctionSpace.lr(1, atoms=2), basis), "inf") == pytest.approx(1)
    assert psum_norm(VectorTuple(FunctionSpace.lr(2, atoms=2), basis), 2) == pytest.approx(math.sqrt(2))


def test_p_sum_is_monotone_and_homogeneous(rng):
    space = FunctionSpace.lr(2, atoms=3)
    exponents = [0.5, 1, 1.5, 2, 4, "inf"]
    for _ in range(50):
        t = VectorTuple(space, rng.standard_normal((4, 3)))
        sums = [p_sum(t, p) for p in exponents]
        for larger, smaller in zip(sums[1:], sums[:-1]):
            assert np.all(larger <= smaller + 1e-12)
        assert np.allclose(p_sum(t.scaled(-2.5), 3), 2.5 * p_sum(t, 3), rtol=1e-14)


def test_mixed_matrix_norm_degenerate_shapes(rng):
    space = FunctionSpace.lr(3, atoms=2)
    column = rng.standard_normal((4, 1, 2))
    row = rng.standard_normal((1, 4, 2))
    assert mixed_matrix_norm(VectorMatrix(space, column), 1.5, 4) == pytest.approx(
        psum_norm(VectorTuple(space, column[:, 0]), 1.5))
    assert mixed_matrix_norm(VectorMatrix(space, row), 1.5, 4) == pytest.approx(
        psum_norm(VectorTuple(space, row[0]), 4))


def test_mixed_matrix_norm_all_ones():
    matrix = VectorMatrix(FunctionSpace.lr(1, atoms=1), np.ones((2, 2, 1)))
    assert mixed_matrix_norm(matrix, 2, 2) == pytest.approx(2)


"""
Tests for products and Hölder
"""


def test_pointwise_product_examples(l2_pair):
    product = pointwise_product(VectorTuple(l2_pair, [[1, 2]]), VectorTuple(l2_pair, [[3, 4]]))
    assert np.array_equal(product.members, [[3, 8]])
    phi = VectorTuple(l2_pair, [[1, 0], [0, 1]])
    assert np.array_equal(pointwise_product(phi, VectorTuple(l2_pair, np.ones((2, 2)))).members, phi.members)
    disjoint = pointwise_product(phi, VectorTuple(l2_pair, [[0, 1], [1, 0]]))
    assert not np.any(disjoint.members)


def test_pointwise_product_length_mismatch(l2_pair):
    with pytest.raises(LatticeInputError):
        pointwise_product(VectorTuple(l2_pair, [[1, 2]]), VectorTuple(l2_pair, [[1, 2], [3, 4]]))


def test_holder_check_equality_instance(l2_pair):
    basis = VectorTuple(l2_pair, [[1, 0], [0, 1]])
    record = holder_check(l2_pair, basis, basis, 1, 2, 2)
    assert record.lhs == pytest.approx(2)
    assert record.rhs == pytest.approx(2)
    assert record.slack == pytest.approx(0, abs=1e-12)


def test_holder_check_empty_and_invalid(l2_pair):
    empty = VectorTuple(l2_pair, [])
    record = holder_check(l2_pair, empty, empty, 1, 2, 2)
    assert record.lhs == 0 and record.rhs == 0
    with pytest.raises(LatticeInputError):
        holder_check(l2_pair, empty, empty, 1, 1, 1)


def test_holder_inequality_has_no_violations(rng):
    for r, p, s in HOLDER_TRIPLES:
        for _ in range(200):
            space = random_space(rng, rng.choice([1, 1.5, 2, 3, math.inf]))
            n = int(rng.integers(1, 5))
            phi = VectorTuple(space, rng.standard_normal((n, space.atom_count)))
            psi = VectorTuple(space, rng.standard_normal((n, space.atom_count)))
            record = holder_check(space, phi, psi, r, p, s)
            assert record.slack >= -1e-9 * record.rhs


"""
Tests for dual witnesses
"""


def test_dual_witness_single_member_is_norming_functional(rng):
    space = FunctionSpace.lr(3, weights=[0.5, 1.0, 2.0])
    t = VectorTuple(space, np.abs(rng.standard_normal((1, 3))))
    witness = dual_witness(space, t, 2, 1, 2)
    assert dual_norm(space, witness.members[0]) == pytest.approx(1.0)


def test_dual_witness_of_zero_tuple_is_zero():
    space = FunctionSpace.lr(2, atoms=3)
    witness = dual_witness(space, VectorTuple(space, np.zeros((2, 3))), 2, 1, 2)
    assert not np.any(witness.members)


def test_dual_witness_hand_example():
    space = FunctionSpace.lr(1, atoms=2)
    t = VectorTuple(space, [[1, 0], [1, 0]])
    witness = dual_witness(space, t, 2, 1, 2)
    assert np.allclose(witness.members, [[1 / math.sqrt(2), 0], [1 / math.sqrt(2), 0]])
    assert psum_norm(pointwise_product(t, witness), 1) == pytest.approx(math.sqrt(2))


def test_dual_witness_attains_psum_norm(rng):
    for _ in range(200):
        space = random_space(rng, rng.choice([1, 2, 3, math.inf]))
        p = float(rng.choice([1.5, 2, 3]))
        triples = [(1, 2, 2), (1, p, conjugate_exponent(p)), (2, 4, 4)]
        r, p, s = triples[int(rng.integers(0, 3))]
        t = VectorTuple(space, rng.standard_normal((int(rng.integers(1, 5)), space.atom_count)))
        witness = dual_witness(space, t, p, r, s)
        attained = psum_norm(pointwise_product(t, witness), r)
        assert attained == pytest.approx(psum_norm(t, p), rel=1e-9)
        assert dual_norm(space, p_sum(witness, s)) <= 1 + 1e-9


def test_dual_witness_for_infinite_p():
    space = FunctionSpace.lr(2, atoms=2)
    t = VectorTuple(space, [[1, -3], [2, 1]])
    witness = dual_witness(space, t, "inf", 1, 1)
    assert psum_norm(pointwise_product(t, witness), 1) == pytest.approx(psum_norm(t, "inf"))


def test_norming_tuple_pairs_to_psum_norm(rng):
    for p in [1, 1.5, 2, "inf"]:
        space = FunctionSpace.lr(3, weights=[0.5, 1.0, 2.0])
        t = VectorTuple(space, rng.standard_normal((3, 3)))
        dual = norming_tuple(space, t, p)
        pairing = float(np.sum(space.weight_array * dual.members * t.members))
        assert pairing == pytest.approx(psum_norm(t, p))
        assert psum_norm(dual, conjugate_exponent(p)) <= 1 + 1e-12


def test_norming_matrix_pairs_to_mixed_norm(rng):
    space = FunctionSpace.lr(1.5, atoms=2)
    matrix = VectorMatrix(space, rng.standard_normal((2, 3, 2)))
    dual = norming_matrix(space, matrix, 3, 2)
    pairing = float(np.sum(space.weight_array * dual.members * matrix.members))
    assert pairing == pytest.approx(mixed_matrix_norm(matrix, 3, 2))
    assert mixed_matrix_norm(dual, conjugate_exponent(3), conjugate_exponent(2)) <= 1 + 1e-12


def test_sequence_norming_is_norming():
    a = np.array([3.0, 4.0])
    b = sequence_norming(a, 2)
    assert np.dot(a, b) == pytest.approx(5)
    assert np.array_equal(sequence_norming(a, "inf"), [0.0, 1.0])


"""
Tests for the supremum representation
"""


def test_sup_representation_examples():
    space = FunctionSpace.lr(2, atoms=2)
    single = sup_representation_check(VectorTuple(space, [[1, -2]]), 2, 10)
    assert single.gap == 0
    signs = sup_representation_check(VectorTuple(space, [[1, -2], [3, 1], [-1, 1]]), 1, 10)
    assert signs.gap == pytest.approx(0, abs=1e-12)
    circle = sup_representation_check(VectorTuple(space, [[1, 0], [0, 1]]), 2, 360)
    assert circle.gap <= 1e-4


def test_sup_representation_never_exceeds_exact(rng):
    space = FunctionSpace.lr(2, atoms=3)
    t = VectorTuple(space, rng.standard_normal((3, 3)))
    record = sup_representation_check(t, 3, 500, seed=1)
    assert np.all(record.grid_sup <= record.exact + 1e-12)
    assert record.gap >= 0


"""
Tests for branch_bound.py
"""


def test_certificate_on_hadamard_contains_two_root_two():
    operator = OperatorMatrix(FunctionSpace.lr("inf", atoms=2), FunctionSpace.lr(1, atoms=2), [[1, 1], [1, -1]])
    certificate = certify_tuple_ratio(operator, Exponent(2.0), Exponent(2.0), 2, width=1e-3)
    assert certificate.converged
    assert certificate.lower <= 2 * math.sqrt(2) + 1e-12
    assert certificate.lower >= 2 * math.sqrt(2) - 1e-3
    assert certificate.upper - certificate.lower <= 1e-3


def test_certificate_is_exact_on_scalars():
    operator = OperatorMatrix(FunctionSpace.lr(1, atoms=1), FunctionSpace.lr(1, atoms=1), [[3.0]])
    certificate = certify_tuple_ratio(operator, Exponent(1.0), Exponent(1.0), 1)
    assert certificate.lower == pytest.approx(3.0)
    assert certificate.upper == pytest.approx(3.0)


def test_crude_upper_dominates_certificate(rng):
    operator = OperatorMatrix(FunctionSpace.lr(2, atoms=2), FunctionSpace.lr(3, atoms=2), rng.standard_normal((2, 2)))
    certificate = certify_tuple_ratio(operator, Exponent(2.0), Exponent(1.0), 2, width=1e-2, max_boxes=5_000)
    assert certificate.lower <= certificate.upper <= crude_ratio_upper(operator, Exponent(1.0), 2) + 1e-12
