# pylint: skip-file
"""
Tests for the tensor_norms stage
"""
import numpy as np
import pytest

from lattice_spaces.scripts.errors import CertificationError, GuardError, LatticeInputError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.settings import GROTHENDIECK_CONSTANT
from lattice_spaces.scripts.spaces import FunctionSpace, OperatorMatrix, norm, norm_values
from tensor_norms.scripts.tensor_norms import (eps_norm, hk_pq_bounds, laprete_bounds, phi_pq_upper,
                                               pi_bounds, r_pq_bounds, tensor_norm)
from tensor_norms.scripts.tensors import (Tensor, TensorNormBounds, canonical_matrix, phi_objective,
                                          rebalance, tensor_from_dict, trace_pairing)
from tensor_norms.scripts.trace_duality import trace_duality_check

SLACK = 1e-6


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.fixture
def l2():
    return FunctionSpace.lr(2, atoms=2)


@pytest.fixture
def elementary(l2):
    return Tensor(l2, l2, [[1.0, -2.0]], [[0.5, 1.5]])


def random_tensor(rng, left, right, rank=2):
    return Tensor(left, right, rng.standard_normal((rank, left.atom_count)),
                  rng.standard_normal((rank, right.atom_count)))


"""
Tests for tensors.py
"""


def test_canonical_matrix_of_basis_pair():
    space = FunctionSpace.lr(1, atoms=2)
    tensor = Tensor(space, space, [[1, 0]], [[0, 1]])
    np.testing.assert_array_equal(canonical_matrix(tensor), [[0, 1], [0, 0]])


def test_canonical_matrix_cancellation_and_bilinearity():
    space = FunctionSpace.lr(2, atoms=2)
    cancelled = Tensor(space, space, [[1, 2], [-1, -2]], [[3, 4], [3, 4]])
    assert not np.any(canonical_matrix(cancelled))
    joined = Tensor(space, space, [[1, 1]], [[1, 0]])
    split = Tensor(space, space, [[1, 0], [0, 1]], [[1, 0], [1, 0]])
    np.testing.assert_array_equal(canonical_matrix(joined), canonical_matrix(split))


def test_tensor_rejects_mismatched_terms(l2):
    with pytest.raises(LatticeInputError):
        Tensor(l2, l2, [[1, 0], [0, 1]], [[1, 0]])
    with pytest.raises(LatticeInputError):
        Tensor(l2, l2, [[1, 0, 0]], [[1, 0]])


def test_tensor_from_dict_reads_matrix_form():
    data = {"left": {"atoms": 2, "norm": {"r": 1}}, "right": {"atoms": 3, "norm": {"r": "inf"}},
            "matrix": [[1, 2, 3], [4, 5, 6]]}
    tensor = tensor_from_dict(data)
    np.testing.assert_allclose(canonical_matrix(tensor), data["matrix"])
    with pytest.raises(LatticeInputError):
        tensor_from_dict({"left": data["left"]})


def test_bounds_reject_crossed_interval():
    with pytest.raises(CertificationError):
        TensorNormBounds("pi", 2.0, 1.0)


"""
Tests for eps_norm
"""


def test_eps_of_elementary_tensor(elementary, l2):
    bounds = eps_norm(elementary)
    expected = norm(l2, [1.0, -2.0]) * norm(l2, [0.5, 1.5])
    assert bounds.lower == pytest.approx(expected, rel=1e-9)
    assert bounds.upper == pytest.approx(expected, rel=1e-9)


def test_eps_of_zero_tensor(l2):
    bounds = eps_norm(Tensor(l2, l2, [[1, 0]], [[0, 0]]))
    assert bounds.lower == bounds.upper == 0.0


def test_eps_of_identity_on_l1_by_sign_vertices():
    space = FunctionSpace.lr(1, atoms=2)
    bounds = eps_norm(Tensor.from_matrix(space, space, np.eye(2)))
    assert bounds.lower == pytest.approx(2.0)
    assert bounds.upper == pytest.approx(2.0)


def test_eps_lower_certificate_reproduces_lower(rng):
    left, right = FunctionSpace.lr("inf", atoms=2), FunctionSpace.lr(2, atoms=3)
    tensor = random_tensor(rng, left, right)
    bounds = eps_norm(tensor)
    assert trace_pairing(bounds.lower_certificate, tensor) == pytest.approx(bounds.lower, rel=1e-9)


"""
Tests for pi_bounds
"""


def test_pi_of_elementary_tensor(elementary, l2):
    bounds = pi_bounds(elementary)
    expected = norm(l2, [1.0, -2.0]) * norm(l2, [0.5, 1.5])
    assert bounds.lower == pytest.approx(expected, rel=1e-6)
    assert bounds.upper == pytest.approx(expected, rel=1e-6)


def test_pi_of_identity_on_l1_is_entry_sum():
    space = FunctionSpace.lr(1, atoms=2)
    bounds = pi_bounds(Tensor.from_matrix(space, space, np.eye(2)))
    assert bounds.lower == pytest.approx(2.0, rel=1e-6)
    assert bounds.upper == pytest.approx(2.0, rel=1e-6)


def test_pi_dominates_eps(rng):
    left, right = FunctionSpace.lr("inf", atoms=2), FunctionSpace.lr(2, atoms=2)
    for _ in range(3):
        tensor = random_tensor(rng, left, right)
        eps, pi = eps_norm(tensor), pi_bounds(tensor)
        assert eps.lower <= pi.upper * (1 + SLACK)
        assert pi.lower >= eps.lower
        assert sum(float(np.sum(norm_values(left, xs) * norm_values(right, ys)))
                   for xs, ys in pi.upper_certificate) == pytest.approx(pi.upper, rel=1e-6)


def test_pi_upper_certificate_represents_the_tensor(rng):
    left, right = FunctionSpace.lr("inf", atoms=2), FunctionSpace.lr(1, atoms=2)
    tensor = random_tensor(rng, left, right)
    bounds = pi_bounds(tensor)
    rebuilt = sum(np.asarray(xs).T @ np.asarray(ys) for xs, ys in bounds.upper_certificate)
    np.testing.assert_allclose(rebuilt, canonical_matrix(tensor), atol=1e-6)


def test_pi_is_at_most_grothendieck_times_phi_on_sup_spaces(rng):
    space = FunctionSpace.lr("inf", atoms=2)
    for _ in range(4):
        tensor = random_tensor(rng, space, space)
        pi = pi_bounds(tensor)
        assert pi.upper <= GROTHENDIECK_CONSTANT * phi_pq_upper(tensor, 2, 2) * (1 + 1e-6)


"""
Tests for laprete_bounds
"""


@pytest.mark.parametrize("name", ["g_p", "d_p", "w_p"])
def test_laprete_of_elementary_tensor(elementary, l2, name):
    bounds = laprete_bounds(elementary, name, 2)
    expected = norm(l2, [1.0, -2.0]) * norm(l2, [0.5, 1.5])
    assert bounds.lower == pytest.approx(expected, rel=1e-9)
    assert bounds.upper == pytest.approx(expected, rel=1e-6)


def test_weak_norm_is_smallest(rng, l2):
    for _ in range(3):
        tensor = random_tensor(rng, l2, l2)
        weak = laprete_bounds(tensor, "w_p", 2).upper
        assert weak <= laprete_bounds(tensor, "g_p", 2).upper * (1 + 1e-6)
        assert weak <= laprete_bounds(tensor, "d_p", 2).upper * (1 + 1e-6)


def test_laprete_rejects_unknown_name(elementary):
    with pytest.raises(LatticeInputError):
        laprete_bounds(elementary, "x_p", 2)


"""
Tests for phi_pq_upper and r_pq_bounds
"""


def test_r_pq_of_elementary_tensor(elementary, l2):
    expected = norm(l2, [1.0, -2.0]) * norm(l2, [0.5, 1.5])
    assert phi_pq_upper(elementary, 2, 2) == pytest.approx(expected, rel=1e-12)
    bounds = r_pq_bounds(elementary, 2, 2, restarts=2)
    assert bounds.lower == pytest.approx(expected, rel=1e-6)
    assert bounds.upper == pytest.approx(expected, rel=1e-6)


def test_r_pq_rejects_q_above_p(elementary):
    with pytest.raises(GuardError):
        r_pq_bounds(elementary, 1, 2)


def test_phi_quasi_triangle_on_concatenation(rng, l2):
    # 1/t = 1/q + 1/p' with p = 2, q = 1
    t = 2.0 / 3.0
    objective = phi_objective(2, 1)
    for _ in range(3):
        first, second = random_tensor(rng, l2, l2), random_tensor(rng, l2, l2)
        joined, _ = rebalance(objective, first + second)
        separate = rebalance(objective, first)[0] + rebalance(objective, second)[0]
        assert joined <= 2 ** (1 / t - 1) * separate * (1 + 1e-6)


def test_certified_ordering_eps_r_pi(rng, l2):
    for _ in range(2):
        tensor = random_tensor(rng, l2, l2)
        eps, pi = eps_norm(tensor), pi_bounds(tensor)
        r = r_pq_bounds(tensor, 2, 1, restarts=2)
        assert eps.lower <= r.upper * (1 + SLACK)
        assert r.lower <= pi.upper * (1 + SLACK)
        assert r.upper <= phi_pq_upper(tensor, 2, 1) * (1 + SLACK)


"""
Tests for hk_pq_bounds
"""


@pytest.mark.parametrize("which", ["h", "k"])
def test_hk_of_elementary_tensor(elementary, l2, which):
    expected = norm(l2, [1.0, -2.0]) * norm(l2, [0.5, 1.5])
    bounds = hk_pq_bounds(elementary, which, 2, 1, restarts=2)
    assert bounds.lower == pytest.approx(expected, rel=1e-6)
    assert bounds.upper == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("which", ["h", "k"])
def test_hk_between_eps_and_pi(rng, l2, which):
    tensor = random_tensor(rng, l2, l2)
    eps, pi = eps_norm(tensor), pi_bounds(tensor)
    bounds = hk_pq_bounds(tensor, which, 2, 1, restarts=2)
    assert eps.lower <= bounds.upper * (1 + SLACK)
    assert bounds.lower <= pi.upper * (1 + SLACK)


def test_g_p_lower_below_h_pp_upper(rng, l2):
    tensor = random_tensor(rng, l2, l2)
    assert laprete_bounds(tensor, "g_p", 2).lower <= hk_pq_bounds(tensor, "h", 2, 2, restarts=2).upper * (1 + SLACK)


def test_tensor_norm_dispatch(elementary):
    assert tensor_norm(elementary, "eps").norm_name == "eps"
    assert tensor_norm(elementary, "phi", 2, 2).norm_name == "phi_pq"
    with pytest.raises(LatticeInputError):
        tensor_norm(elementary, "nuclear")


"""
Tests for trace_duality_check
"""


def test_trace_duality_of_zero_operator(l2):
    record = trace_duality_check(OperatorMatrix(l2, l2, np.zeros((2, 2))), 2, 2, 2, restarts=2)
    assert record.rho_estimate == 0.0
    assert record.dual_sup == 0.0


def test_trace_duality_of_identity(l2):
    record = trace_duality_check(OperatorMatrix(l2, l2, np.eye(2)), 2, 2, 2, restarts=2)
    assert record.rho_estimate == pytest.approx(1.0, rel=1e-6)
    assert record.dual_sup == pytest.approx(1.0, rel=1e-6)


def test_trace_duality_gap_on_random_operator(rng, l2):
    operator = OperatorMatrix(l2, l2, rng.standard_normal((2, 2)))
    record = trace_duality_check(operator, 2, 2, 4, restarts=8)
    assert record.gap <= 2e-2
    assert record.dual_sup >= record.rho_estimate * (1 - 1e-6)


def test_trace_duality_samples_stay_below_rho(rng, l2):
    operator = OperatorMatrix(l2, l2, rng.standard_normal((2, 2)))
    size = operator_norm_bounds(operator).upper
    record = trace_duality_check(operator, 2, 2, 2, restarts=4, samples=4)
    assert record.dual_sup >= record.witness_ratio
    assert record.dual_sup <= size * (1 + 1e-6)
    only_witness = trace_duality_check(operator, 2, 2, 2, restarts=4, samples=0)
    assert only_witness.dual_sup == only_witness.witness_ratio
    assert set(record.to_dict()) == {"rho_estimate", "dual_sup", "witness_ratio", "gap"}


def test_trace_duality_size_guard(l2):
    with pytest.raises(GuardError):
        trace_duality_check(OperatorMatrix(l2, l2, np.eye(2)), 2, 2, 7)
