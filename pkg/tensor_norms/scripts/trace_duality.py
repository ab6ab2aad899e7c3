"""
Trace duality between rho_{p,q} and r_pq.

An operator T: X -> Y acts on X ⊗ Y' by <T, x ⊗ y'> = <T x, y'>, and rho_{p,q}(T) is
the supremum of <T, z> over tensors with r_pq(z) <= 1. The check below evaluates the
pairing, scaled by the certified r_pq upper bound, on the tensor built from the rho
witness and its norming tuple and on a few seeded Gaussian tensors. The best of these
ratios is a lower estimate of the supremum and is compared with the rho estimate.
"""
from dataclasses import dataclass

import numpy as np

from lattice_spaces.scripts.errors import GuardError
from lattice_spaces.scripts.settings import DEFAULT_RESTARTS
from lattice_spaces.scripts.spaces import dual_space
from lattice_spaces.scripts.vector_calculus import VectorTuple, norming_tuple
from regular_norms.scripts.estimates import RegularityParams
from regular_norms.scripts.regular_norms import ORACLE_SIZE_LIMIT, rho_lower_bound
from tensor_norms.scripts.tensor_norms import r_pq_bounds
from tensor_norms.scripts.tensors import Tensor, operator_functional, trace_pairing

DUALITY_SAMPLES = 3


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class TraceDualityRecord:
    """
    Both sides of the trace duality for one operator.

    rho_estimate (float): rho_{p,q} lower bound of T
    dual_sup (float): best <T, z> / r_pq upper bound of z over the tested tensors
    witness_ratio (float): the same ratio for the tensor built from the rho witness
    gap (float): |rho_estimate - dual_sup|
    tensor (Tensor): the tensor attaining dual_sup
    """
    rho_estimate: float
    dual_sup: float
    witness_ratio: float
    gap: float
    tensor: Tensor

    def to_dict(self):
        """Report form without the tensor."""
        return {"rho_estimate": self.rho_estimate, "dual_sup": self.dual_sup,
                "witness_ratio": self.witness_ratio, "gap": self.gap}


def _pairing_ratio(operator, tensor, params, seed, rank_budget):
    value = trace_pairing(operator_functional(operator), tensor)
    bounds = r_pq_bounds(tensor, params.p, params.q, seed=seed, tuple_size=rank_budget)
    return value / bounds.upper if bounds.upper > 0 else 0.0


def trace_duality_check(operator, p, q, rank_budget, seed=0, restarts=DEFAULT_RESTARTS, samples=DUALITY_SAMPLES):
    """Compares rho_{p,q}(T) with the trace pairing against the r_pq unit ball.

    Args:
        operator (OperatorMatrix): T
        p, q (Exponent): exponents with q <= p
        rank_budget (int): tuple size of the rho search, of priced blocks and rank of the sampled tensors
        seed (int): seed of both searches and of the sampled tensors
        restarts (int): random starts of the rho search
        samples (int): Gaussian tensors tested next to the witness tensor

    Returns:
        TraceDualityRecord
    """
    params = RegularityParams(p, q).require_ordered()
    if operator.domain.atom_count * rank_budget > ORACLE_SIZE_LIMIT:
        raise GuardError("oracle_size",
                         f"domain atoms x rank budget = {operator.domain.atom_count * rank_budget} "
                         f"exceeds {ORACLE_SIZE_LIMIT}")
    estimate = rho_lower_bound(operator, params, rank_budget, seed=seed, restarts=restarts)
    xs = np.asarray(estimate.lower_witness.members)
    codomain = operator.codomain
    right = dual_space(codomain)
    images = operator.apply(xs)
    if not np.any(images):
        tensor = Tensor(operator.domain, right, xs, np.zeros((xs.shape[0], right.atom_count)))
        return TraceDualityRecord(estimate.lower, 0.0, 0.0, estimate.lower, tensor)
    ys = norming_tuple(codomain, VectorTuple(codomain, images), params.p).members
    best_tensor = Tensor(operator.domain, right, xs, ys)
    witness_ratio = _pairing_ratio(operator, best_tensor, params, seed, rank_budget)
    best = witness_ratio
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        sample_xs = rng.standard_normal((rank_budget, operator.domain.atom_count))
        sample_ys = rng.standard_normal((rank_budget, right.atom_count))
        if trace_pairing(operator_functional(operator), Tensor(operator.domain, right, sample_xs, sample_ys)) < 0:
            sample_ys = -sample_ys
        tensor = Tensor(operator.domain, right, sample_xs, sample_ys)
        ratio = _pairing_ratio(operator, tensor, params, seed, rank_budget)
        if ratio > best:
            best, best_tensor = ratio, tensor
    return TraceDualityRecord(estimate.lower, best, witness_ratio, abs(estimate.lower - best), best_tensor)
