"""
Two-sided bounds for tensor norms on left ⊗ right.

* eps: the injective norm, an operator norm of the associated map.
* pi: the projective norm inf sum ||x_i|| ||y_i||, dual to the operator norm.
* g_p, d_p, w_p: Chevet-Saphar norms, by representation search.
* r_pq, h_pq, k_pq: infima over block decompositions of phi_pq, delta_pq and
  iota_pq, dual to rho_{p,q}, the (p,q)-convexity and the (p,q)-concavity norms
  of operators from left into the dual of right.

Upper bounds always come with an explicit representation and lower bounds with a
coefficient matrix whose dual norm is certified to be at most one.
"""
import math

import numpy as np

from lattice_spaces.scripts.errors import LatticeInputError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.spaces import (Exponent, OperatorMatrix, dual_maximizer,
                                           dual_space, norm, norm_values, norming_functional)
from lattice_spaces.scripts.vector_calculus import VectorTuple, norming_tuple, sequence_norming
from regular_norms.scripts.ascent import LATTICE, STRONG, RatioObjective, maximize
from regular_norms.scripts.bounds import analytic_rho_upper, concavity_upper, convexity_upper
from regular_norms.scripts.estimates import RegularityParams
from regular_norms.scripts.regular_norms import ORACLE_SIZE_LIMIT, rho_oracle
from tensor_norms.scripts.column_generation import (DEFAULT_ITERATIONS, Block, elementary_blocks,
                                                    generate_columns)
from tensor_norms.scripts.tensors import (LAPRESTE_OBJECTIVES, TensorNormBounds, best_representation,
                                          delta_objective, iota_objective, pairing_operator,
                                          phi_objective, rebalance, representations, trace_pairing)

LP_TOLERANCE = 1e-7
PRICING_RESTARTS = 8
DEFAULT_BLOCKS = 4
# analytic bounds equal to an upper bound of ||T||, which never exceeds rho
SHARP_BOUNDS = ("positive", "lattice_exponents")


def _zero_bounds(name, tensor):
    shape = (tensor.left_space.atom_count, tensor.right_space.atom_count)
    return TensorNormBounds(name, 0.0, 0.0, np.zeros(shape), [])


def nuclear_cost(tensor):
    """sum_i ||x_i|| ||y_i|| of a representation, as a function of (xs, ys)."""
    left, right = tensor.left_space, tensor.right_space

    def cost(xs, ys):
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        return float(np.sum(norm_values(left, xs) * norm_values(right, ys)))

    return cost


def eps_norm(tensor, seed=0):
    """Injective norm sup { <x' ⊗ y', z> } over the dual unit balls.

    It is the norm of y' -> sum_i <y', y_i> x_i from the dual of right into left,
    exact whenever the operator norm has a closed form or was certified.

    Args:
        tensor (Tensor): z
        seed (int): seed of the operator norm search

    Returns:
        TensorNormBounds; the lower certificate is the rank-one matrix of x' ⊗ y'
    """
    matrix = tensor.canonical_matrix()
    if not np.any(matrix):
        return _zero_bounds("eps", tensor)
    left, right = tensor.left_space, tensor.right_space
    right_dual = dual_space(right)
    operator = OperatorMatrix(right_dual, left, matrix * right.weight_array[None, :])
    bounds = operator_norm_bounds(operator, seed=seed)
    y_dual = bounds.witness / norm(right_dual, bounds.witness)
    x_dual = norming_functional(left, operator.apply(y_dual))
    certificate = np.outer(left.weight_array * x_dual, right.weight_array * y_dual)
    lower = trace_pairing(certificate, tensor)
    upper = bounds.upper
    representation = []
    termwise = nuclear_cost(tensor)(tensor.xs, tensor.ys)
    if termwise < upper:
        upper, representation = termwise, [(tensor.xs, tensor.ys)]
    return TensorNormBounds("eps", lower, max(upper, lower), certificate, representation, LP_TOLERANCE)


def _decomposition_bounds(tensor, name, cost, price, dual_upper, pool, seed, max_iter):
    """Column generation upper bound and certified dual lower bound, never below eps."""
    eps = eps_norm(tensor, seed=seed)
    if eps.upper == 0:
        return _zero_bounds(name, tensor)
    pool = elementary_blocks(tensor) + [Block(np.asarray(xs), np.asarray(ys), cost(xs, ys)) for xs, ys in pool]
    solution = generate_columns(tensor, pool, cost, price, max_iter=max_iter)
    upper_certificate = [(block.xs, block.ys) for block in solution.blocks]
    lower, lower_certificate = eps.lower, eps.lower_certificate
    dual = dual_upper(pairing_operator(tensor, solution.functional))
    if 0 < dual < math.inf:
        candidate = trace_pairing(solution.functional, tensor) / dual
        if candidate > lower:
            lower, lower_certificate = candidate, solution.functional / dual
    return TensorNormBounds(name, lower, solution.value, lower_certificate, upper_certificate, LP_TOLERANCE)


def _split_pieces(tensor, blocks):
    """Halves, quarters, ... of the term list until blocks pieces or single terms."""
    pieces, frontier = [tensor], [tensor]
    while len(frontier) < blocks:
        following = []
        for piece in frontier:
            if piece.rank_bound < 2:
                following.append(piece)
                continue
            middle = piece.rank_bound // 2
            following.append(piece.with_terms(piece.xs[:middle], piece.ys[:middle]))
            following.append(piece.with_terms(piece.xs[middle:], piece.ys[middle:]))
        if len(following) == len(frontier):
            break
        pieces.extend(following)
        frontier = following
    return pieces


def _starting_pool(tensor, objective, blocks):
    pool = []
    for representation in representations(tensor):
        for piece in _split_pieces(representation, blocks):
            _, balanced = rebalance(objective, piece)
            if balanced.rank_bound:
                pool.append((balanced.xs, balanced.ys))
    return pool


def _single_terms(tensor):
    return [(x[None], y[None]) for representation in representations(tensor)
            for x, y in zip(representation.xs, representation.ys)]


def pi_bounds(tensor, seed=0, cut_iters=DEFAULT_ITERATIONS):
    """Projective norm bounds.

    The restricted master decomposes z over unit elementary tensors; pricing takes
    the operator-norm maximizer u of the dual matrix and the norming v of its image.
    The lower bound divides <G, z> by the certified norm of G as an operator.

    Args:
        tensor (Tensor): z
        seed (int): seed of the pricing search
        cut_iters (int): master solves allowed

    Returns:
        TensorNormBounds
    """
    left, right = tensor.left_space, tensor.right_space

    def price(functional):
        operator = pairing_operator(tensor, functional)
        if operator.is_zero():
            return []
        witness = operator_norm_bounds(operator, seed=seed, rigorous=False).witness
        u = witness / norm(left, witness)
        v = dual_maximizer(right, operator.apply(u))
        return [(u[None], v[None])]

    def dual_upper(operator):
        return operator_norm_bounds(operator, seed=seed).upper

    return _decomposition_bounds(tensor, "pi", nuclear_cost(tensor), price, dual_upper,
                                 _single_terms(tensor), seed, cut_iters)


def laprete_bounds(tensor, norm_name, p, seed=0):
    """Chevet-Saphar norm bounds by representation search.

    g_p = inf l_p(x) w_p'(y), d_p = inf w_p(x) l_p'(y), w_p = inf w_p(x) w_p'(y), with
    l strong and w weak sequence norms. The lower bound is the injective one.

    Args:
        tensor (Tensor): z
        norm_name (string): one of g_p, d_p, w_p
        p (Exponent): exponent, at least 1
        seed (int): seed of the injective norm search

    Returns:
        TensorNormBounds
    """
    if norm_name not in LAPRESTE_OBJECTIVES:
        raise_unknown(norm_name, LAPRESTE_OBJECTIVES)
    p = Exponent.of(p)
    if p < 1:
        raise LatticeInputError(f"{norm_name} needs p >= 1, got p={p}")
    eps = eps_norm(tensor, seed=seed)
    if eps.upper == 0:
        return _zero_bounds(norm_name, tensor)
    upper, representation = best_representation(LAPRESTE_OBJECTIVES[norm_name](p), tensor)
    return TensorNormBounds(norm_name, eps.lower, upper, eps.lower_certificate,
                            [(representation.xs, representation.ys)], LP_TOLERANCE)


def raise_unknown(name, known):
    """Reports an unsupported norm name."""
    raise LatticeInputError(f"unknown norm {name!r}; expected one of {sorted(known)}")


def phi_pq_upper(tensor, p, q):
    """Smallest phi_pq objective over the searched single representations.

    Args:
        tensor (Tensor): z
        p, q (Exponent): exponents with 1 <= q <= p

    Returns:
        float
    """
    params = RegularityParams(p, q).require_ordered()
    value, _ = best_representation(phi_objective(params.p, params.q), tensor)
    return value


def certified_rho_upper(operator, params, seed=0):
    """Upper bound of rho_{p,q} valid for tuples of every length.

    Analytic bounds always apply for q <= p. The oracle is added where its value does
    not depend on the tuple length: l_1 domains, and p = q = 2 with as many members
    as atoms on domains of at most two atoms.
    """
    value, name = analytic_rho_upper(operator, params.p, params.q, seed=seed)
    if name in SHARP_BOUNDS:
        return value
    domain = operator.domain
    atoms = domain.atom_count
    if domain.is_weighted_lr and domain.exponent == Exponent(1.0):
        value = min(value, rho_oracle(operator, params, 1).upper)
    elif params.p == Exponent(2.0) and params.q == Exponent(2.0) and atoms <= 2 \
            and atoms * atoms <= ORACLE_SIZE_LIMIT:
        value = min(value, rho_oracle(operator, params, atoms).upper)
    return value


def _ascent_pricing(tensor, params, numerator, denominator, tuple_size, seed, restarts):
    codomain = dual_space(tensor.right_space)

    def price(functional):
        operator = pairing_operator(tensor, functional)
        if operator.is_zero():
            return []
        objective = RatioObjective(operator, params.p, params.q, numerator=numerator, denominator=denominator)
        xs = maximize(objective, 1, tuple_size, seed=seed, restarts=restarts).witness[0]
        images = operator.apply(xs)
        if not np.any(images):
            return []
        if numerator == STRONG:
            sizes = norm_values(codomain, images)
            weights = sequence_norming(sizes, params.p)
            ys = np.array([w * norming_functional(codomain, image) for w, image in zip(weights, images)])
        else:
            ys = norming_tuple(codomain, VectorTuple(codomain, images), params.p).members
        return [(xs, ys)]

    return price


def _lattice_tensor_bounds(tensor, name, objective, params, numerator, denominator, dual_upper,
                           seed, blocks, tuple_size, restarts, max_iter):
    if tuple_size is None:
        tuple_size = max(tensor.left_space.atom_count, 2)

    def cost(xs, ys):
        return objective.value(tensor, np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))

    price = _ascent_pricing(tensor, params, numerator, denominator, tuple_size, seed, restarts)
    return _decomposition_bounds(tensor, name, cost, price, dual_upper,
                                 _starting_pool(tensor, objective, blocks), seed, max_iter)


def r_pq_bounds(tensor, p, q, seed=0, blocks=DEFAULT_BLOCKS, tuple_size=None,
                restarts=PRICING_RESTARTS, max_iter=DEFAULT_ITERATIONS):
    """Bounds for r_pq(z) = inf { sum_j phi_pq(z_j) : z = sum_j z_j }.

    Blocks start from bisections of the candidate representations and grow by
    pricing with the rho_{p,q} ascent; the lower certificate is normalized by a
    rho_{p,q} bound valid for all tuple lengths.

    Args:
        tensor (Tensor): z, with right playing the dual of the target space
        p, q (Exponent): exponents with 1 <= q <= p
        seed (int): seed of the pricing ascent
        blocks (int): pieces of the initial bisections
        tuple_size (int): members of a priced block; the left atom count by default
        restarts (int): random starts of each pricing ascent
        max_iter (int): master solves allowed

    Returns:
        TensorNormBounds
    """
    params = RegularityParams(p, q).require_ordered()
    return _lattice_tensor_bounds(
        tensor, "r_pq", phi_objective(params.p, params.q), params, LATTICE, LATTICE,
        lambda operator: certified_rho_upper(operator, params, seed), seed, blocks, tuple_size,
        restarts, max_iter)


def hk_pq_bounds(tensor, which, p, q, seed=0, blocks=DEFAULT_BLOCKS, tuple_size=None,
                 restarts=PRICING_RESTARTS, max_iter=DEFAULT_ITERATIONS):
    """Bounds for h_pq (decompositions priced by delta_pq, dual to (p,q)-convexity)
    or k_pq (iota_pq, dual to (p,q)-concavity).

    Args:
        tensor (Tensor): z
        which (string): "h" or "k"
        p, q (Exponent): exponents with 1 <= q <= p
        seed (int): seed of the pricing ascent
        blocks (int): pieces of the initial bisections
        tuple_size (int): members of a priced block
        restarts (int): random starts of each pricing ascent
        max_iter (int): master solves allowed

    Returns:
        TensorNormBounds
    """
    params = RegularityParams(p, q).require_ordered()
    if which == "h":
        objective, numerator, denominator, upper = delta_objective(params.p, params.q), LATTICE, STRONG, \
            convexity_upper
    elif which == "k":
        objective, numerator, denominator, upper = iota_objective(params.p, params.q), STRONG, LATTICE, \
            concavity_upper
    else:
        raise_unknown(which, ("h", "k"))

    def dual_upper(operator):
        return upper(operator, params.p, params.q)[0]

    return _lattice_tensor_bounds(tensor, f"{which}_pq", objective, params, numerator, denominator,
                                  dual_upper, seed, blocks, tuple_size, restarts, max_iter)


TENSOR_NORMS = ("eps", "pi", "gp", "dp", "wp", "phi", "rpq", "hpq", "kpq")


def tensor_norm(tensor, name, p=None, q=None, seed=0):
    """Dispatches a tensor norm by its command-line name.

    Args:
        tensor (Tensor): z
        name (string): one of TENSOR_NORMS
        p, q (Exponent): exponents where the norm needs them
        seed (int): seed of the searches

    Returns:
        TensorNormBounds
    """
    if name == "eps":
        return eps_norm(tensor, seed=seed)
    if name == "pi":
        return pi_bounds(tensor, seed=seed)
    if name in ("gp", "dp", "wp"):
        return laprete_bounds(tensor, f"{name[0]}_p", p, seed=seed)
    if name == "phi":
        eps = eps_norm(tensor, seed=seed)
        params = RegularityParams(p, q).require_ordered()
        value, representation = best_representation(phi_objective(params.p, params.q), tensor)
        return TensorNormBounds("phi_pq", eps.lower, value, eps.lower_certificate,
                                [(representation.xs, representation.ys)], LP_TOLERANCE)
    if name == "rpq":
        return r_pq_bounds(tensor, p, q, seed=seed)
    if name in ("hpq", "kpq"):
        return hk_pq_bounds(tensor, name[0], p, q, seed=seed)
    return raise_unknown(name, TENSOR_NORMS)

