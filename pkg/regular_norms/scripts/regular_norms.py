"""
Estimation and certification of rho_{p,q}(T), (p,q)-concavity and (p,q)-convexity
norms and the bilinear form P_T.

rho_{p,q}(T) is the least K with
    ||(sum_i |T x_i|^p)^(1/p)||_Y <= K ||(sum_i |x_i|^q)^(1/q)||_X
for every finite tuple of domain vectors.
"""
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from lattice_spaces.scripts.branch_bound import certify_tuple_ratio
from lattice_spaces.scripts.errors import GuardError, LatticeInputError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.settings import (DEFAULT_MAX_ITER, DEFAULT_RESTARTS, ORACLE_TOLERANCE,
                                             STATIONARITY_TOLERANCE)
from lattice_spaces.scripts.spaces import (Exponent, OperatorMatrix, conjugate_exponent, dual_space, norm,
                                           norm_values)
from lattice_spaces.scripts.vector_calculus import (VectorTuple, batch_psum_norms, check_holder_exponents,
                                                    dual_witness, lattice_sum, norming_tuple,
                                                    psum_norm, sequence_norming)
from regular_norms.scripts.ascent import LATTICE, STRONG, RatioObjective, default_starts, maximize
from regular_norms.scripts.bounds import analytic_rho_upper, concavity_upper, convexity_upper
from regular_norms.scripts.estimates import (NO_UPPER, ORACLE_EXACT, NormEstimate, RegularityParams,
                                             analytic_kind)

ORACLE_SIZE_LIMIT = 12
DEFAULT_GRID = 1e-3


def _check_tuple_size(tuple_size):
    if int(tuple_size) < 1:
        raise LatticeInputError(f"tuple_size must be at least 1, got {tuple_size}")
    return int(tuple_size)


def _upper(bound):
    value, name = bound
    if name is None:
        return math.inf, NO_UPPER
    return value, analytic_kind(name)


def _estimate(lower, witness, bound):
    upper, kind = _upper(bound)
    return NormEstimate(lower, witness, upper, kind)


def rho_lower_bound(operator, params, tuple_size, seed=0, restarts=DEFAULT_RESTARTS):
    """Best rho_{p,q} ratio over tuples of at most tuple_size members.

    The ratio is maximized by alternating ascent from the operator-norm witness, the
    coordinate basis and seeded Gaussian tuples. The upper bound is the smallest
    analytic bound that applies.

    Args:
        operator (OperatorMatrix): T
        params (RegularityParams): exponents with q <= p
        tuple_size (int): number of members
        seed (int): seed of the random starts
        restarts (int): number of random starts

    Returns:
        NormEstimate with a VectorTuple witness
    """
    params = params.require_ordered()
    size = _check_tuple_size(tuple_size)
    objective = RatioObjective(operator, params.p, params.q)
    result = maximize(objective, 1, size, seed=seed, restarts=restarts)
    witness = VectorTuple(operator.domain, result.witness[0])
    bound = analytic_rho_upper(operator, params.p, params.q, seed=seed)
    return _estimate(result.value, witness, bound)


def _enumerate_vertices(operator, params, tuple_size):
    """Exact maximum over the vertices of polyhedral unit balls, or None."""
    domain = operator.domain
    atoms = domain.atom_count
    if domain.is_weighted_lr and domain.exponent == Exponent(1.0):
        columns = norm_values(operator.codomain, operator.entries.T) / domain.weight_array
        atom = int(np.argmax(columns))
        witness = np.zeros((tuple_size, atoms))
        witness[0, atom] = 1.0
        return float(columns[atom]), witness
    if not domain.is_sup_normed():
        return None
    if params.q.infinite:
        patterns = np.array([(1.0,) + rest for rest in product((1.0, -1.0), repeat=tuple_size * atoms - 1)])
        tuples = patterns.reshape(-1, tuple_size, atoms)
    elif params.q == Exponent(1.0):
        vertices = [(member, sign) for member in range(tuple_size) for sign in (1.0, -1.0)]
        choices = [vertices[::2]] + [vertices] * (atoms - 1)
        tuples = np.zeros((int(np.prod([len(c) for c in choices])), tuple_size, atoms))
        for index, combination in enumerate(product(*choices)):
            for atom, (member, sign) in enumerate(combination):
                tuples[index, member, atom] = sign
    else:
        return None
    ratios = batch_psum_norms(operator.codomain, operator.apply(tuples), params.p) \
        / batch_psum_norms(domain, tuples, params.q)
    best = int(np.argmax(ratios))
    return float(ratios[best]), tuples[best]


def rho_oracle(operator, params, tuple_size, grid=DEFAULT_GRID):
    """Exhaustive reference value of the rho ratio over tuples of the given size.

    Polyhedral cases (l_1 domains; sup-normed domains with q in {1, ∞}) are solved by
    vertex enumeration; every other case by branch-and-bound on the cube surface
    with target width grid.

    Args:
        operator (OperatorMatrix): T
        params (RegularityParams): exponents with q <= p
        tuple_size (int): number of members
        grid (float): target width of the interval

    Returns:
        NormEstimate; upper_kind is OracleExact when the interval closed
    """
    params = params.require_ordered()
    size = _check_tuple_size(tuple_size)
    if operator.domain.atom_count * size > ORACLE_SIZE_LIMIT:
        raise GuardError("oracle_size",
                         f"domain atoms x tuple size = {operator.domain.atom_count * size} "
                         f"exceeds {ORACLE_SIZE_LIMIT}")
    exact = _enumerate_vertices(operator, params, size)
    if exact is not None:
        value, witness = exact
        return NormEstimate(value, VectorTuple(operator.domain, witness), value, ORACLE_EXACT)
    prior, _ = analytic_rho_upper(operator, params.p, params.q)
    certificate = certify_tuple_ratio(operator, params.p, params.q, size, width=grid, a_priori_upper=prior)
    kind = ORACLE_EXACT if certificate.converged else analytic_kind("partial_branch_and_bound")
    return NormEstimate(certificate.lower, VectorTuple(operator.domain, certificate.witness),
                        certificate.upper, kind)


def rho_growth_witness(operator, params, x, n):
    """Ratio of the constant tuple (x, ..., x) for p < q, equal to n^(1/p-1/q) ||Tx||/||x||.

    Args:
        operator (OperatorMatrix): T
        params (RegularityParams): exponents with p < q
        x (array-like): domain vector with Tx != 0
        n (int): number of copies

    Returns:
        float
    """
    if not params.p < params.q:
        raise LatticeInputError(f"the growth witness needs p < q, got p={params.p}, q={params.q}")
    x = np.asarray(x, dtype=float)
    image = operator.apply(x)
    if not np.any(image):
        raise LatticeInputError("the growth witness needs Tx != 0")
    copies = _check_tuple_size(n)
    images = VectorTuple(operator.codomain, np.tile(image, (copies, 1)))
    inputs = VectorTuple(operator.domain, np.tile(x, (copies, 1)))
    return psum_norm(images, params.p) / psum_norm(inputs, params.q)


def concavity_norm(operator, p, q, tuple_size, seed=0, restarts=DEFAULT_RESTARTS):
    """(p,q)-concavity norm: sup (sum ||T x_i||^p)^(1/p) / ||(sum |x_i|^q)^(1/q)||."""
    params = RegularityParams(p, q).require_ordered()
    size = _check_tuple_size(tuple_size)
    objective = RatioObjective(operator, params.p, params.q, numerator=STRONG, denominator=LATTICE)
    result = maximize(objective, 1, size, seed=seed, restarts=restarts)
    witness = VectorTuple(operator.domain, result.witness[0])
    return _estimate(result.value, witness, concavity_upper(operator, params.p, params.q))


def convexity_norm(operator, p, q, tuple_size, seed=0, restarts=DEFAULT_RESTARTS):
    """(p,q)-convexity norm: sup ||(sum |T x_i|^p)^(1/p)|| / (sum ||x_i||^q)^(1/q)."""
    params = RegularityParams(p, q).require_ordered()
    size = _check_tuple_size(tuple_size)
    objective = RatioObjective(operator, params.p, params.q, numerator=LATTICE, denominator=STRONG)
    result = maximize(objective, 1, size, seed=seed, restarts=restarts)
    witness = VectorTuple(operator.domain, result.witness[0])
    return _estimate(result.value, witness, convexity_upper(operator, params.p, params.q))


def bilinear_exponent(r, s):
    """The p with 1/r = 1/p + 1/s."""
    r, s = Exponent.of(r), Exponent.of(s)
    reciprocal = r.reciprocal - s.reciprocal
    if reciprocal < -1e-12:
        raise LatticeInputError(f"1/r - 1/s must be nonnegative, got r={r}, s={s}")
    return Exponent.infinity() if reciprocal <= 1e-12 else Exponent(1.0 / reciprocal)


def bilinear_value(operator, xs, dual_ys, r):
    """∫(sum_i |T x_i · y'_i|^r)^(1/r) dν."""
    codomain = operator.codomain
    products = operator.apply(xs) * dual_ys
    return float(np.dot(codomain.weight_array, lattice_sum(products, r, axis=0)))


def _bilinear_climb(operator, xs, p, q, r, s, max_iter, tol):
    domain, codomain = operator.domain, operator.codomain
    xs = xs / psum_norm(VectorTuple(domain, xs), q)
    value, best = -1.0, None
    for _ in range(max_iter):
        images = VectorTuple(codomain, operator.apply(xs))
        if not np.any(images.members):
            return 0.0, xs, np.zeros_like(images.members)
        ys = dual_witness(codomain, images, p, r, s).members * np.sign(images.members)
        current = bilinear_value(operator, xs, ys, r)
        if best is not None and current <= value * (1 + tol):
            break
        value, best = current, (xs, ys)
        products = images.members * ys
        weights = sequence_norming(products, r, axis=0) * np.sign(products)
        pulled = operator.adjoint_apply(weights * ys)
        xs = norming_tuple(dual_space(domain), VectorTuple(dual_space(domain), pulled),
                           conjugate_exponent(q)).members
    return value, best[0], best[1]


def bilinear_PT_norm(operator, r, q, s, tuple_size, seed=0, restarts=DEFAULT_RESTARTS,
                     max_iter=DEFAULT_MAX_ITER, tol=STATIONARITY_TOLERANCE):
    """Continuity constant of P_T(x, y') = sum_i T x_i · y'_i e_i into L1(ν, l_r).

    The x-tuples range over the unit ball of X(l_q) and the y'-tuples over the unit
    ball of Y'(l_s). With 1/r = 1/p + 1/s the constant equals rho_{p,q}(T); the
    y'-step is the exact dual witness and the x-step maximizes the linearization.

    Args:
        operator (OperatorMatrix): T
        r, q, s (Exponent): exponents with 1/r - 1/s = 1/p and q <= p
        tuple_size (int): number of members
        seed (int): seed of the random starts
        restarts (int): number of random starts

    Returns:
        NormEstimate with the x-tuple as witness
    """
    p = bilinear_exponent(r, s)
    r, p, s = check_holder_exponents(r, p, s)
    params = RegularityParams(p, q).require_ordered()
    size = _check_tuple_size(tuple_size)
    if operator.is_zero():
        witness = VectorTuple(operator.domain, np.eye(size, operator.domain.atom_count))
        return NormEstimate(0.0, witness, 0.0, ORACLE_EXACT)
    objective = RatioObjective(operator, p, params.q)
    best_value, best_xs = -1.0, None
    for start in default_starts(objective, 1, size, seed, restarts):
        value, xs, _ = _bilinear_climb(operator, start[0], p, params.q, r, s, max_iter, tol)
        if value > best_value:
            best_value, best_xs = value, xs
    bound = analytic_rho_upper(operator, p, params.q, seed=seed)
    return _estimate(max(best_value, 0.0), VectorTuple(operator.domain, best_xs), bound)


def single_vector_ratio(operator, x):
    """||T x|| / ||x||."""
    return norm(operator.codomain, operator.apply(x)) / norm(operator.domain, x)


def operator_norm_estimate(operator, seed=0):
    """||T|| as a NormEstimate."""
    bounds = operator_norm_bounds(operator, seed=seed)
    kind = ORACLE_EXACT if bounds.exact else analytic_kind(bounds.method)
    return NormEstimate(bounds.lower, bounds.witness, bounds.upper, kind, ORACLE_TOLERANCE)


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class CompositionBound:
    """
    The bound rho_{p,q}(S T) <= M^{(p)}(S) K_{p,q}(T).

    convexity (NormEstimate): (p,p)-convexity norm of S
    concavity (NormEstimate): (p,q)-concavity norm of T
    value (float): product of the upper bounds, or of the lower bounds when an
        upper bound is missing
    certified (bool): True when value is a product of upper bounds
    """
    convexity: NormEstimate
    concavity: NormEstimate
    value: float
    certified: bool


def composition_bound(left, right, p, q, tuple_size, seed=0, restarts=DEFAULT_RESTARTS):
    """Bound for rho_{p,q} of the composition left ∘ right.

    Args:
        left (OperatorMatrix): S, applied second
        right (OperatorMatrix): T, applied first
        p, q (Exponent): exponents with q <= p
        tuple_size (int): tuple size of both estimators
        seed (int): seed of the random starts
        restarts (int): number of random starts

    Returns:
        CompositionBound
    """
    convexity = convexity_norm(left, p, p, tuple_size, seed=seed, restarts=restarts)
    concavity = concavity_norm(right, p, q, tuple_size, seed=seed, restarts=restarts)
    certified = math.isfinite(convexity.upper) and math.isfinite(concavity.upper)
    value = convexity.upper * concavity.upper if certified else convexity.lower * concavity.lower
    return CompositionBound(convexity, concavity, value, certified)


def compose(left, right):
    """The operator left ∘ right."""
    if left.domain.atom_count != right.codomain.atom_count:
        raise LatticeInputError("operators cannot be composed: dimension mismatch")
    return OperatorMatrix(right.domain, left.codomain, left.entries @ right.entries)
