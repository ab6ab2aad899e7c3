"""
Extension of (∞,q)-regular operators from a subspace to the whole lattice.

An operator on X_0 = span(b_1, ..., b_d) is stored by its images T b_j. Every
extension has the form E = E_0 + W N^T, where E_0 is one extension and the columns
of N span the vectors orthogonal to the basis, so the search for a small
rho_{∞,q}(E) is an unconstrained convex problem in W. The search starts from the
row by row Hahn-Banach extension, which is already optimal for one-dimensional
codomains, for q = ∞ and for Hilbert spaces.

For L_q spaces the dyadic maps P_n, J_n reduce an operator X_0 -> L_q^M to the
finite problem X_0 -> l_q^(2^n), extend it and lift the result back.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize
from scipy.optimize import linprog

from lattice_spaces.scripts.errors import ExtensionError, LatticeInputError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.settings import ESTIMATOR_TOLERANCE, RESIDUAL_TOLERANCE
from lattice_spaces.scripts.spaces import (Exponent, FunctionSpace, OperatorMatrix, conjugate_exponent,
                                           coords_of, dual_norm, norm)
from lattice_spaces.scripts.vector_calculus import lattice_sum
from extension.scripts.dyadic import DyadicLevel, dyadic_Jn, dyadic_Pn
from regular_norms.scripts.estimates import ORACLE_EXACT, NormEstimate, RegularityParams, analytic_kind
from regular_norms.scripts.regular_norms import rho_lower_bound

RANK_TOLERANCE = 1e-10
RHO_RESTARTS = 4
RESTRICTED_RESTARTS = 8
POLISH_ITERATIONS = 200


@dataclass(frozen=True, eq=False)
class Subspace:
    """
    The span of linearly independent vectors.

    ambient (FunctionSpace): the lattice X
    basis (ndarray): d x atoms, row j is b_j
    """
    ambient: FunctionSpace
    basis: np.ndarray

    def __post_init__(self):
        rows = [coords_of(self.ambient, member) for member in self.basis]
        if not rows:
            raise LatticeInputError("a subspace needs at least one basis vector")
        basis = np.array(rows, dtype=float)
        rank = np.linalg.matrix_rank(basis, tol=RANK_TOLERANCE * max(1.0, np.abs(basis).max()))
        if rank < len(rows):
            raise ExtensionError(f"basis of {len(rows)} vectors has rank {rank}; "
                                 "the agreement constraints are rank defective")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dimension(self):
        """d."""
        return self.basis.shape[0]

    @property
    def is_whole(self):
        """True when the basis spans the ambient space."""
        return self.dimension == self.ambient.atom_count

    def members(self, coefficients):
        """Ambient coordinates of sum_j c_j b_j, for one or several coefficient rows."""
        return np.asarray(coefficients, dtype=float) @ self.basis

    def complement(self):
        """atoms x (atoms - d) matrix whose columns are orthogonal to every b_j."""
        return linalg.null_space(self.basis)


@dataclass(frozen=True, eq=False)
class RestrictedOperator:
    """
    A linear map T : X_0 -> Y given on a basis.

    subspace (Subspace): X_0
    codomain (FunctionSpace): Y
    images (ndarray): codomain atoms x d, column j is T b_j
    """
    subspace: Subspace
    codomain: FunctionSpace
    images: np.ndarray

    def __post_init__(self):
        images = np.array(self.images, dtype=float)
        if images.ndim == 1:
            images = images.reshape(self.codomain.atom_count, -1)
        expected = (self.codomain.atom_count, self.subspace.dimension)
        if images.shape != expected:
            raise LatticeInputError(f"images have shape {images.shape}, expected {expected}")
        images.setflags(write=False)
        object.__setattr__(self, "images", images)

    def apply(self, coefficients):
        """Images of sum_j c_j b_j."""
        return np.asarray(coefficients, dtype=float) @ self.images.T

    def is_zero(self):
        """True when T vanishes."""
        return not np.any(self.images)

    def agreement_residual(self, operator):
        """Largest entry of |E b_j - T b_j| over the basis."""
        return float(np.abs(operator.entries @ self.subspace.basis.T - self.images).max())


def restrict(operator, subspace):
    """The restriction of an ambient operator to X_0."""
    return RestrictedOperator(subspace, operator.codomain, operator.entries @ subspace.basis.T)


def _check_spaces(ambient, codomain, q):
    q = Exponent.of(q)
    if q < 1:
        raise LatticeInputError(f"extensions need q >= 1, got {q}")
    if not ambient.is_weighted_lr or ambient.exponent < q:
        raise LatticeInputError(
            f"the ambient space must be q-convex with constant one (weighted L_r, r >= {q}), "
            f"got {ambient.describe()}")
    if not codomain.is_weighted_lr or codomain.exponent != q:
        raise LatticeInputError(f"the codomain must be an L_{q} space, got {codomain.describe()}")
    return q


def minimal_norm_extension(subspace, values):
    """Functional x' on X with <x', b_j> = values_j and the smallest dual norm.

    l_1 and l_∞ duals are solved as linear programs, l_2 in closed form and every
    other weighted L_s dual as a smooth convex program.

    Args:
        subspace (Subspace): X_0, inside a weighted L_r space
        values (array-like): one value per basis vector

    Returns:
        ndarray in the pairing frame of X
    """
    ambient = subspace.ambient
    if not ambient.is_weighted_lr:
        raise LatticeInputError(f"minimal norm extensions need a weighted L_r space, got {ambient.describe()}")
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != subspace.dimension:
        raise LatticeInputError(f"{values.shape[0]} values for a {subspace.dimension}-dimensional subspace")
    atoms = ambient.atom_count
    if not np.any(values):
        return np.zeros(atoms)
    weights = ambient.weight_array
    constraints = subspace.basis * weights
    s = conjugate_exponent(ambient.exponent)
    if s.infinite:
        cost = np.concatenate([np.zeros(atoms), [1.0]])
        bound_rows = np.block([[np.eye(atoms), -np.ones((atoms, 1))], [-np.eye(atoms), -np.ones((atoms, 1))]])
        result = linprog(cost, A_ub=bound_rows, b_ub=np.zeros(2 * atoms),
                         A_eq=np.hstack([constraints, np.zeros((subspace.dimension, 1))]), b_eq=values,
                         bounds=[(None, None)] * atoms + [(0, None)], method="highs")
        if not result.success:
            raise ExtensionError(f"minimal norm extension failed: {result.message}")
        return result.x[:atoms]
    if s == Exponent(1.0):
        result = linprog(np.concatenate([weights, weights]), A_eq=np.hstack([constraints, -constraints]),
                         b_eq=values, bounds=[(0, None)] * (2 * atoms), method="highs")
        if not result.success:
            raise ExtensionError(f"minimal norm extension failed: {result.message}")
        return result.x[:atoms] - result.x[atoms:]
    gram = subspace.basis @ (weights[:, None] * subspace.basis.T)
    least = subspace.basis.T @ np.linalg.solve(gram, values)
    if s == Exponent(2.0):
        return least
    power = s.value
    result = optimize.minimize(
        lambda e: (float(np.sum(weights * np.abs(e) ** power)),
                   power * weights * np.abs(e) ** (power - 1.0) * np.sign(e)),
        least, jac=True, method="SLSQP",
        constraints=[{"type": "eq", "fun": lambda e: constraints @ e - values, "jac": lambda e: constraints}],
        options={"ftol": 1e-14, "maxiter": 1000})
    candidate = result.x
    if np.abs(constraints @ candidate - values).max() > RESIDUAL_TOLERANCE * max(1.0, np.abs(values).max()):
        return least
    return candidate if dual_norm(ambient, candidate) <= dual_norm(ambient, least) else least


def rho_infinity_q(operator, q, seed=0, restarts=RHO_RESTARTS):
    """Estimate of rho_{∞,q}(T) for T : X -> L_q.

    Exact when the codomain has one atom or q = ∞ (the largest dual norm of a row) and
    when X is an L_q space (the operator norm). Otherwise the regular-norm ascent with
    tuples as long as the codomain, which is all the sup over coordinates can use.

    Args:
        operator (OperatorMatrix): T
        q (Exponent): exponent of the codomain
        seed (int): seed of the estimators
        restarts (int): random starts of the ascent

    Returns:
        NormEstimate
    """
    q = _check_spaces(operator.domain, operator.codomain, q)
    domain = operator.domain
    if operator.is_zero():
        return NormEstimate(0.0, None, 0.0, ORACLE_EXACT)
    if operator.codomain.atom_count == 1 or q.infinite:
        rows = operator.entries / domain.weight_array
        units = np.eye(operator.codomain.atom_count)
        value = max(dual_norm(domain, row) * norm(operator.codomain, unit) for row, unit in zip(rows, units))
        return NormEstimate(value, None, value, ORACLE_EXACT)
    if domain.exponent == q:
        bounds = operator_norm_bounds(operator, seed=seed)
        return NormEstimate(bounds.lower, bounds.witness, bounds.upper, analytic_kind("lattice_exponents"))
    return rho_lower_bound(operator, RegularityParams(Exponent.infinity(), q), operator.codomain.atom_count,
                           seed=seed, restarts=restarts)


def _rho_value(operator, q, seed):
    """Fast lower estimate of rho_{∞,q} used inside the extension search."""
    if operator.is_zero():
        return 0.0
    if operator.codomain.atom_count == 1 or q.infinite:
        return rho_infinity_q(operator, q).lower
    if operator.domain.exponent == q:
        return operator_norm_bounds(operator, seed=seed, restarts=2, rigorous=False).lower
    return rho_lower_bound(operator, RegularityParams(Exponent.infinity(), q), operator.codomain.atom_count,
                           seed=seed, restarts=1).lower


def _rowwise_extension(restricted):
    ambient = restricted.subspace.ambient
    rows = np.array([minimal_norm_extension(restricted.subspace, image) for image in restricted.images])
    return OperatorMatrix(ambient, restricted.codomain, rows * ambient.weight_array)


def _rowwise_is_optimal(restricted, q):
    ambient = restricted.subspace.ambient
    return restricted.codomain.atom_count == 1 or q.infinite \
        or (q == Exponent(2.0) and ambient.exponent == q)


def hahn_banach_extend(T, q, seed=0):
    """An extension E : X -> l_q^n of T : X_0 -> l_q^n with rho_{∞,q}(E) as small as found.

    Args:
        T (RestrictedOperator): the operator on the subspace
        q (Exponent): exponent; X must be q-convex and the codomain an L_q space
        seed (int): seed of the rho estimates

    Returns:
        OperatorMatrix on the ambient space
    """
    subspace = T.subspace
    ambient = subspace.ambient
    q = _check_spaces(ambient, T.codomain, q)
    if T.is_zero():
        return OperatorMatrix(ambient, T.codomain, np.zeros((T.codomain.atom_count, ambient.atom_count)))
    if subspace.is_whole:
        entries = np.linalg.solve(subspace.basis, T.images.T).T
        return OperatorMatrix(ambient, T.codomain, entries)
    extension = _rowwise_extension(T)
    if not _rowwise_is_optimal(T, q):
        extension = _polish(extension, subspace.complement(), q, seed)
    scale = max(1.0, float(np.abs(T.images).max()))
    if T.agreement_residual(extension) > RESIDUAL_TOLERANCE * scale:
        raise ExtensionError(f"extension misses the subspace by {T.agreement_residual(extension):.3g}")
    return extension


def _polish(extension, complement, q, seed):
    """Nelder-Mead descent of the rho estimate over E + W N^T."""
    base = extension.entries
    shape = (base.shape[0], complement.shape[1])

    def objective(free):
        return _rho_value(extension.with_entries(base + free.reshape(shape) @ complement.T), q, seed)

    start_value = objective(np.zeros(np.prod(shape)))
    result = optimize.minimize(objective, np.zeros(np.prod(shape)), method="Nelder-Mead",
                               options={"xatol": 1e-9, "fatol": 1e-12,
                                        "maxiter": POLISH_ITERATIONS * int(np.prod(shape))})
    if result.fun < start_value:
        return extension.with_entries(base + result.x.reshape(shape) @ complement.T)
    return extension


def _restricted_norm_l2(T):
    """||T|_{X_0}|| for L_2 spaces, exact through the Gram matrix of the basis."""
    subspace = T.subspace
    gram = subspace.basis @ (subspace.ambient.weight_array[:, None] * subspace.basis.T)
    factor = np.linalg.cholesky(gram)
    scaled = np.sqrt(T.codomain.weight_array)[:, None] * np.linalg.solve(factor, T.images.T).T
    return float(np.linalg.norm(scaled, 2))


def _tuple_ratio(T, q, coefficients):
    members = T.subspace.members(coefficients)
    denominator = norm(T.subspace.ambient, lattice_sum(members, q, axis=0))
    if denominator <= 0:
        return 0.0
    return norm(T.codomain, lattice_sum(T.apply(coefficients), Exponent.infinity(), axis=0)) / denominator


def restricted_rho_infinity_q(T, q, seed=0, restarts=RESTRICTED_RESTARTS):
    """Lower bound of rho_{∞,q}(T) over tuples taken inside X_0.

    Exact for L_2 spaces. Otherwise the ratio is maximized over tuples of
    coefficient vectors, single vectors when X and the codomain are both L_q.

    Args:
        T (RestrictedOperator): the operator on the subspace
        q (Exponent): exponent
        seed (int): seed of the random starts
        restarts (int): number of random starts

    Returns:
        float
    """
    q = _check_spaces(T.subspace.ambient, T.codomain, q)
    if T.is_zero():
        return 0.0
    ambient = T.subspace.ambient
    if q == Exponent(2.0) and ambient.exponent == q:
        return _restricted_norm_l2(T)
    dimension = T.subspace.dimension
    size = 1 if ambient.exponent == q else T.codomain.atom_count
    starts = []
    for index in range(dimension):
        start = np.zeros((size, dimension))
        start[0, index] = 1.0
        starts.append(start)
    rng = np.random.default_rng(seed)
    starts.extend(rng.standard_normal((restarts, size, dimension)))
    best = 0.0
    for start in starts:
        result = optimize.minimize(lambda c: -_tuple_ratio(T, q, c.reshape(size, dimension)), start.ravel(),
                                   method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13})
        best = max(best, _tuple_ratio(T, q, start), -float(result.fun))
    return best


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class ExtensionRecord:
    """
    Certification of an extension.

    rho_before (float): lower bound of rho_{∞,q} of the operator on X_0
    rho_after (NormEstimate): rho_{∞,q} of the extension
    agreement_residual (float): largest deviation from T on the basis
    """
    rho_before: float
    rho_after: NormEstimate
    agreement_residual: float

    @property
    def ok(self):
        """Agreement within the residual tolerance and no visible growth of rho."""
        return self.agreement_residual <= RESIDUAL_TOLERANCE \
            and self.rho_after.lower <= self.rho_before * (1 + ESTIMATOR_TOLERANCE) + RESIDUAL_TOLERANCE

    def to_dict(self):
        """Report form."""
        return {"rho_before": self.rho_before, "rho_after": self.rho_after.to_dict(),
                "agreement_residual": self.agreement_residual, "ok": self.ok}


def certify_extension(T, extension, q, seed=0):
    """Sandwich rho(T on X_0) <= rho(E) together with the agreement residual."""
    return ExtensionRecord(restricted_rho_infinity_q(T, q, seed=seed), rho_infinity_q(extension, q, seed=seed),
                           T.agreement_residual(extension))


def extend_operator_Lq(T, level, seed=0):
    """Extension of T : X_0 -> L_q^M from a subspace of L_q^N to all of L_q^N.

    T is pushed to l_q^(2^n) by P_n, extended there and lifted back by J_n. At full
    resolution, M = 2^n, J_n P_n is the identity and the result agrees with T.

    Args:
        T (RestrictedOperator): operator into L_q on M atoms of measure 1/M
        level (DyadicLevel|int): the dyadic level; an int takes q from the ambient space
        seed (int): seed of the rho estimates

    Returns:
        OperatorMatrix
    """
    ambient = T.subspace.ambient
    if not isinstance(level, DyadicLevel):
        if not ambient.is_weighted_lr:
            raise LatticeInputError(f"extensions act on L_q spaces, got {ambient.describe()}")
        level = DyadicLevel(level, ambient.exponent)
    q = level.q
    if ambient.exponent != q:
        raise LatticeInputError(f"X_0 must lie in L_{q}, got {ambient.describe()}")
    _check_spaces(ambient, T.codomain, q)
    atoms = T.codomain.atom_count
    if not np.allclose(T.codomain.weight_array, 1.0 / atoms, rtol=1e-12, atol=0.0):
        raise LatticeInputError("the codomain must carry the uniform measure 1/M on its atoms")
    pushed = dyadic_Pn(level, atoms)
    lift = dyadic_Jn(level, atoms)
    finite = RestrictedOperator(T.subspace, pushed.codomain, pushed.entries @ T.images)
    extension = hahn_banach_extend(finite, q, seed=seed)
    return OperatorMatrix(ambient, T.codomain, lift.entries @ extension.entries)

