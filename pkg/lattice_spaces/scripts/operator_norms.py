"""
Two-sided operator norm bounds between function spaces.
"""
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from lattice_spaces.scripts.branch_bound import certify_tuple_ratio
from lattice_spaces.scripts.spaces import (Exponent, dual_maximizer, dual_norm, norm, norm_values,
                                           norming_functional)

SIGN_ENUMERATION_LIMIT = 16
CERTIFY_ATOM_LIMIT = 6
POWER_ITERATIONS = 500


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class OperatorNormBounds:
    """
    Bounds lower <= ||T|| <= upper with a vector attaining lower.

    lower (float): ||T x|| / ||x|| at the witness
    upper (float): certified upper bound
    witness (ndarray): domain vector
    method (string): how the upper bound was obtained. E.g.: column_maximum
    """
    lower: float
    upper: float
    witness: np.ndarray
    method: str

    @property
    def exact(self):
        """True when the bounds come from a closed form or exhaustive search."""
        return self.method in ("zero", "column_maximum", "row_dual_norm", "sign_enumeration",
                               "spectral", "branch_and_bound")


def _ratio(operator, x):
    size = norm(operator.domain, x)
    if size == 0:
        return 0.0
    return norm(operator.codomain, operator.apply(x)) / size


def power_iteration(operator, start, max_iter=POWER_ITERATIONS, tol=1e-12):
    """Nonlinear power method for ||T||: x -> dual maximizer of T^x(norming functional of Tx).

    Args:
        operator (OperatorMatrix): T
        start (ndarray): nonzero start vector
        max_iter (int): iteration cap
        tol (float): relative stationarity tolerance

    Returns:
        (float, ndarray): best ratio and the vector attaining it
    """
    x = start / norm(operator.domain, start)
    best, best_x = _ratio(operator, x), x
    for _ in range(max_iter):
        image = operator.apply(x)
        if not np.any(image):
            break
        functional = norming_functional(operator.codomain, image)
        x = dual_maximizer(operator.domain, operator.adjoint_apply(functional))
        value = _ratio(operator, x)
        if value <= best * (1 + tol):
            if value > best:
                best, best_x = value, x
            break
        best, best_x = value, x
    return best, best_x


def _lower_by_ascent(operator, seed, restarts):
    rng = np.random.default_rng(seed)
    atoms = operator.domain.atom_count
    starts = list(np.eye(atoms)) + [rng.standard_normal(atoms) for _ in range(restarts)]
    best, best_x = 0.0, starts[0]
    for start in starts:
        value, x = power_iteration(operator, start)
        if value > best:
            best, best_x = value, x
    return best, best_x


def _exact_bounds(operator):
    domain, codomain = operator.domain, operator.codomain
    entries = operator.entries
    if domain.is_weighted_lr and domain.exponent == Exponent(1.0):
        values = norm_values(codomain, entries.T) / domain.weight_array
        atom = int(np.argmax(values))
        witness = np.zeros(domain.atom_count)
        witness[atom] = 1.0
        return float(values[atom]), witness, "column_maximum"
    if codomain.is_sup_normed():
        rows = entries / domain.weight_array
        values = [dual_norm(domain, row) for row in rows]
        atom = int(np.argmax(values))
        return float(values[atom]), dual_maximizer(domain, rows[atom]), "row_dual_norm"
    if domain.is_sup_normed() and domain.atom_count <= SIGN_ENUMERATION_LIMIT:
        signs = np.array([(1.0,) + rest for rest in product((1.0, -1.0), repeat=domain.atom_count - 1)])
        values = norm_values(codomain, operator.apply(signs))
        index = int(np.argmax(values))
        return float(values[index]), signs[index], "sign_enumeration"
    two = Exponent(2.0)
    if domain.exponent == two and codomain.exponent == two:
        left = np.sqrt(codomain.weight_array)[:, None]
        right = 1.0 / np.sqrt(domain.weight_array)
        _, singular, vt = np.linalg.svd(left * entries * right)
        return float(singular[0]), vt[0] * right, "spectral"
    return None


def riesz_upper(operator):
    """||T||_r <= ||T||_1^(1/r) ||T||_∞^(1-1/r) between weighted L_r spaces of one exponent."""
    domain, codomain = operator.domain, operator.codomain
    r = domain.exponent
    if r is None or codomain.exponent != r or r.infinite:
        return math.inf
    magnitudes = np.abs(operator.entries)
    one = float(np.max((codomain.weight_array[:, None] * magnitudes).sum(axis=0) / domain.weight_array))
    sup = float(np.max(magnitudes.sum(axis=1)))
    return one ** r.reciprocal * sup ** (1.0 - r.reciprocal)


def column_sum_upper(operator):
    """sum_j ||T e_j|| · ||e_j / w_j||_{X'}, valid for every pair of spaces."""
    domain = operator.domain
    columns = norm_values(operator.codomain, operator.entries.T)
    coordinates = np.diag(1.0 / domain.weight_array)
    return float(sum(c * dual_norm(domain, e) for c, e in zip(columns, coordinates)))


def operator_norm_bounds(operator, seed=0, restarts=8, rigorous=True):
    """Lower and upper bounds for ||T: X -> Y||.

    Closed forms cover l_1 domains, sup-normed codomains, small sup-normed domains and
    weighted L_2 pairs. Otherwise the lower bound comes from the power method and the
    upper bound from the Riesz convexity and column-sum bounds, sharpened by
    branch-and-bound on small domains when rigorous is set.

    Args:
        operator (OperatorMatrix): T
        seed (int): seed of the random restarts
        restarts (int): number of random power-method starts
        rigorous (bool): run branch-and-bound on small domains

    Returns:
        OperatorNormBounds
    """
    atoms = operator.domain.atom_count
    if operator.is_zero():
        return OperatorNormBounds(0.0, 0.0, np.eye(atoms)[0], "zero")
    exact = _exact_bounds(operator)
    if exact is not None:
        value, witness, method = exact
        lower = _ratio(operator, witness)
        return OperatorNormBounds(min(lower, value), max(value, lower), witness, method)

    lower, witness = _lower_by_ascent(operator, seed, restarts)
    upper, method = column_sum_upper(operator), "column_sum"
    riesz = riesz_upper(operator)
    if riesz < upper:
        upper, method = riesz, "riesz_convexity"
    if rigorous and atoms <= CERTIFY_ATOM_LIMIT:
        certificate = certify_tuple_ratio(operator, Exponent(1.0), Exponent(1.0), 1,
                                          width=1e-6 * max(upper, 1.0), max_boxes=20_000,
                                          a_priori_upper=upper)
        if certificate.lower > lower:
            lower, witness = certificate.lower, certificate.witness[0]
        if certificate.upper < upper:
            upper = certificate.upper
            method = "branch_and_bound" if certificate.converged else "branch_and_bound_partial"
    return OperatorNormBounds(lower, max(upper, lower), witness, method)
