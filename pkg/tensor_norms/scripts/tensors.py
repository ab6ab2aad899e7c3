"""
Finite tensors x_1 ⊗ y_1 + ... + x_n ⊗ y_n between two function spaces and the
sequence norms their representations are measured with.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from lattice_spaces.scripts.errors import CertificationError, LatticeInputError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.serialization import space_from_dict, space_to_dict
from lattice_spaces.scripts.settings import ORACLE_TOLERANCE
from lattice_spaces.scripts.spaces import (Exponent, FunctionSpace, OperatorMatrix, conjugate_exponent,
                                           dual_space, norm_values)
from lattice_spaces.scripts.vector_calculus import lattice_sum

REBALANCE_TOLERANCE = 1e-12


def _terms(space, members):
    array = np.array(members, dtype=float)
    if array.size == 0:
        return np.zeros((0, space.atom_count))
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2 or array.shape[1] != space.atom_count:
        raise LatticeInputError(
            f"tensor terms have shape {array.shape}, expected (n, {space.atom_count})")
    return array


@dataclass(frozen=True, eq=False)
class Tensor:
    """
    The element sum_i x_i ⊗ y_i of left ⊗ right.

    left_space (FunctionSpace): space of the x_i
    right_space (FunctionSpace): space of the y_i
    xs (ndarray): shape (n, left atoms)
    ys (ndarray): shape (n, right atoms)
    """
    left_space: FunctionSpace
    right_space: FunctionSpace
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = _terms(self.left_space, self.xs)
        ys = _terms(self.right_space, self.ys)
        if xs.shape[0] != ys.shape[0]:
            raise LatticeInputError(f"{xs.shape[0]} left terms but {ys.shape[0]} right terms")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_matrix(cls, left_space, right_space, matrix):
        """The row representation sum_a e_a ⊗ z[a, :] of a coefficient matrix."""
        matrix = np.asarray(matrix, dtype=float)
        return cls(left_space, right_space, np.eye(left_space.atom_count), matrix)

    @property
    def rank_bound(self):
        """Number of terms."""
        return self.xs.shape[0]

    def canonical_matrix(self):
        """z[a][b] = sum_i x_i[a] y_i[b]."""
        return canonical_matrix(self)

    def with_terms(self, xs, ys):
        """Another representation on the same spaces."""
        return Tensor(self.left_space, self.right_space, xs, ys)

    def scaled(self, factor):
        """factor · z."""
        return self.with_terms(factor * self.xs, self.ys)

    def __add__(self, other):
        """Concatenated representation of the sum."""
        return self.with_terms(np.vstack([self.xs, other.xs]), np.vstack([self.ys, other.ys]))


def canonical_matrix(tensor):
    """Representation independent form of a tensor.

    Args:
        tensor (Tensor): z

    Returns:
        ndarray of shape (left atoms, right atoms)
    """
    return tensor.xs.T @ tensor.ys


def pairing_operator(tensor, functional):
    """The map left -> dual_space(right) whose bilinear form is u^T G v.

    A coefficient matrix G pairs with tensors through the plain trace sum
    G[a][b] z[a][b]; as an operator it sends u to the functional (G^T u) / w_right.

    Args:
        tensor (Tensor): fixes the two spaces
        functional (ndarray): G, shape (left atoms, right atoms)

    Returns:
        OperatorMatrix
    """
    right = tensor.right_space
    entries = (np.asarray(functional, dtype=float) / right.weight_array[None, :]).T
    return OperatorMatrix(tensor.left_space, dual_space(right), entries)


def operator_functional(operator):
    """The coefficient matrix G of an operator T: X -> Y as a functional on X ⊗ Y'.

    <T, x ⊗ y'> = <T x, y'> in the pairing of Y, so G = T^T diag(w_Y).
    """
    return operator.entries.T * operator.codomain.weight_array[None, :]


def trace_pairing(functional, tensor):
    """sum_ab G[a][b] z[a][b]."""
    return float(np.sum(np.asarray(functional, dtype=float) * canonical_matrix(tensor)))


def strong_norm(space, members, p):
    """(sum_i ||x_i||^p)^(1/p)."""
    members = np.asarray(members, dtype=float)
    if members.shape[0] == 0:
        return 0.0
    return float(lattice_sum(norm_values(space, members), p, axis=0))


def lattice_norm(space, members, p):
    """||(sum_i |x_i|^p)^(1/p)||."""
    members = np.asarray(members, dtype=float)
    if members.shape[0] == 0:
        return 0.0
    return float(norm_values(space, lattice_sum(members, p, axis=0)))


def weak_norm(space, members, p, rigorous=True, seed=0):
    """sup over the dual unit ball of (sum_i |<x', x_i>|^p)^(1/p).

    This is the norm of a -> sum_i a_i x_i from l_{p'}^n into the space; rigorous
    returns the certified upper bound, otherwise the attained lower bound.

    Args:
        space (FunctionSpace): the space of the members
        members (ndarray): shape (n, atoms)
        p (Exponent): exponent of the weak sum
        rigorous (bool): upper bound when set, lower bound otherwise
        seed (int): seed of the operator norm search

    Returns:
        float
    """
    members = np.asarray(members, dtype=float)
    if members.shape[0] == 0 or not np.any(members):
        return 0.0
    coefficients = FunctionSpace.lr(conjugate_exponent(p), atoms=members.shape[0])
    bounds = operator_norm_bounds(OperatorMatrix(coefficients, space, members.T), seed=seed,
                                  rigorous=rigorous)
    return bounds.upper if rigorous else bounds.lower


@dataclass(frozen=True)
class SequenceObjective:
    """
    A product c(x_1, ..., x_n) · d(y_1, ..., y_n) of two sequence norms.

    left (string): "strong", "weak" or "lattice" applied to the x-side
    left_exponent (Exponent): exponent of the x-side
    right (string): "strong", "weak" or "lattice" applied to the y-side
    right_exponent (Exponent): exponent of the y-side
    name (string): label. E.g.: phi_pq
    """
    left: str
    left_exponent: Exponent
    right: str
    right_exponent: Exponent
    name: str = "objective"

    def __post_init__(self):
        object.__setattr__(self, "left_exponent", Exponent.of(self.left_exponent))
        object.__setattr__(self, "right_exponent", Exponent.of(self.right_exponent))

    @staticmethod
    def _side(kind, space, members, p, rigorous):
        if kind == "strong":
            return strong_norm(space, members, p)
        if kind == "lattice":
            return lattice_norm(space, members, p)
        if kind == "weak":
            return weak_norm(space, members, p, rigorous=rigorous)
        raise LatticeInputError(f"unknown sequence norm {kind!r}")

    def value(self, tensor, xs=None, ys=None, rigorous=True):
        """Objective of a representation (the tensor's own one by default)."""
        xs = tensor.xs if xs is None else xs
        ys = tensor.ys if ys is None else ys
        left = self._side(self.left, tensor.left_space, xs, self.left_exponent, rigorous)
        if left == 0:
            return 0.0
        return left * self._side(self.right, tensor.right_space, ys, self.right_exponent, rigorous)


def phi_objective(p, q):
    """||(sum |x_i|^q)^(1/q)|| · ||(sum |y_i|^p')^(1/p')||."""
    return SequenceObjective("lattice", q, "lattice", conjugate_exponent(p), "phi_pq")


def delta_objective(p, q):
    """(sum ||x_i||^q)^(1/q) · ||(sum |y_i|^p')^(1/p')||."""
    return SequenceObjective("strong", q, "lattice", conjugate_exponent(p), "delta_pq")


def iota_objective(p, q):
    """||(sum |x_i|^q)^(1/q)|| · (sum ||y_i||^p')^(1/p')."""
    return SequenceObjective("lattice", q, "strong", conjugate_exponent(p), "iota_pq")


LAPRESTE_OBJECTIVES = {
    "g_p": lambda p: SequenceObjective("strong", p, "weak", conjugate_exponent(p), "g_p"),
    "d_p": lambda p: SequenceObjective("weak", p, "strong", conjugate_exponent(p), "d_p"),
    "w_p": lambda p: SequenceObjective("weak", p, "weak", conjugate_exponent(p), "w_p"),
}


def rebalance(objective, tensor):
    """Minimizes the objective over x_i -> e^u_i x_i, y_i -> e^-u_i y_i.

    The objective is convex in u; the first term is pinned because a common scale
    does not change it. The search uses the cheap estimate of weak norms and the
    returned value re-evaluates the best representation rigorously.

    Args:
        objective (SequenceObjective): what to minimize
        tensor (Tensor): starting representation

    Returns:
        (float, Tensor): objective value and the rebalanced representation
    """
    active = np.any(tensor.xs, axis=1) & np.any(tensor.ys, axis=1)
    tensor = tensor.with_terms(tensor.xs[active], tensor.ys[active])
    start = objective.value(tensor)
    count = tensor.rank_bound
    if count < 2 or start == 0:
        return start, tensor

    def scaled(shift):
        factors = np.exp(np.concatenate([[0.0], shift]))
        return tensor.xs * factors[:, None], tensor.ys / factors[:, None]

    def loss(shift):
        xs, ys = scaled(shift)
        value = objective.value(tensor, xs, ys, rigorous=False)
        return math.log(value) if value > 0 else -1e300

    result = optimize.minimize(loss, np.zeros(count - 1), method="Nelder-Mead",
                               options={"xatol": 1e-10, "fatol": REBALANCE_TOLERANCE,
                                        "maxiter": 4000 * count, "adaptive": count > 3})
    candidate = tensor.with_terms(*scaled(result.x))
    value = objective.value(candidate)
    if value < start:
        return value, candidate
    return start, tensor


def representations(tensor):
    """The given representation plus the SVD, row and column representations."""
    matrix = canonical_matrix(tensor)
    found = [tensor]
    if not np.any(matrix):
        return found
    u, singular, vt = np.linalg.svd(matrix, full_matrices=False)
    keep = singular > 1e-14 * singular[0]
    found.append(tensor.with_terms((u[:, keep] * singular[keep]).T, vt[keep]))
    rows = np.any(matrix, axis=1)
    found.append(tensor.with_terms(np.eye(matrix.shape[0])[rows], matrix[rows]))
    columns = np.any(matrix, axis=0)
    found.append(tensor.with_terms(matrix.T[columns], np.eye(matrix.shape[1])[columns]))
    return found


def best_representation(objective, tensor):
    """Smallest rebalanced objective over the candidate representations.

    Returns:
        (float, Tensor)
    """
    best_value, best = math.inf, tensor
    for candidate in representations(tensor):
        value, balanced = rebalance(objective, candidate)
        if value < best_value:
            best_value, best = value, balanced
    return best_value, best


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class TensorNormBounds:
    """
    Certified interval lower <= norm(z) <= upper.

    norm_name (string): E.g.: pi, r_pq, g_p
    lower (float): value of the lower certificate on z
    upper (float): objective of the upper certificate
    lower_certificate (ndarray): coefficient matrix G with dual norm at most one
    upper_certificate (list): representations (xs, ys) whose objectives sum to upper
    tolerance (float): relative slack between lower and upper
    """
    norm_name: str
    lower: float
    upper: float
    lower_certificate: Optional[np.ndarray] = None
    upper_certificate: list = field(default_factory=list)
    tolerance: float = ORACLE_TOLERANCE

    def __post_init__(self):
        lower, upper = float(self.lower), float(self.upper)
        if lower > upper + self.tolerance * max(1.0, upper):
            raise CertificationError(f"{self.norm_name}: lower bound {lower} exceeds upper bound {upper}")
        object.__setattr__(self, "lower", max(lower, 0.0))
        object.__setattr__(self, "upper", upper)

    @property
    def width(self):
        """upper - lower."""
        return self.upper - self.lower

    def to_dict(self):
        """Report form."""
        return {
            "norm": self.norm_name,
            "lower": self.lower,
            "upper": self.upper,
            "tolerance": self.tolerance,
            "lower_certificate": self.lower_certificate,
            "upper_certificate": [{"xs": xs, "ys": ys} for xs, ys in self.upper_certificate],
        }


def tensor_to_dict(tensor):
    """JSON form {left, right, xs, ys}."""
    return {
        "left": space_to_dict(tensor.left_space),
        "right": space_to_dict(tensor.right_space),
        "xs": tensor.xs.tolist(),
        "ys": tensor.ys.tolist(),
    }


def tensor_from_dict(data):
    """Reads {left, right, xs, ys} or {left, right, matrix}.

    Args:
        data (dict): decoded JSON

    Returns:
        Tensor
    """
    try:
        left, right = space_from_dict(data["left"]), space_from_dict(data["right"])
    except KeyError as error:
        raise LatticeInputError(f"tensor is missing the field {error}") from error
    if "matrix" in data:
        return Tensor.from_matrix(left, right, data["matrix"])
    if "xs" not in data or "ys" not in data:
        raise LatticeInputError("tensor needs either matrix or xs and ys")
    return Tensor(left, right, data["xs"], data["ys"])
