"""
Pointwise calculus on finite families of lattice vectors.

p-sums, lattice suprema, mixed Köthe-Bochner norms, pointwise products, the
generalized Hölder inequality and the explicit dual witnesses that attain it.
Every quantity is evaluated coordinate by coordinate and only then normed.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np

from lattice_spaces.scripts.errors import LatticeInputError
from lattice_spaces.scripts.spaces import (Exponent, FunctionSpace, LatticeVector, WeightedLr,
                                           conjugate_exponent, dual_norm, dual_space, norm,
                                           norm_values, norming_functional)

RELATION_TOLERANCE = 1e-12
SIGN_ENUMERATION_LIMIT = 16


def _as_members(space, members, ndim):
    if isinstance(members, (list, tuple)):
        members = [m.coords if isinstance(m, LatticeVector) else m for m in members]
    array = np.array(members, dtype=float)
    if array.size == 0:
        array = array.reshape((0,) * (ndim - 1) + (space.atom_count,))
    if array.ndim != ndim or array.shape[-1] != space.atom_count:
        raise LatticeInputError(
            f"members have shape {array.shape}, expected {ndim} axes ending in {space.atom_count} atoms")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class VectorTuple:
    """
    A finite family x_1, ..., x_n of elements of one space.

    space (FunctionSpace): the common space
    members (ndarray): shape (n, atoms); n may be 0
    """
    space: FunctionSpace
    members: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "members", _as_members(self.space, self.members, 2))

    @property
    def size(self):
        """Number of members."""
        return self.members.shape[0]

    def scaled(self, factor):
        """The tuple c·x_1, ..., c·x_n."""
        return VectorTuple(self.space, factor * self.members)

    def member(self, index):
        """The index-th member as a LatticeVector."""
        return LatticeVector(self.space, self.members[index])


@dataclass(frozen=True, eq=False)
class VectorMatrix:
    """
    A rectangular family x_{i,j} of elements of one space.

    space (FunctionSpace): the common space
    members (ndarray): shape (rows, cols, atoms)
    """
    space: FunctionSpace
    members: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "members", _as_members(self.space, self.members, 3))

    @property
    def rows(self):
        """Number of rows n."""
        return self.members.shape[0]

    @property
    def cols(self):
        """Number of columns m."""
        return self.members.shape[1]


# pylint: disable=R0903
@dataclass(frozen=True)
class HolderRecord:
    """
    Both sides of the generalized Hölder inequality.

    lhs (float): L1 norm of the r-sum of the pointwise product
    rhs (float): p-sum norm in X times s-sum norm in X'
    slack (float): rhs - lhs
    """
    lhs: float
    rhs: float
    slack: float


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class SupRepresentation:
    """
    Comparison of a p-sum with the supremum of linear combinations.

    exact (ndarray): the p-sum
    grid_sup (ndarray): coordinatewise max of sum a_i x_i over the grid
    gap (float): largest coordinate deficit, never negative
    """
    exact: np.ndarray
    grid_sup: np.ndarray
    gap: float


def lattice_sum(values, p, axis=0):
    """(sum |v|^p)^(1/p) along an axis, the maximum of |v| for p = ∞.

    Args:
        values (ndarray): array of reals
        p (Exponent|float): exponent, any p > 0
        axis (int): axis that is summed out

    Returns:
        ndarray
    """
    p = Exponent.of(p)
    magnitudes = np.abs(np.asarray(values, dtype=float))
    if magnitudes.shape[axis] == 0:
        return np.zeros(np.delete(magnitudes.shape, axis if axis >= 0 else magnitudes.ndim + axis))
    if p.infinite:
        return magnitudes.max(axis=axis)
    if p.value == 1:
        return magnitudes.sum(axis=axis)
    return (magnitudes ** p.value).sum(axis=axis) ** (1.0 / p.value)


def p_sum(t, p):
    """Coordinatewise p-sum of a tuple; the lattice sup of |x_i| when p = ∞.

    Args:
        t (VectorTuple): the tuple
        p (Exponent|float): exponent

    Returns:
        ndarray
    """
    return lattice_sum(t.members, p, axis=0)


def psum_norm(t, p):
    """||(sum_i |x_i|^p)^(1/p)|| in the space of the tuple."""
    return norm(t.space, p_sum(t, p))


def mixed_matrix_norm(matrix, outer_r, inner_q):
    """||(sum_i (sum_j |x_ij|^q)^(r/q))^(1/r)|| for a VectorMatrix.

    Args:
        matrix (VectorMatrix): the family x_{i,j}
        outer_r (Exponent|float): exponent of the row sum
        inner_q (Exponent|float): exponent of the column sum

    Returns:
        float
    """
    inner = lattice_sum(matrix.members, inner_q, axis=1)
    return norm(matrix.space, lattice_sum(inner, outer_r, axis=0))


def pointwise_product(phi, psi):
    """Member-by-member coordinatewise products, as a tuple in L1 of phi's measure.

    Args:
        phi (VectorTuple): tuple in X
        psi (VectorTuple): tuple in X' on the same atoms

    Returns:
        VectorTuple
    """
    if phi.size != psi.size:
        raise LatticeInputError(f"tuples have different lengths: {phi.size} and {psi.size}")
    if phi.space.atom_count != psi.space.atom_count:
        raise LatticeInputError("tuples live on different atom counts")
    l1_space = FunctionSpace(phi.space.weights, WeightedLr(Exponent(1.0)))
    return VectorTuple(l1_space, phi.members * psi.members)


def check_holder_exponents(r, p, s):
    """Validates 1/r = 1/p + 1/s with 1 <= r <= p, s.

    Returns:
        (Exponent, Exponent, Exponent)
    """
    r, p, s = Exponent.of(r), Exponent.of(p), Exponent.of(s)
    if abs(r.reciprocal - p.reciprocal - s.reciprocal) > RELATION_TOLERANCE:
        raise LatticeInputError(f"exponents violate 1/r = 1/p + 1/s: r={r}, p={p}, s={s}")
    if r < 1 or p < r or s < r:
        raise LatticeInputError(f"exponents must satisfy 1 <= r <= p, s: r={r}, p={p}, s={s}")
    return r, p, s


def holder_check(space, phi, psi, r, p, s):
    """Evaluates both sides of ∫(sum|phi_i psi_i|^r)^(1/r) <= ||phi||_p ||psi||_s.

    Args:
        space (FunctionSpace): the space X of phi
        phi (VectorTuple): tuple in X
        psi (VectorTuple): tuple in X'
        r, p, s (Exponent): exponents with 1/r = 1/p + 1/s

    Returns:
        HolderRecord
    """
    r, p, s = check_holder_exponents(r, p, s)
    products = pointwise_product(phi, psi)
    lhs = psum_norm(products, r)
    rhs = norm(space, p_sum(phi, p)) * dual_norm(space, p_sum(psi, s))
    return HolderRecord(lhs=lhs, rhs=rhs, slack=rhs - lhs)


def dual_witness(space, t, p, r, s):
    """The dual tuple of the duality lemma for Köthe-Bochner norms.

    x'_i = |x_i|^((p-r)/r) x' / u^(p/s) on the support of u = p_sum(t, p), 0 elsewhere,
    where x' norms u. The s-sum of the result equals x' on the support and
    ∫(sum|x_i x'_i|^r)^(1/r) equals psum_norm(t, p). For p = ∞ the whole of x'
    sits on the first maximizing member at each atom.

    Args:
        space (FunctionSpace): the space X
        t (VectorTuple): tuple in X
        p, r, s (Exponent): exponents with 1/r = 1/p + 1/s

    Returns:
        VectorTuple in the dual space
    """
    r, p, s = check_holder_exponents(r, p, s)
    members = np.abs(t.members)
    target = dual_space(space)
    if t.size == 0:
        return VectorTuple(target, members)
    u = lattice_sum(members, p, axis=0)
    functional = np.abs(norming_functional(space, u))
    support = u > 0
    if p.infinite:
        leader = np.argmax(members, axis=0)
        witness = np.zeros_like(members)
        witness[leader, np.arange(space.atom_count)] = functional
        return VectorTuple(target, np.where(support, witness, 0.0))
    safe_u = np.where(support, u, 1.0)
    growth = members ** ((p.value - r.value) / r.value)
    witness = growth * functional / safe_u ** (p.value * s.reciprocal)
    return VectorTuple(target, np.where(support, witness, 0.0))


def sequence_norming(a, p, axis=-1):
    """Nonnegative b with ||b||_p' <= 1 and sum a b = ||a||_p along an axis.

    Args:
        a (ndarray): nonnegative array
        p (Exponent|float): exponent, at least 1
        axis (int): axis of the sequences

    Returns:
        ndarray shaped like a
    """
    p = Exponent.of(p)
    a = np.abs(np.asarray(a, dtype=float))
    if p < 1:
        raise LatticeInputError("sequence norming needs p >= 1")
    if p.infinite:
        leader = np.argmax(a, axis=axis)
        result = np.zeros_like(a)
        np.put_along_axis(result, np.expand_dims(leader, axis), 1.0, axis=axis)
        return result
    if p.value == 1:
        return np.ones_like(a)
    size = np.expand_dims(lattice_sum(a, p, axis=axis), axis)
    safe = np.where(size > 0, size, 1.0)
    return np.where(size > 0, (a / safe) ** (p.value - 1.0), 0.0)


def norming_tuple(space, t, p):
    """A tuple in X' with p'-sum norm <= 1 whose pairing with t is psum_norm(t, p).

    Args:
        space (FunctionSpace): the space X
        t (VectorTuple): tuple in X
        p (Exponent|float): exponent, at least 1

    Returns:
        VectorTuple in the dual space
    """
    target = dual_space(space)
    if t.size == 0:
        return VectorTuple(target, t.members)
    functional = np.abs(norming_functional(space, p_sum(t, p)))
    weights = sequence_norming(t.members, p, axis=0)
    return VectorTuple(target, np.sign(t.members) * weights * functional)


def norming_matrix(space, matrix, outer_r, inner_q):
    """A dual family with mixed (r', q') norm <= 1 attaining mixed_matrix_norm.

    Args:
        space (FunctionSpace): the space X
        matrix (VectorMatrix): family in X
        outer_r (Exponent|float): row exponent
        inner_q (Exponent|float): column exponent

    Returns:
        VectorMatrix in the dual space
    """
    members = matrix.members
    target = dual_space(space)
    if members.size == 0:
        return VectorMatrix(target, members)
    inner = lattice_sum(members, inner_q, axis=1)
    outer = lattice_sum(inner, outer_r, axis=0)
    functional = np.abs(norming_functional(space, outer))
    row_weights = sequence_norming(inner, outer_r, axis=0)
    col_weights = sequence_norming(members, inner_q, axis=1)
    dual_members = np.sign(members) * col_weights * row_weights[:, None, :] * functional
    return VectorMatrix(target, dual_members)


def _sphere_grid(size, p, grid_size, seed):
    dual = conjugate_exponent(p)
    if dual.infinite:
        if size <= SIGN_ENUMERATION_LIMIT:
            return np.array(list(product((-1.0, 1.0), repeat=size)))
        rng = np.random.default_rng(seed)
        return rng.choice((-1.0, 1.0), size=(grid_size, size))
    directions = [np.eye(size), -np.eye(size)]
    if size == 2:
        angles = 2 * np.pi * np.arange(grid_size) / grid_size
        directions.append(np.column_stack([np.cos(angles), np.sin(angles)]))
    elif size > 2:
        rng = np.random.default_rng(seed)
        directions.append(rng.standard_normal((grid_size, size)))
    grid = np.vstack(directions)
    return grid / lattice_sum(grid, dual, axis=1)[:, None]


def sup_representation_check(t, p, grid_size, seed=0):
    """Compares p_sum(t, p) with sup{sum a_i x_i : ||a||_p' = 1} over a finite grid.

    Args:
        t (VectorTuple): tuple
        p (Exponent|float): exponent, at least 1
        grid_size (int): number of sphere points beyond the coordinate directions
        seed (int): seed for directions when n > 2

    Returns:
        SupRepresentation
    """
    p = Exponent.of(p)
    if p < 1:
        raise LatticeInputError("the order supremum representation needs p >= 1")
    exact = p_sum(t, p)
    if t.size == 0:
        return SupRepresentation(exact=exact, grid_sup=np.zeros_like(exact), gap=0.0)
    grid = _sphere_grid(t.size, p, grid_size, seed)
    grid_sup = (grid @ t.members).max(axis=0)
    gap = float(max(0.0, np.max(exact - grid_sup)))
    return SupRepresentation(exact=exact, grid_sup=grid_sup, gap=gap)


def batch_psum_norms(space, members, p):
    """psum_norm for a stack of tuples shaped (batch, n, atoms)."""
    return norm_values(space, lattice_sum(members, p, axis=-2))
