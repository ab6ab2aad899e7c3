"""
Branch-and-bound certificate for ratios of lattice p-sum norms.

Maximizes psum_norm(T t, p) / psum_norm(t, q) over n-tuples t. The search space
is the surface of a cube, split into faces; each face is a box of free
coordinates that is bisected until the Lipschitz bound of every surviving box
is within the requested width of the best point found.

Two parametrizations are used:

* sup-normed domains factor atom by atom. Each atom carries its own block of n
  coordinates, normalized onto the l_q^n sphere, so the denominator is 1.
* every other domain uses the single cube surface in R^(n * atoms).
"""
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from lattice_spaces.scripts.spaces import Exponent, norm_values
from lattice_spaces.scripts.vector_calculus import batch_psum_norms, lattice_sum

DEFAULT_MAX_BOXES = 200_000


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class RatioCertificate:
    """
    A two-sided bound on a supremum of norm ratios.

    lower (float): best ratio attained. E.g.: 2.8284271247461903
    upper (float): largest Lipschitz bound of an unpruned box
    witness (ndarray): tuple attaining lower, shape (n, atoms)
    boxes (int): number of boxes evaluated
    converged (bool): True when upper - lower <= width
    """
    lower: float
    upper: float
    witness: np.ndarray
    boxes: int
    converged: bool


def crude_ratio_upper(operator, q, tuple_size):
    """A cheap upper bound on the ratio valid for every tuple of the given size.

    Sup-normed domains use n^(1-1/q) sum_w ||T e_w||; other domains use
    n sum_w ||T e_w|| / ||e_w||.
    """
    q = Exponent.of(q)
    columns = norm_values(operator.codomain, operator.entries.T)
    if operator.domain.is_sup_normed():
        return tuple_size ** (1.0 - q.reciprocal) * float(columns.sum())
    units = norm_values(operator.domain, np.eye(operator.domain.atom_count))
    return tuple_size * float(np.sum(columns / units))


class _FaceBoxes:
    """Boxes on cube surfaces, one face choice plus free coordinates per block."""

    def __init__(self, blocks, block_dim, positive_first):
        self.blocks = blocks
        self.block_dim = block_dim
        faces_per_block = [range(2 * block_dim)] * blocks
        if positive_first and blocks:
            faces_per_block[0] = range(0, 2 * block_dim, 2)
        self.faces = np.array(list(product(*faces_per_block)), dtype=int).reshape(-1, blocks)
        self.centers = np.zeros((self.faces.shape[0], blocks, block_dim - 1))
        self.half_width = 1.0

    @property
    def free_dim(self):
        return self.blocks * (self.block_dim - 1)

    def count(self):
        return self.faces.shape[0]

    def points(self):
        """Cube surface points at the box centers, shape (boxes, blocks, block_dim)."""
        boxes = self.count()
        points = np.zeros((boxes, self.blocks, self.block_dim))
        axis = self.faces // 2
        sign = np.where(self.faces % 2 == 0, 1.0, -1.0)
        for coordinate in range(self.block_dim):
            free_index = np.where(axis > coordinate, coordinate, coordinate - 1)
            free_index = np.clip(free_index, 0, max(self.block_dim - 2, 0))
            if self.block_dim > 1:
                free_values = np.take_along_axis(self.centers, free_index[..., None], axis=2)[..., 0]
            else:
                free_values = np.zeros_like(sign)
            points[:, :, coordinate] = np.where(axis == coordinate, sign, free_values)
        return points

    def keep(self, mask):
        self.faces = self.faces[mask]
        self.centers = self.centers[mask]

    def split(self):
        offsets = np.array(list(product((-0.5, 0.5), repeat=self.free_dim)))
        offsets = offsets.reshape(-1, self.blocks, self.block_dim - 1) * self.half_width
        self.centers = (self.centers[:, None] + offsets[None]).reshape(-1, self.blocks, self.block_dim - 1)
        self.faces = np.repeat(self.faces, offsets.shape[0], axis=0)
        self.half_width /= 2.0


def certify_tuple_ratio(operator, p, q, tuple_size, width=1e-3, max_boxes=DEFAULT_MAX_BOXES,
                        a_priori_upper=math.inf):
    """Certified interval for sup psum_norm(T t, p) / psum_norm(t, q) over n-tuples.

    Args:
        operator (OperatorMatrix): T
        p (Exponent): codomain exponent
        q (Exponent): domain exponent
        tuple_size (int): n
        width (float): target width of the interval
        max_boxes (int): evaluation budget
        a_priori_upper (float): any known upper bound on the supremum

    Returns:
        RatioCertificate
    """
    p, q = Exponent.of(p), Exponent.of(q)
    atoms = operator.domain.atom_count
    lipschitz = min(a_priori_upper, crude_ratio_upper(operator, q, tuple_size))
    if operator.is_zero():
        return RatioCertificate(0.0, 0.0, np.eye(tuple_size, atoms), 0, True)

    per_atom = operator.domain.is_sup_normed()
    if per_atom:
        fixed_first = tuple_size > 1 and p == q == Exponent(2.0)
        blocks = atoms - 1 if fixed_first else atoms
        boxes = _FaceBoxes(blocks, tuple_size, positive_first=not fixed_first)
        spread = 2.0 * (1.0 if q.infinite else (tuple_size - 1) ** q.reciprocal)
        first = np.zeros(tuple_size)
        first[0] = 1.0
    else:
        boxes = _FaceBoxes(1, tuple_size * atoms, positive_first=True)
        ones = np.ones((1, tuple_size, atoms))
        spread = float(batch_psum_norms(operator.domain, ones, q)[0])
        floor = float(np.min(norm_values(operator.domain, np.eye(atoms))))

    def tuples_of(points):
        if not per_atom:
            return points.reshape(-1, tuple_size, atoms)
        blocks_on_sphere = points / lattice_sum(points, q, axis=2)[..., None]
        if fixed_first:
            head = np.broadcast_to(first, (points.shape[0], 1, tuple_size))
            blocks_on_sphere = np.concatenate([head, blocks_on_sphere], axis=1)
        return np.transpose(blocks_on_sphere, (0, 2, 1))

    lower, witness, evaluated, converged = 0.0, np.eye(tuple_size, atoms), 0, False
    while True:
        tuples = tuples_of(boxes.points())
        numerators = batch_psum_norms(operator.codomain, operator.apply(tuples), p)
        denominators = np.ones_like(numerators) if per_atom else batch_psum_norms(operator.domain, tuples, q)
        ratios = numerators / denominators
        evaluated += ratios.shape[0]
        best = int(np.argmax(ratios))
        if ratios[best] > lower:
            lower, witness = float(ratios[best]), tuples[best]
        if boxes.free_dim == 0:
            return RatioCertificate(lower, lower, witness, evaluated, True)
        if per_atom:
            uppers = numerators + lipschitz * spread * boxes.half_width
        else:
            slack = boxes.half_width * spread
            uppers = (numerators + lipschitz * slack) / np.maximum(denominators - slack, floor)
        uppers = np.minimum(uppers, lipschitz)
        alive = uppers > lower + width
        upper = max(lower, float(uppers.max()))
        if not np.any(alive):
            converged = True
            break
        children = int(alive.sum()) * 2 ** boxes.free_dim
        if evaluated + children > max_boxes:
            break
        boxes.keep(alive)
        boxes.split()
    return RatioCertificate(lower, max(upper, lower), witness, evaluated, converged)
