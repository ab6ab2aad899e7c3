"""
Column generation for tensor norms defined as infima over decompositions.

A norm of the form inf { sum_j cost(z_j) : z = sum_j z_j } is the value of a linear
program over the cone of admissible blocks. The restricted master keeps a finite
pool of blocks normalized to unit cost, its equality duals form a coefficient
matrix G, and pricing searches for a block with <G, block> > cost. When pricing
fails, G divided by a certified bound of its dual norm is a lower certificate.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from lattice_spaces.scripts.errors import CertificationError
from lattice_spaces.scripts.spaces import norm

PRICING_TOLERANCE = 1e-9
DEFAULT_ITERATIONS = 60


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class Block:
    """
    One column of the master problem.

    xs (ndarray): left members of the block representation
    ys (ndarray): right members
    cost (float): objective of the representation
    """
    xs: np.ndarray
    ys: np.ndarray
    cost: float

    @property
    def matrix(self):
        """Canonical matrix of the block."""
        return np.asarray(self.xs).T @ np.asarray(self.ys)


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class MasterSolution:
    """
    Last restricted master of a column generation run.

    value (float): optimal master objective, an upper bound of the norm
    functional (ndarray): equality duals reshaped to (left atoms, right atoms)
    blocks (list): active blocks already scaled by their coefficients
    iterations (int): number of master solves
    converged (bool): True when the last pricing round found no improving block
    history (list): master values after every solve
    """
    value: float
    functional: np.ndarray
    blocks: list
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def _usable(block):
    return block.cost > 0 and np.any(block.matrix)


def solve_master(target, pool):
    """Solves min sum c_j subject to sum c_j M_j / cost_j = target, c >= 0.

    Args:
        target (ndarray): canonical matrix of z
        pool (list): Block columns spanning every matrix of target's shape

    Returns:
        (float, ndarray, ndarray): value, coefficients and dual matrix
    """
    columns = np.array([(block.matrix / block.cost).ravel() for block in pool]).T
    result = linprog(np.ones(len(pool)), A_eq=columns, b_eq=target.ravel(), bounds=(0, None),
                     method="highs")
    if result.status != 0:
        raise CertificationError(f"restricted master failed: {result.message}")
    return float(result.fun), result.x, np.asarray(result.eqlin.marginals).reshape(target.shape)


def elementary_blocks(tensor):
    """±e_a ⊗ e_b scaled to unit norm on both sides; they span every matrix."""
    left, right = tensor.left_space, tensor.right_space
    blocks = []
    for a in range(left.atom_count):
        x = np.zeros(left.atom_count)
        x[a] = 1.0
        x /= norm(left, x)
        for b in range(right.atom_count):
            y = np.zeros(right.atom_count)
            y[b] = 1.0
            y /= norm(right, y)
            blocks.append(Block(x[None], y[None], 1.0))
            blocks.append(Block(-x[None], y[None], 1.0))
    return blocks


def generate_columns(tensor, pool, cost, price, max_iter=DEFAULT_ITERATIONS, tol=PRICING_TOLERANCE):
    """Runs the master and pricing loop.

    Args:
        tensor (Tensor): z
        pool (list): initial Block columns; elementary blocks are added by the caller
        cost (callable): (xs, ys) -> cost of a representation
        price (callable): dual matrix G -> list of (xs, ys) candidate representations
        max_iter (int): master solves allowed
        tol (float): relative reduced-cost tolerance

    Returns:
        MasterSolution
    """
    target = tensor.canonical_matrix()
    pool = [block for block in pool if _usable(block)]
    history = []
    converged = False
    for iteration in range(1, max_iter + 1):
        value, coefficients, functional = solve_master(target, pool)
        history.append(value)
        added = []
        for xs, ys in price(functional):
            block = Block(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), float(cost(xs, ys)))
            if not _usable(block):
                continue
            if float(np.sum(functional * block.matrix)) > block.cost * (1 + tol) + tol:
                added.append(block)
        if not added:
            converged = True
            break
        pool.extend(added)
    active = [(block, weight) for block, weight in zip(pool, coefficients) if weight > 0]
    scaled = [Block(block.xs * weight / block.cost, block.ys, weight) for block, weight in active]
    return MasterSolution(value, functional, scaled, iteration, converged, history)
