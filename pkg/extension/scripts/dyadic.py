"""
Dyadic block maps between L_q on N uniform atoms and l_q^(2^n).

The unit interval is represented by N atoms of measure 1/N. Level n splits the atoms
into 2^n consecutive blocks of equal length:

    P_n f   = 2^(n/q') sum_i (integral of f over block i) e_i
    J_n e_i = 2^(n/q) (indicator of block i)

P_n is a positive contraction, J_n a positive isometry and P_n J_n the identity.
"""
from dataclasses import dataclass

import numpy as np

from lattice_spaces.scripts.errors import GuardError, LatticeInputError
from lattice_spaces.scripts.spaces import Exponent, FunctionSpace, OperatorMatrix, conjugate_exponent


# pylint: disable=R0903
@dataclass(frozen=True)
class DyadicLevel:
    """
    A dyadic resolution.

    n (int): level, 2^n blocks
    q (Exponent): exponent of both L_q spaces
    """
    n: int
    q: Exponent

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise LatticeInputError(f"dyadic level must be a nonnegative integer, got {self.n}")
        q = Exponent.of(self.q)
        if q < 1:
            raise LatticeInputError(f"dyadic maps need q >= 1, got {q}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", q)

    @property
    def blocks(self):
        """Number of blocks, 2^n."""
        return 2 ** self.n

    def block_size(self, atoms):
        """Atoms per block; raises the divisibility guard when 2^n does not divide atoms."""
        if atoms < 1 or atoms % self.blocks:
            raise GuardError("divisibility", f"2^{self.n} = {self.blocks} blocks do not divide {atoms} atoms")
        return atoms // self.blocks


def uniform_lq(q, atoms):
    """L_q on atoms of measure 1/atoms."""
    return FunctionSpace.lr(q, weights=np.full(atoms, 1.0 / atoms))


def _block_pattern(level, atoms):
    """blocks x atoms indicator matrix of the dyadic blocks."""
    size = level.block_size(atoms)
    return np.kron(np.eye(level.blocks), np.ones((1, size)))


def dyadic_Pn(level, N):
    """P_n : L_q^N (uniform) -> l_q^(2^n), block averages scaled by 2^(n/q').

    Args:
        level (DyadicLevel): level and exponent
        N (int): atoms of the domain

    Returns:
        OperatorMatrix
    """
    scale = 2.0 ** (level.n * conjugate_exponent(level.q).reciprocal)
    entries = scale * _block_pattern(level, N) / N
    return OperatorMatrix(uniform_lq(level.q, N), FunctionSpace.lr(level.q, atoms=level.blocks), entries)


def dyadic_Jn(level, N):
    """J_n : l_q^(2^n) -> L_q^N (uniform), e_i mapped to 2^(n/q) times block i.

    Args:
        level (DyadicLevel): level and exponent
        N (int): atoms of the codomain

    Returns:
        OperatorMatrix
    """
    scale = 2.0 ** (level.n * level.q.reciprocal)
    entries = scale * _block_pattern(level, N).T
    return OperatorMatrix(FunctionSpace.lr(level.q, atoms=level.blocks), uniform_lq(level.q, N), entries)
