"""
Alternating ascent for ratios of vector-valued lattice norms.

The objective is ||T M||_num / ||M||_den over families M of domain vectors. One step
fixes a norming family y' of the image, pulls it back through the adjoint and
replaces M by the maximizer of the resulting linear functional over the unit
ball of the denominator. The ratio never decreases along the iteration.

Numerator and denominator are either lattice norms, where the exponents act
pointwise inside the space norm, or strong norms, where they act on the sequence
of space norms of the members.
"""
from dataclasses import dataclass, field

import numpy as np

from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.settings import DEFAULT_MAX_ITER, STATIONARITY_TOLERANCE
from lattice_spaces.scripts.spaces import (Exponent, conjugate_exponent, dual_maximizer, dual_norm,
                                           dual_space, norm_values, norming_functional)
from lattice_spaces.scripts.vector_calculus import (VectorMatrix, lattice_sum, norming_matrix,
                                                    sequence_norming)

LATTICE = "lattice"
STRONG = "strong"


@dataclass(frozen=True, eq=False)
class RatioObjective:
    """
    What the ascent maximizes.

    operator (OperatorMatrix): T
    p (Exponent): inner exponent of the numerator
    q (Exponent): inner exponent of the denominator
    outer (Exponent): row exponent shared by both sides; unused for one row
    numerator (string): "lattice" or "strong"
    denominator (string): "lattice" or "strong"
    """
    operator: object
    p: Exponent
    q: Exponent
    outer: Exponent = field(default_factory=lambda: Exponent(1.0))
    numerator: str = LATTICE
    denominator: str = LATTICE

    def __post_init__(self):
        for name in ("p", "q", "outer"):
            object.__setattr__(self, name, Exponent.of(getattr(self, name)))

    def _value(self, space, members, inner, kind):
        if kind == STRONG:
            return float(lattice_sum(norm_values(space, members), inner, axis=-1)[0])
        pointwise = lattice_sum(lattice_sum(members, inner, axis=1), self.outer, axis=0)
        return float(norm_values(space, pointwise))

    def numerator_value(self, members):
        """Numerator at a (rows, cols, atoms) family."""
        return self._value(self.operator.codomain, self.operator.apply(members), self.p, self.numerator)

    def denominator_value(self, members):
        """Denominator at a (rows, cols, atoms) family."""
        return self._value(self.operator.domain, members, self.q, self.denominator)

    def ratio(self, members):
        """Numerator over denominator, 0 for the zero family."""
        size = self.denominator_value(members)
        return 0.0 if size == 0 else self.numerator_value(members) / size

    def _norming_image(self, image):
        codomain = self.operator.codomain
        if self.numerator == STRONG:
            sizes = norm_values(codomain, image[0])
            weights = sequence_norming(sizes, self.p)
            functionals = np.array([norming_functional(codomain, y) for y in image[0]])
            return (weights[:, None] * functionals)[None]
        return norming_matrix(codomain, VectorMatrix(codomain, image), self.outer, self.p).members

    def _maximize_linear(self, pulled):
        domain = self.operator.domain
        if self.denominator == STRONG:
            sizes = np.array([dual_norm(domain, z) for z in pulled[0]])
            weights = sequence_norming(sizes, conjugate_exponent(self.q))
            points = np.array([dual_maximizer(domain, z) for z in pulled[0]])
            return (weights[:, None] * points)[None]
        dual = dual_space(domain)
        return norming_matrix(dual, VectorMatrix(dual, pulled), conjugate_exponent(self.outer),
                              conjugate_exponent(self.q)).members

    def step(self, members):
        """One ascent step from a nonzero family."""
        image = self.operator.apply(members)
        if not np.any(image):
            return members
        functional = self._norming_image(image)
        return self._maximize_linear(self.operator.adjoint_apply(functional))


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class AscentResult:
    """
    Best ratio found by the ascent.

    value (float): best ratio
    witness (ndarray): family attaining it, shape (rows, cols, atoms)
    iterations (int): total steps over all starts
    """
    value: float
    witness: np.ndarray
    iterations: int


def climb(objective, start, max_iter=DEFAULT_MAX_ITER, tol=STATIONARITY_TOLERANCE):
    """Runs the ascent from one start until the relative change drops below tol.

    Returns:
        (float, ndarray, int): ratio, family and number of steps
    """
    members, value = start, objective.ratio(start)
    for iteration in range(1, max_iter + 1):
        candidate = objective.step(members)
        candidate_value = objective.ratio(candidate)
        if candidate_value <= value:
            return value, members, iteration
        improved = candidate_value - value
        members, value = candidate, candidate_value
        if improved <= tol * value:
            return value, members, iteration
    return value, members, max_iter


def default_starts(objective, rows, cols, seed, restarts):
    """Operator-norm witness, coordinate basis, then seeded Gaussian families."""
    atoms = objective.operator.domain.atom_count
    starts = []
    single = np.zeros((rows, cols, atoms))
    single[0, 0] = operator_norm_bounds(objective.operator, seed=seed, rigorous=False).witness
    starts.append(single)
    basis = np.zeros((rows, cols, atoms))
    for index in range(min(rows * cols, atoms)):
        basis[index // cols, index % cols, index] = 1.0
    starts.append(basis)
    rng = np.random.default_rng(seed)
    starts.extend(rng.standard_normal((restarts, rows, cols, atoms)))
    return [start for start in starts if np.any(start)]


def maximize(objective, rows, cols, seed=0, restarts=32, starts=None,
             max_iter=DEFAULT_MAX_ITER, tol=STATIONARITY_TOLERANCE):
    """Best ratio over all starts; ties keep the earliest start.

    Args:
        objective (RatioObjective): what to maximize
        rows (int): rows of the families (1 for tuples)
        cols (int): columns of the families (the tuple size)
        seed (int): seed of the random starts
        restarts (int): number of random starts
        starts (list): extra starts tried before the defaults
        max_iter (int): step cap per start
        tol (float): relative stationarity tolerance

    Returns:
        AscentResult
    """
    candidates = list(starts or []) + default_starts(objective, rows, cols, seed, restarts)
    best_value, best_members, total = -1.0, candidates[0], 0
    for start in candidates:
        value, members, steps = climb(objective, np.asarray(start, dtype=float), max_iter, tol)
        total += steps
        if value > best_value:
            best_value, best_members = value, members
    return AscentResult(max(best_value, 0.0), best_members, total)
