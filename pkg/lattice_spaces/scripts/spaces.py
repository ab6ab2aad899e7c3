"""
Finite atomic Banach function spaces, their duals and exponent arithmetic.

A space is a finite measure (one positive weight per atom) together with a lattice
norm: either the weighted L_r norm or a user supplied evaluator. Functionals are
paired with elements through the measure, <x', x> = sum_j w_j x'_j x_j, so a dual
space lives on the same weights as its primal.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from lattice_spaces.scripts.errors import LatticeInputError, NoNormingFunctionalError

INFINITY_LABELS = ("inf", "+inf", "infinity", "∞")


@total_ordering
@dataclass(frozen=True)
class Exponent:
    """
    An exponent in (0, ∞], with ∞ kept as its own value.

    value (float): the finite value; 0.0 when infinite.
    infinite (bool): True for ∞.
    """
    value: float = 1.0
    infinite: bool = False

    def __post_init__(self):
        if self.infinite:
            object.__setattr__(self, "value", 0.0)
            return
        value = float(self.value)
        if not math.isfinite(value) or value <= 0:
            raise LatticeInputError(f"exponent must lie in (0, inf], got {self.value!r}")
        object.__setattr__(self, "value", value)

    @classmethod
    def infinity(cls):
        """The exponent ∞."""
        return cls(0.0, True)

    @classmethod
    def of(cls, value):
        """Coerce a number, a string such as "4/3" or "inf", or an Exponent.

        Args:
            value (Exponent|float|int|string): exponent description

        Returns:
            Exponent
        """
        if isinstance(value, Exponent):
            return value
        if isinstance(value, str):
            text = value.strip().lower()
            if text in INFINITY_LABELS:
                return cls.infinity()
            try:
                value = float(Fraction(text))
            except (ValueError, ZeroDivisionError) as error:
                raise LatticeInputError(f"cannot read exponent {value!r}") from error
        if value is None:
            raise LatticeInputError("exponent is missing")
        value = float(value)
        if math.isinf(value) and value > 0:
            return cls.infinity()
        return cls(value)

    @property
    def reciprocal(self):
        """1/p, with 1/∞ = 0."""
        return 0.0 if self.infinite else 1.0 / self.value

    def as_float(self):
        """Float view for numeric code; ∞ maps to math.inf."""
        return math.inf if self.infinite else self.value

    def _key(self):
        return (self.infinite, self.value)

    def __lt__(self, other):
        return self._key() < Exponent.of(other)._key()

    def __str__(self):
        return "inf" if self.infinite else f"{self.value:g}"

    def to_json(self):
        """JSON form: a number or the string "inf"."""
        return "inf" if self.infinite else self.value


def conjugate_exponent(p):
    """Returns p' with 1/p + 1/p' = 1.

    Args:
        p (Exponent|float): exponent, at least 1

    Returns:
        Exponent
    """
    p = Exponent.of(p)
    if p.infinite:
        return Exponent(1.0)
    if p.value < 1:
        raise LatticeInputError(f"conjugate exponent needs p >= 1, got {p}")
    if p.value == 1:
        return Exponent.infinity()
    return Exponent(p.value / (p.value - 1.0))


# pylint: disable=R0903
@dataclass(frozen=True)
class WeightedLr:
    """
    The weighted L_r norm (sum_j w_j |x_j|^r)^(1/r), max_j |x_j| for r = ∞.

    r (Exponent): the exponent
    """
    r: Exponent

    def __post_init__(self):
        object.__setattr__(self, "r", Exponent.of(self.r))


# pylint: disable=R0903
@dataclass(frozen=True)
class CustomNorm:
    """
    A caller supplied lattice norm.

    evaluator (callable): coords -> norm
    support (callable): z -> x in the unit ball maximizing <z, x>
    subgradient (callable): u -> x' with dual norm <= 1 and <x', u> = ||u||
    name (string): label used in reports
    """
    evaluator: Callable
    support: Optional[Callable] = None
    subgradient: Optional[Callable] = None
    name: str = "custom"


@dataclass(frozen=True)
class FunctionSpace:
    """
    A finite atomic measure with a lattice norm.

    weights (tuple): positive measure of each atom
    norm_kind (WeightedLr|CustomNorm): the norm descriptor
    """
    weights: tuple
    norm_kind: object

    def __post_init__(self):
        weights = tuple(float(w) for w in np.ravel(np.asarray(self.weights, dtype=float)))
        if not weights:
            raise LatticeInputError("a function space needs at least one atom")
        if not all(math.isfinite(w) and w > 0 for w in weights):
            raise LatticeInputError(f"atom weights must be positive, got {weights}")
        if not isinstance(self.norm_kind, (WeightedLr, CustomNorm)):
            raise LatticeInputError(f"unknown norm kind {self.norm_kind!r}")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def lr(cls, r, atoms=None, weights=None):
        """Weighted L_r space; unit weights when only the atom count is given.

        Args:
            r (Exponent|float|string): exponent
            atoms (int): number of atoms
            weights (list): atom weights

        Returns:
            FunctionSpace
        """
        if weights is None:
            if atoms is None or atoms < 1:
                raise LatticeInputError("give either atoms or weights")
            weights = np.ones(atoms)
        return cls(tuple(weights), WeightedLr(Exponent.of(r)))

    @property
    def atom_count(self):
        """Number of atoms."""
        return len(self.weights)

    @property
    def weight_array(self):
        """Weights as a float array."""
        return np.asarray(self.weights, dtype=float)

    @property
    def exponent(self):
        """The exponent of a WeightedLr space, None for custom norms."""
        if isinstance(self.norm_kind, WeightedLr):
            return self.norm_kind.r
        return None

    @property
    def is_weighted_lr(self):
        """True for WeightedLr norms."""
        return isinstance(self.norm_kind, WeightedLr)

    def is_sup_normed(self):
        """True for the weighted L_∞ norm."""
        return self.is_weighted_lr and self.norm_kind.r.infinite

    def describe(self):
        """Short label. E.g.: L_2(3 atoms)."""
        if self.is_weighted_lr:
            return f"L_{self.norm_kind.r}({self.atom_count} atoms)"
        return f"{self.norm_kind.name}({self.atom_count} atoms)"


@dataclass(frozen=True, eq=False)
class LatticeVector:
    """
    Coordinates of an element of a FunctionSpace.

    space (FunctionSpace): the ambient space
    coords (ndarray): one real per atom
    """
    space: FunctionSpace
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.shape[0] != self.space.atom_count:
            raise LatticeInputError(
                f"vector has {coords.shape[0]} coordinates, space has {self.space.atom_count} atoms")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)


def coords_of(space, x):
    """Coordinates of x checked against the atom count of space.

    Args:
        space (FunctionSpace): expected space
        x (LatticeVector|array-like): element

    Returns:
        ndarray
    """
    if isinstance(x, LatticeVector):
        if x.space.atom_count != space.atom_count:
            raise LatticeInputError("dimension mismatch between vector and space")
        return np.asarray(x.coords, dtype=float)
    coords = np.asarray(x, dtype=float).reshape(-1)
    if coords.shape[0] != space.atom_count:
        raise LatticeInputError(
            f"dimension mismatch: {coords.shape[0]} coordinates for {space.atom_count} atoms")
    return coords


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """
    A linear map between two function spaces.

    domain (FunctionSpace): source space
    codomain (FunctionSpace): target space
    entries (ndarray): codomain atoms x domain atoms
    """
    domain: FunctionSpace
    codomain: FunctionSpace
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim == 1 and self.codomain.atom_count == 1:
            entries = entries.reshape(1, -1)
        expected = (self.codomain.atom_count, self.domain.atom_count)
        if entries.shape != expected:
            raise LatticeInputError(f"operator entries have shape {entries.shape}, expected {expected}")
        if not np.all(np.isfinite(entries)):
            raise LatticeInputError("operator entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def apply(self, x):
        """Images of one vector or of a stack of vectors (last axis = domain atoms)."""
        return np.asarray(x, dtype=float) @ self.entries.T

    def adjoint_apply(self, y):
        """The functional x -> <y, Tx> written in the domain pairing frame."""
        y = np.asarray(y, dtype=float)
        return (y * self.codomain.weight_array) @ self.entries / self.domain.weight_array

    def with_entries(self, entries):
        """Same spaces, new matrix."""
        return OperatorMatrix(self.domain, self.codomain, entries)

    def scaled(self, factor):
        """factor * T."""
        return self.with_entries(factor * self.entries)

    def modulus(self):
        """The operator |T| with entries |T_ij| (exists on atomic spaces)."""
        return self.with_entries(np.abs(self.entries))

    def is_positive(self):
        """True when every entry is nonnegative."""
        return bool(np.all(self.entries >= 0))

    def is_zero(self):
        """True when every entry vanishes."""
        return not np.any(self.entries)


def identity_operator(space):
    """The identity of a space."""
    return OperatorMatrix(space, space, np.eye(space.atom_count))


def _lr_values(values, weights, r):
    magnitudes = np.abs(values)
    if r.infinite:
        return magnitudes.max(axis=-1)
    return (weights * magnitudes ** r.value).sum(axis=-1) ** (1.0 / r.value)


def norm_values(space, values):
    """Norms of every row of an array whose last axis runs over the atoms.

    Args:
        space (FunctionSpace): the space
        values (ndarray): shape (..., atoms)

    Returns:
        ndarray of shape values.shape[:-1]
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != space.atom_count:
        raise LatticeInputError("dimension mismatch in norm evaluation")
    if space.is_weighted_lr:
        return _lr_values(values, space.weight_array, space.norm_kind.r)
    evaluator = space.norm_kind.evaluator
    flat = values.reshape(-1, space.atom_count)
    result = np.array([float(evaluator(row)) for row in flat])
    return result.reshape(values.shape[:-1])


def norm(space, x):
    """Evaluates ||x|| in the space.

    Args:
        space (FunctionSpace): the space
        x (LatticeVector|array-like): element

    Returns:
        float
    """
    return float(norm_values(space, coords_of(space, x)))


def pairing(space, xprime, x):
    """<x', x> = sum_j w_j x'_j x_j."""
    return float(np.dot(space.weight_array * coords_of(space, xprime), coords_of(space, x)))


def _require_banach(space):
    if space.is_weighted_lr and not space.norm_kind.r.infinite and space.norm_kind.r.value < 1:
        raise LatticeInputError(
            f"duality needs a Banach norm (r >= 1), got r = {space.norm_kind.r}")


def _custom_argmax(space, z, restarts=64, seed=0, tol=1e-9):
    """Point of the unit ball maximizing <z, x> by constrained ascent with restarts."""
    evaluator = space.norm_kind.evaluator
    weighted = space.weight_array * z
    rng = np.random.default_rng(seed)
    best_value, best_point = 0.0, np.zeros(space.atom_count)
    starts = [np.sign(weighted)] + [rng.standard_normal(space.atom_count) for _ in range(restarts - 1)]
    for start in starts:
        scale = float(evaluator(start))
        if scale <= 0:
            continue
        result = optimize.minimize(
            lambda x: -np.dot(weighted, x), start / scale, method="SLSQP",
            constraints=[{"type": "ineq", "fun": lambda x: 1.0 - float(evaluator(x))}],
            options={"ftol": tol, "maxiter": 500})
        point = result.x
        size = float(evaluator(point))
        if size > 1.0:
            point = point / size
        value = float(np.dot(weighted, point))
        if value > best_value:
            best_value, best_point = value, point
    return best_point


def dual_norm(space, xprime):
    """Norm of x' as a functional, sup{<x', x> : ||x|| <= 1}.

    Args:
        space (FunctionSpace): the primal space
        xprime (LatticeVector|array-like): functional in the pairing frame

    Returns:
        float
    """
    z = coords_of(space, xprime)
    _require_banach(space)
    if space.is_weighted_lr:
        return float(_lr_values(z, space.weight_array, conjugate_exponent(space.norm_kind.r)))
    if not np.any(z):
        return 0.0
    return pairing(space, z, dual_maximizer(space, z))


def dual_space(space):
    """The space realising X' on the same atoms.

    Args:
        space (FunctionSpace): the primal space

    Returns:
        FunctionSpace
    """
    _require_banach(space)
    if space.is_weighted_lr:
        return FunctionSpace(space.weights, WeightedLr(conjugate_exponent(space.norm_kind.r)))
    kind = space.norm_kind
    return FunctionSpace(space.weights, CustomNorm(
        evaluator=lambda z: dual_norm(space, z),
        support=kind.subgradient,
        subgradient=kind.support,
        name=f"dual {kind.name}"))


def norming_functional(space, u):
    """A functional x' with dual norm <= 1 and <x', u> = ||u||.

    WeightedLr uses the closed form sign(u)|u|^(r-1)/||u||^(r-1); at r = 1 the sign
    pattern of u (zero where u vanishes), at r = ∞ the first maximizing atom.

    Args:
        space (FunctionSpace): the space
        u (LatticeVector|array-like): element

    Returns:
        ndarray
    """
    u = coords_of(space, u)
    _require_banach(space)
    if not np.any(u):
        return np.zeros_like(u)
    if space.is_weighted_lr:
        r = space.norm_kind.r
        weights = space.weight_array
        if r.infinite:
            atom = int(np.argmax(np.abs(u)))
            functional = np.zeros_like(u)
            functional[atom] = np.sign(u[atom]) / weights[atom]
            return functional
        if r.value == 1:
            return np.sign(u)
        size = _lr_values(u, weights, r)
        return np.sign(u) * (np.abs(u) / size) ** (r.value - 1.0)
    if space.norm_kind.subgradient is None:
        raise NoNormingFunctionalError(
            f"custom norm {space.norm_kind.name!r} has no subgradient oracle")
    return np.asarray(space.norm_kind.subgradient(u), dtype=float)


def dual_maximizer(space, z):
    """A point x of the unit ball with <z, x> = dual_norm(z).

    Args:
        space (FunctionSpace): the space
        z (array-like): functional in the pairing frame

    Returns:
        ndarray
    """
    z = coords_of(space, z)
    _require_banach(space)
    if not np.any(z):
        return np.zeros_like(z)
    if space.is_weighted_lr:
        return norming_functional(dual_space(space), z)
    if space.norm_kind.support is not None:
        return np.asarray(space.norm_kind.support(z), dtype=float)
    return _custom_argmax(space, z)


def power_space_norm(space, p, u):
    """Norm of the p-convexification, ||u||_[p] = || u^(1/p) ||^p.

    Args:
        space (FunctionSpace): the space X
        p (Exponent|float): finite exponent
        u (array-like): nonnegative element

    Returns:
        float
    """
    p = Exponent.of(p)
    u = coords_of(space, u)
    if p.infinite:
        raise LatticeInputError("the power space needs a finite exponent")
    if np.any(u < 0):
        raise LatticeInputError("power space norm is defined on nonnegative elements")
    if p.value == 1:
        return norm(space, u)
    return norm(space, u ** (1.0 / p.value)) ** p.value


def am_norm_from_element(space, x0, x):
    """AM-norm of x in the ideal generated by x0: inf{λ : |x| <= λ x0/||x0||}.

    Args:
        space (FunctionSpace): the space
        x0 (array-like): nonnegative, nonzero generator
        x (array-like): element

    Returns:
        float (math.inf when x leaves the support of x0)
    """
    x0 = coords_of(space, x0)
    x = coords_of(space, x)
    if np.any(x0 < 0):
        raise LatticeInputError("the generating element must be nonnegative")
    if not np.any(x0):
        raise LatticeInputError("the generating element must be nonzero")
    support = x0 > 0
    if np.any(x[~support] != 0):
        return math.inf
    if not np.any(x):
        return 0.0
    return norm(space, x0) * float(np.max(np.abs(x[support]) / x0[support]))


def am_norm_space(space, x0):
    """The AM-normed ideal generated by x0 as a custom space with exact oracles.

    Args:
        space (FunctionSpace): the space
        x0 (array-like): nonnegative, nonzero generator

    Returns:
        FunctionSpace
    """
    x0 = coords_of(space, x0).copy()
    scale = norm(space, x0)
    support = x0 > 0
    weights = space.weight_array

    def evaluator(v):
        return am_norm_from_element(space, x0, v)

    def support_oracle(z):
        return np.where(support, np.sign(z) * x0 / scale, 0.0)

    def subgradient(u):
        u = np.asarray(u, dtype=float)
        ratios = np.where(support, np.abs(u) / np.where(support, x0, 1.0), -1.0)
        atom = int(np.argmax(ratios))
        functional = np.zeros_like(u)
        functional[atom] = np.sign(u[atom]) * scale / (weights[atom] * x0[atom])
        return functional

    return FunctionSpace(space.weights, CustomNorm(evaluator, support_oracle, subgradient, "am"))
