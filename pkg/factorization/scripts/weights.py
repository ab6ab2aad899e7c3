"""
Weight problems behind Maurey-Rosenthal type factorizations.

A factorization T = M_g ∘ T̂ ∘ M_f is parametrized by densities F = f^a on the
domain atoms and G = g^b on the codomain atoms, each confined to the unit ball of
the Köthe dual of a power space. A sampled pair of families (x_j), (y'_j) gives
the constraint

    sum_j ∫|T x_j · y'_j| dν <= C <A, F>^(1/a) <B, G>^(1/b)

with A = μ (sum_j |x_j|^q)^(a/q) and B = ν (sum_j |y'_j|^(p'))^(b/p'). In the
variables (F, G, log C) every such constraint is convex, so a finite set of them
is solved exactly by SLSQP and its optimum is a lower bound for the best constant.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from lattice_spaces.scripts.errors import LatticeInputError
from lattice_spaces.scripts.spaces import Exponent, FunctionSpace, WeightedLr, conjugate_exponent, norm_values
from lattice_spaces.scripts.vector_calculus import lattice_sum

WEIGHT_FLOOR = 1e-12
MASTER_TOLERANCE = 1e-12
MASTER_ITERATIONS = 500


def _exponent_ratio(top, bottom):
    """top / bottom for exponents with bottom finite."""
    if top.infinite:
        return Exponent.infinity()
    return Exponent(top.value / bottom.value)


def _ball_exponent(space_exponent, power):
    """Exponent of the Köthe dual of the power space L_(e/power)."""
    return conjugate_exponent(_exponent_ratio(space_exponent, power))


# pylint: disable=R0903
@dataclass(frozen=True)
class WeightShape:
    """
    Exponents and measures of a weight problem.

    domain_weights (ndarray): μ
    codomain_weights (ndarray): ν
    left_power (Exponent): a, with f = F^(1/a) and inner domain L_a(μ)
    right_power (Exponent): b, with g = G^(1/b); ∞ fixes g = 1
    left_ball (Exponent): exponent of the unit ball holding F
    right_ball (Exponent): exponent of the unit ball holding G, None when g = 1
    """
    domain_weights: tuple
    codomain_weights: tuple
    left_power: Exponent
    right_power: Exponent
    left_ball: Exponent
    right_ball: Exponent = None

    @property
    def mu(self):
        return np.asarray(self.domain_weights, dtype=float)

    @property
    def nu(self):
        return np.asarray(self.codomain_weights, dtype=float)

    @property
    def fixed_right(self):
        """True when g is the constant 1."""
        return self.right_power.infinite

    def uniform(self):
        """The constant densities on the boundary of both balls."""
        return _uniform(self.mu, self.left_ball), (None if self.fixed_right else _uniform(self.nu, self.right_ball))

    def factors(self, left_density, right_density):
        """f = F^(1/a) and g = G^(1/b), floored before any inversion."""
        f = np.maximum(left_density, WEIGHT_FLOOR) ** self.left_power.reciprocal
        if self.fixed_right:
            return f, np.ones(len(self.codomain_weights))
        return f, np.maximum(right_density, WEIGHT_FLOOR) ** self.right_power.reciprocal

    def densities(self, f, g):
        """F = f^a and G = g^b, the inverse of factors."""
        left = np.asarray(f, dtype=float) ** self.left_power.value
        right = None if self.fixed_right else np.asarray(g, dtype=float) ** self.right_power.value
        return left, right

    def in_balls(self, left_density, right_density, tol=1e-6):
        """True when both densities lie in their unit balls up to tol."""
        inside = ball_norm(self.mu, self.left_ball, left_density) <= 1 + tol
        if not self.fixed_right:
            inside = inside and ball_norm(self.nu, self.right_ball, right_density) <= 1 + tol
        return bool(inside)


def _uniform(weights, exponent):
    if exponent.infinite:
        return np.ones_like(weights)
    return np.full_like(weights, float(weights.sum()) ** (-exponent.reciprocal))


def ball_norm(weights, exponent, density):
    """||density||_{L_e(weights)}."""
    return float(norm_values(FunctionSpace(tuple(weights), WeightedLr(exponent)), np.asarray(density, dtype=float)))


def weight_shape(domain, codomain, left_power, right_power):
    """Checks the convexity and concavity hypotheses and derives the weight balls.

    The domain must be a WeightedLr space L_r with r >= a (a-convex with constant 1),
    the codomain a WeightedLr space L_t whose dual exponent t' is at least b.

    Args:
        domain (FunctionSpace): X
        codomain (FunctionSpace): Y
        left_power (Exponent): a, finite and at least 1
        right_power (Exponent): b, at least 1

    Returns:
        WeightShape
    """
    left_power, right_power = Exponent.of(left_power), Exponent.of(right_power)
    if not (domain.is_weighted_lr and codomain.is_weighted_lr):
        raise LatticeInputError("weight problems need WeightedLr domain and codomain")
    if left_power.infinite or left_power < 1 or right_power < 1:
        raise LatticeInputError(f"weight exponents must satisfy 1 <= a < inf and b >= 1, "
                                f"got a={left_power}, b={right_power}")
    if domain.exponent < left_power:
        raise LatticeInputError(f"domain {domain.describe()} is not {left_power}-convex")
    dual_exponent = conjugate_exponent(codomain.exponent)
    if dual_exponent < right_power:
        raise LatticeInputError(
            f"codomain {codomain.describe()} is not {conjugate_exponent(right_power)}-concave")
    right_ball = None if right_power.infinite else _ball_exponent(dual_exponent, right_power)
    return WeightShape(domain.weights, codomain.weights, left_power, right_power,
                       _ball_exponent(domain.exponent, left_power), right_ball)


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class WeightCut:
    """
    One sampled constraint of the weight problem.

    value (float): sum_j ∫|T x_j · y'_j| dν
    left (ndarray): A, paired with F
    right (ndarray): B, paired with G; when g = 1 only its maximum enters
    xs (ndarray): domain family x_j
    ys (ndarray): dual family y'_j
    """
    value: float
    left: np.ndarray
    right: np.ndarray
    xs: np.ndarray
    ys: np.ndarray

    def log_scale(self, shape, left_density, right_density):
        """log of <A, F>^(1/a) <B, G>^(1/b), -inf when a factor vanishes."""
        left = float(np.dot(self.left, left_density))
        right = float(np.max(self.right)) if shape.fixed_right else float(np.dot(self.right, right_density))
        if left <= 0 or right <= 0:
            return -math.inf
        right_term = math.log(right) if shape.fixed_right else shape.right_power.reciprocal * math.log(right)
        return shape.left_power.reciprocal * math.log(left) + right_term

    def ratio(self, shape, left_density, right_density):
        """The constant this cut forces at the given densities."""
        scale = self.log_scale(shape, left_density, right_density)
        if self.value <= 0:
            return 0.0
        return math.inf if scale == -math.inf else math.exp(math.log(self.value) - scale)

    def single_bound(self, shape):
        """Lower bound for the best constant from this cut alone.

        The supremum of <A, F> over the ball of F is the dual ball norm of A/μ, and the
        same holds for G, so no densities can push the ratio below this value.
        """
        if self.value <= 0:
            return 0.0
        left = ball_norm(shape.mu, conjugate_exponent(shape.left_ball), self.left / shape.mu)
        if shape.fixed_right:
            right = float(np.max(self.right))
        else:
            right = ball_norm(shape.nu, conjugate_exponent(shape.right_ball), self.right / shape.nu) \
                ** shape.right_power.reciprocal
        denominator = left ** shape.left_power.reciprocal * right
        return math.inf if denominator <= 0 else self.value / denominator


def make_cut(operator, shape, xs, ys, inner_q=1, inner_p=1):
    """Builds the constraint of the families xs (domain) and ys (codomain dual frame).

    Args:
        operator (OperatorMatrix): T
        shape (WeightShape): exponents of the problem
        xs (ndarray): (members, domain atoms)
        ys (ndarray): (members, codomain atoms)
        inner_q (Exponent): exponent of the q-sum of xs
        inner_p (Exponent): p, the ys enter through their p'-sum

    Returns:
        WeightCut
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    products = np.abs(operator.apply(xs) * ys)
    value = float(np.sum(products @ shape.nu))
    x_sum = lattice_sum(xs, inner_q, axis=0)
    y_sum = lattice_sum(ys, conjugate_exponent(inner_p), axis=0)
    left = shape.mu * x_sum ** shape.left_power.value
    right = y_sum if shape.fixed_right else shape.nu * y_sum ** shape.right_power.value
    return WeightCut(value, left, right, xs, ys)


# pylint: disable=R0903
@dataclass(frozen=True, eq=False)
class WeightMaster:
    """
    Solution of the weight problem over a finite cut set.

    left_density (ndarray): F
    right_density (ndarray): G, None when g = 1
    value (float): constant forced by the cuts at the returned densities
    lower (float): lower bound for the best constant over all densities
    solved (bool): True when SLSQP reported success
    """
    left_density: np.ndarray
    right_density: np.ndarray
    value: float
    lower: float
    solved: bool


@dataclass
class _Layout:
    shape: WeightShape
    left_size: int
    right_size: int

    def split(self, v):
        left = v[:self.left_size]
        right = None if self.shape.fixed_right else v[self.left_size:self.left_size + self.right_size]
        return left, right, v[-1]


def _cut_constraint(cut, layout):
    shape = layout.shape
    log_value = math.log(cut.value)
    left_power = shape.left_power.reciprocal
    right_power = shape.right_power.reciprocal
    fixed_right_log = math.log(float(np.max(cut.right))) if shape.fixed_right else 0.0

    def fun(v):
        left, right, t = layout.split(v)
        left_pair = max(float(np.dot(cut.left, left)), WEIGHT_FLOOR)
        total = t - log_value + left_power * math.log(left_pair)
        if shape.fixed_right:
            return total + fixed_right_log
        right_pair = max(float(np.dot(cut.right, right)), WEIGHT_FLOOR)
        return total + right_power * math.log(right_pair)

    def jac(v):
        left, right, _ = layout.split(v)
        gradient = np.zeros_like(v)
        gradient[:layout.left_size] = left_power * cut.left / max(float(np.dot(cut.left, left)), WEIGHT_FLOOR)
        if not shape.fixed_right:
            gradient[layout.left_size:-1] = right_power * cut.right / max(float(np.dot(cut.right, right)),
                                                                          WEIGHT_FLOOR)
        gradient[-1] = 1.0
        return gradient

    return {"type": "ineq", "fun": fun, "jac": jac}


def _ball_constraint(weights, exponent, start, stop):
    power = exponent.value

    def fun(v):
        return 1.0 - float(np.dot(weights, np.maximum(v[start:stop], 0.0) ** power))

    def jac(v):
        gradient = np.zeros_like(v)
        gradient[start:stop] = -power * weights * np.maximum(v[start:stop], 0.0) ** (power - 1.0)
        return gradient

    return {"type": "ineq", "fun": fun, "jac": jac}


def _project(weights, exponent, density):
    density = np.maximum(density, WEIGHT_FLOOR)
    if exponent.infinite:
        return np.minimum(density, 1.0)
    size = ball_norm(weights, exponent, density)
    return density / size if size > 1 else density


def solve_weight_master(cuts, shape, start=None):
    """Minimizes the constant over densities satisfying every cut.

    Args:
        cuts (list): WeightCut constraints with positive value
        shape (WeightShape): exponents of the problem
        start (tuple): (F, G) to start from; uniform densities when None

    Returns:
        WeightMaster
    """
    cuts = [cut for cut in cuts if cut.value > 0]
    left_start, right_start = start if start is not None else shape.uniform()
    if not cuts:
        return WeightMaster(left_start, right_start, 0.0, 0.0, True)
    layout = _Layout(shape, len(shape.domain_weights), 0 if shape.fixed_right else len(shape.codomain_weights))
    t_start = max(math.log(cut.value) - cut.log_scale(shape, left_start, right_start) for cut in cuts)
    pieces = [left_start] + ([] if shape.fixed_right else [right_start]) + [[t_start]]
    v0 = np.concatenate([np.asarray(piece, dtype=float) for piece in pieces])

    constraints = [_cut_constraint(cut, layout) for cut in cuts]
    bounds = [(WEIGHT_FLOOR, 1.0 if shape.left_ball.infinite else None)] * layout.left_size
    if not shape.left_ball.infinite:
        constraints.append(_ball_constraint(shape.mu, shape.left_ball, 0, layout.left_size))
    if not shape.fixed_right:
        bounds += [(WEIGHT_FLOOR, 1.0 if shape.right_ball.infinite else None)] * layout.right_size
        if not shape.right_ball.infinite:
            constraints.append(_ball_constraint(shape.nu, shape.right_ball, layout.left_size, -1))
    bounds.append((None, None))

    objective_gradient = np.zeros_like(v0)
    objective_gradient[-1] = 1.0
    result = minimize(lambda v: v[-1], v0, jac=lambda v: objective_gradient, method="SLSQP",
                      bounds=bounds, constraints=constraints,
                      options={"ftol": MASTER_TOLERANCE, "maxiter": MASTER_ITERATIONS})
    left, right, _ = layout.split(result.x)
    left = _project(shape.mu, shape.left_ball, left)
    if right is not None:
        right = _project(shape.nu, shape.right_ball, right)
    forced = max(cut.ratio(shape, left, right) for cut in cuts)
    lower = max(cut.single_bound(shape) for cut in cuts)
    if result.success:
        lower = max(lower, min(forced, math.exp(result.x[-1])))
    return WeightMaster(left, right, forced, lower, bool(result.success))
