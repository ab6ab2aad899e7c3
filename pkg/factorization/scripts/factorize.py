"""
Maurey-Rosenthal factorization of regular operators between weighted L_r spaces.

T: X -> Y is written as M_g ∘ T̂ ∘ M_f with multiplication operators of norm at most
one and an inner operator T̂ between weighted L spaces. The weights come from a
cutting-plane loop: the master in weights.py chooses densities for the cuts
collected so far, an oracle measures the inner operator at those densities and
returns the pair of families that it violates most, and the loop stops once the
inner constant meets the target or the master proves that no weights can.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from lattice_spaces.scripts.errors import FactorizationError, LatticeInputError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.settings import DEFAULT_RESTARTS, ESTIMATOR_TOLERANCE, RESIDUAL_TOLERANCE
from lattice_spaces.scripts.spaces import (Exponent, FunctionSpace, LatticeVector, OperatorMatrix,
                                           conjugate_exponent, norming_functional)
from lattice_spaces.scripts.vector_calculus import VectorMatrix, VectorTuple, norming_tuple
from regular_norms.scripts.ascent import RatioObjective, maximize
from regular_norms.scripts.bounds import analytic_rho_upper
from regular_norms.scripts.estimates import NO_UPPER, NormEstimate, RegularityParams, analytic_kind
from regular_norms.scripts.regular_norms import rho_lower_bound
from factorization.scripts.weights import WeightShape, make_cut, solve_weight_master, weight_shape

CUT_TOLERANCE = 1e-6
DEFAULT_MAX_CUTS = 200
ORACLE_RESTARTS = 4
MR_MODE = "mr"
STRONG_MODE = "strong"
STRONG_TARGET_MARGIN = 1e-2


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    """
    A factorization T = M_g ∘ inner ∘ M_f.

    f (LatticeVector): weight on the domain atoms
    g (LatticeVector): weight on the codomain atoms
    inner (OperatorMatrix): T̂ between the weighted inner spaces
    constant (float): bound claimed for the inner operator
    residual (float): max |M_g inner M_f - T| over the nonzero columns of T
    mode (string): "mr" for an operator norm bound, "strong" for a rho bound
    rho_params (RegularityParams): exponents of the rho bound in strong mode
    converged (bool): True when the loop closed below its tolerance
    history (list): inner constant measured after every cut
    lower_history (list): master lower bound after every cut
    """
    f: LatticeVector
    g: LatticeVector
    inner: OperatorMatrix
    constant: float
    residual: float
    mode: str = MR_MODE
    rho_params: Optional[RegularityParams] = None
    converged: bool = True
    history: list = field(default_factory=list)
    lower_history: list = field(default_factory=list)

    def to_dict(self):
        """Report form."""
        return {
            "mode": self.mode,
            "f": self.f.coords,
            "g": self.g.coords,
            "inner": self.inner.entries,
            "constant": self.constant,
            "residual": self.residual,
            "converged": self.converged,
            "history": self.history,
            "lower_history": self.lower_history,
        }


# pylint: disable=R0903
@dataclass(frozen=True)
class FactorizationCheck:
    """
    Outcome of verify_factorization.

    residual (float): reconstruction error over the nonzero columns of T
    inner_norm_est (float): estimate of ||T̂|| or of rho_{p,q}(T̂)
    weights_ok (bool): both multiplication operators have norm <= 1 + 1e-6
    ok (bool): residual, inner norm and weights all within tolerance
    """
    residual: float
    inner_norm_est: float
    weights_ok: bool
    ok: bool

    def to_dict(self):
        return {"residual": self.residual, "inner_norm_est": self.inner_norm_est,
                "weights_ok": self.weights_ok, "ok": self.ok}


@dataclass
class _Problem:
    operator: OperatorMatrix
    shape: WeightShape
    inner_domain: FunctionSpace
    inner_codomain: FunctionSpace
    oracle: Callable
    inner_q: Exponent = Exponent(1.0)
    inner_p: Exponent = Exponent(1.0)

    def inner_operator(self, f, g):
        entries = self.operator.entries / np.outer(g, f)
        return OperatorMatrix(self.inner_domain, self.inner_codomain, entries)

    def seed_cuts(self):
        """Cuts of the coordinate pairs (e_a, e_b) with T_ba != 0."""
        domain, codomain = self.operator.domain, self.operator.codomain
        cuts = []
        for b, a in zip(*np.nonzero(self.operator.entries)):
            x, y = np.zeros(domain.atom_count), np.zeros(codomain.atom_count)
            x[a], y[b] = 1.0, 1.0
            cuts.append(make_cut(self.operator, self.shape, x, y, self.inner_q, self.inner_p))
        return cuts


def reconstruction_residual(operator, f, g, inner):
    """max |g_b inner_ba f_a - T_ba| over the columns a where T does not vanish."""
    rebuilt = np.asarray(g)[:, None] * inner.entries * np.asarray(f)[None, :]
    active = np.any(operator.entries != 0, axis=0)
    if not np.any(active):
        return 0.0
    return float(np.max(np.abs(rebuilt - operator.entries)[:, active]))


def coincidence_constant(operator, p, q):
    """M^(p)(Y) ||T|| M_(q)(X), finite when X = L_r with r <= q and Y = L_t with p <= t.

    WeightedLr spaces have convexity and concavity constants one, so the bound is
    the operator norm upper bound itself; math.inf when the exponents do not fit.
    """
    p, q = Exponent.of(p), Exponent.of(q)
    r, t = operator.domain.exponent, operator.codomain.exponent
    if r is None or t is None or not (r <= q and p <= t):
        return math.inf
    return operator_norm_bounds(operator).upper


def _norm_oracle(seed):
    def oracle(inner):
        bounds = operator_norm_bounds(inner, seed=seed, restarts=ORACLE_RESTARTS, rigorous=False)
        image = inner.apply(bounds.witness)
        functional = norming_functional(inner.codomain, image)
        return bounds.lower, bounds.witness[None], functional[None]
    return oracle


def _rho_oracle(params, tuple_size, seed):
    def oracle(inner):
        objective = RatioObjective(inner, params.p, params.q)
        result = maximize(objective, 1, tuple_size, seed=seed, restarts=ORACLE_RESTARTS)
        xs = result.witness[0]
        images = VectorTuple(inner.codomain, inner.apply(xs))
        return result.value, xs, norming_tuple(inner.codomain, images, params.p).members
    return oracle


def _solve(problem, target, max_cuts):
    """The cutting-plane loop shared by both factorization modes.

    The loop closes when the measured inner constant comes within CUT_TOLERANCE of
    the target, or of the master lower bound when no target is given. A target that
    the master rules out by more than ESTIMATOR_TOLERANCE raises FactorizationError.

    Returns:
        (tuple, bool, list, list, WeightCut): best (value, f, g, inner), converged flag,
        measured constants, master lower bounds and the most violated cut
    """
    shape = problem.shape
    densities = shape.uniform()
    seeds = problem.seed_cuts()
    cuts, history, lower_history = [], [], []
    best = None
    worst_cut = max(seeds, key=lambda cut: cut.single_bound(shape), default=None)
    lower = worst_cut.single_bound(shape) if worst_cut is not None else 0.0
    if target is not None and lower > target * (1 + ESTIMATOR_TOLERANCE):
        raise FactorizationError(
            f"no weights reach the constant {target:.6g}; a single coordinate pair forces {lower:.6g}",
            witness=_witness(worst_cut, shape))
    converged = False
    for _ in range(max_cuts + 1):
        f, g = shape.factors(*densities)
        inner = problem.inner_operator(f, g)
        value, xs, ys = problem.oracle(inner)
        history.append(value)
        if best is None or value < best[0]:
            best = (value, f, g, inner)
        goal = lower if target is None else target
        if value == 0 or value <= goal * (1 + CUT_TOLERANCE):
            converged = True
            break
        if target is not None and lower > target * (1 + CUT_TOLERANCE) \
                and best[0] <= target * (1 + ESTIMATOR_TOLERANCE):
            break
        if len(cuts) == max_cuts:
            break
        cut = make_cut(problem.operator, shape, xs / f, ys / g, problem.inner_q, problem.inner_p)
        cuts.append(cut)
        if worst_cut is None or cut.single_bound(shape) > worst_cut.single_bound(shape):
            worst_cut = cut
        master = solve_weight_master(seeds + cuts, shape, start=densities)
        lower = max(lower, master.lower)
        lower_history.append(lower)
        if target is not None and lower > target * (1 + ESTIMATOR_TOLERANCE):
            raise FactorizationError(
                f"no weights reach the constant {target:.6g}; the sampled constraints force at least "
                f"{lower:.6g}", witness=_witness(worst_cut, shape), history=history)
        densities = (master.left_density, master.right_density)
    return best, converged, history, lower_history, worst_cut


def _witness(cut, shape):
    if cut is None:
        return {}
    return {"x": cut.xs, "y": cut.ys, "ratio": cut.single_bound(shape)}


def _finish(problem, target, max_cuts, certify, mode, rho_params=None):
    best, converged, history, lower_history, worst_cut = _solve(problem, target, max_cuts)
    value, f, g, inner = best
    if target is not None and value > target * (1 + ESTIMATOR_TOLERANCE):
        raise FactorizationError(
            f"best inner constant {value:.6g} after {max_cuts} cuts exceeds {target:.6g}",
            witness=_witness(worst_cut, problem.shape), history=history)
    constant = target if target is not None else max(certify(inner), value)
    operator = problem.operator
    return FactorizationResult(
        LatticeVector(operator.domain, f), LatticeVector(operator.codomain, g), inner, float(constant),
        reconstruction_residual(operator, f, g, inner), mode, rho_params, converged, history, lower_history)


def maurey_rosenthal_factorize(operator, p, s, C_hint=None, max_cuts=DEFAULT_MAX_CUTS, seed=0):
    """Factors T: X -> Y through T̂: L_p(μ) -> L_s(ν).

    X must be a p-convex WeightedLr space (exponent >= p) and Y an s-concave one
    (exponent <= s), with 1 <= s <= p < ∞. The weights are f = F^(1/p) and
    g = G^(1/s') with F in the unit ball of (X_[p])' and G in the unit ball of
    ((Y')_[s'])'; for s = 1 the codomain weight is the constant 1.

    Args:
        operator (OperatorMatrix): T
        p (Exponent): inner domain exponent
        s (Exponent): inner codomain exponent
        C_hint (float): constant to reach; when None the loop minimizes the constant
            and the result carries a certified upper bound of ||T̂||
        max_cuts (int): cut budget
        seed (int): seed of the operator norm oracle

    Returns:
        FactorizationResult
    """
    p, s = Exponent.of(p), Exponent.of(s)
    if p.infinite or s < 1 or p < s:
        raise LatticeInputError(f"factorization needs 1 <= s <= p < inf, got p={p}, s={s}")
    shape = weight_shape(operator.domain, operator.codomain, p, conjugate_exponent(s))
    if C_hint is None:
        coincidence = coincidence_constant(operator, p, p)
        C_hint = coincidence if math.isfinite(coincidence) else None
    if operator.is_zero():
        C_hint = 0.0
    mu, nu = operator.domain.weights, operator.codomain.weights
    problem = _Problem(operator, shape,
                       FunctionSpace.lr(p, weights=mu), FunctionSpace.lr(s, weights=nu),
                       _norm_oracle(seed))
    return _finish(problem, C_hint, max_cuts,
                   lambda inner: operator_norm_bounds(inner, seed=seed).upper, MR_MODE)


def strong_factorize_Lr(operator, p, q, r, K=None, max_cuts=DEFAULT_MAX_CUTS, seed=0, tuple_size=2):
    """Strong factorization through L_r(μ) -> L_r(ν) with a (p,q)-regular inner operator.

    X must be r-convex and Y r-concave (WeightedLr exponents >= r and <= r). The cuts
    come from the matrix inequality restricted to one row: for a tuple (x_j) and the
    norming tuple (y'_j) of its image,
        sum_j ∫|T x_j · y'_j| dν <= K (∫(sum_j |x_j|^q)^(r/q) f_0 dμ)^(1/r)
                                     (∫(sum_j |y'_j|^(p'))^(r'/p') g_0 dν)^(1/r').

    Args:
        operator (OperatorMatrix): T
        p, q (Exponent): regularity exponents with q <= p
        r (Exponent): exponent of the inner spaces, 1 <= r < ∞
        K (float): constant to reach; strong_target of matrix_inequality_constant when None
        max_cuts (int): cut budget
        seed (int): seed of the estimators
        tuple_size (int): members of the tuples searched by the oracle

    Returns:
        FactorizationResult with mode "strong"
    """
    params = RegularityParams(p, q).require_ordered()
    r = Exponent.of(r)
    if r.infinite or r < 1:
        raise LatticeInputError(f"strong factorization needs 1 <= r < inf, got r={r}")
    shape = weight_shape(operator.domain, operator.codomain, r, conjugate_exponent(r))
    if K is None:
        K = strong_target(matrix_inequality_constant(operator, params.p, params.q, r, rows=2, cols=tuple_size,
                                                     seed=seed))
    mu, nu = operator.domain.weights, operator.codomain.weights
    problem = _Problem(operator, shape,
                       FunctionSpace.lr(r, weights=mu), FunctionSpace.lr(r, weights=nu),
                       _rho_oracle(params, tuple_size, seed), params.q, params.p)
    return _finish(problem, float(K), max_cuts, None, STRONG_MODE, params)


def strong_target(estimate, margin=STRONG_TARGET_MARGIN):
    """Constant a strong factorization aims for: the certified upper bound when there is
    one, else the ascent value widened by the relative margin."""
    if math.isfinite(estimate.upper):
        return float(estimate.upper)
    return float(estimate.lower) * (1.0 + margin)


def strong_factorization_condition(p, q, r):
    """True when [q, p] meets [min(r, 2), max(r, 2)]."""
    p, q, r = (Exponent.of(value).as_float() for value in (p, q, r))
    low, high = min(r, 2.0), max(r, 2.0)
    return max(q, low) <= min(p, high)


def matrix_inequality_constant(operator, p, q, r, rows=2, cols=2, seed=0, restarts=DEFAULT_RESTARTS):
    """Best K found for the matrix inequality over rows x cols families.

    The ratio ||(sum_i (sum_j |T x_ij|^p)^(r/p))^(1/r)||_Y over the same mixed norm of
    the x_ij with q in place of p is maximized by the ascent of regular_norms. The
    upper bound is the analytic rho bound when both spaces are L_r, where the mixed
    norms split row by row.

    Args:
        operator (OperatorMatrix): T
        p, q (Exponent): inner exponents with q <= p
        r (Exponent): row exponent
        rows, cols (int): size of the families
        seed (int): seed of the random starts
        restarts (int): number of random starts

    Returns:
        NormEstimate with a VectorMatrix witness
    """
    params = RegularityParams(p, q).require_ordered()
    r = Exponent.of(r)
    objective = RatioObjective(operator, params.p, params.q, outer=r)
    result = maximize(objective, rows, cols, seed=seed, restarts=restarts)
    witness = VectorMatrix(operator.domain, result.witness)
    upper, kind = math.inf, NO_UPPER
    if operator.domain.exponent == r and operator.codomain.exponent == r:
        value, name = analytic_rho_upper(operator, params.p, params.q, seed=seed)
        if name is not None:
            upper, kind = value, analytic_kind(name)
    return NormEstimate(result.value, witness, upper, kind)


def verify_factorization(result, operator, rho_params=None, tuple_size=2, seed=0):
    """Recomposes the factorization and re-estimates its inner constant.

    Args:
        result (FactorizationResult): the factorization
        operator (OperatorMatrix): T
        rho_params (RegularityParams): estimate rho_{p,q}(T̂) instead of ||T̂||; defaults
            to the exponents of a strong factorization
        tuple_size (int): tuple size of the rho estimate
        seed (int): seed of the estimators

    Returns:
        FactorizationCheck
    """
    f, g = np.asarray(result.f.coords), np.asarray(result.g.coords)
    residual = reconstruction_residual(operator, f, g, result.inner)
    rho_params = rho_params or result.rho_params
    if rho_params is not None:
        inner_norm = rho_lower_bound(result.inner, rho_params, tuple_size, seed=seed).lower
    else:
        inner_norm = operator_norm_bounds(result.inner, seed=seed, rigorous=False).lower
    weights_ok = _multipliers_ok(result, operator)
    ok = residual <= RESIDUAL_TOLERANCE and inner_norm <= result.constant * (1 + ESTIMATOR_TOLERANCE) \
        and weights_ok
    return FactorizationCheck(residual, inner_norm, weights_ok, bool(ok))


def _multipliers_ok(result, operator):
    """||M_f: X -> inner domain|| <= 1 and ||M_g: inner codomain -> Y|| <= 1."""
    inner_p = result.inner.domain.exponent
    inner_s = result.inner.codomain.exponent
    try:
        shape = weight_shape(operator.domain, operator.codomain, inner_p, conjugate_exponent(inner_s))
    except LatticeInputError:
        return False
    densities = shape.densities(result.f.coords, result.g.coords)
    if shape.fixed_right and not np.allclose(result.g.coords, 1.0):
        return False
    return shape.in_balls(*densities)
