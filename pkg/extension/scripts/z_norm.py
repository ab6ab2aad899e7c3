"""
The Z-norm on l_{q'}^n (x) X and its Calderón product form.

An element v = sum_k e_k (x) f_k is normed by

    ||v||_Z = inf_a (sum_k |a_k|^q')^(1/q') || (sum_k |f_k / a_k|^q)^(1/q) ||_X,

an infimum over positive scalings a that is convex in log-coordinates. Lower bounds
come from test operators u : X -> l_q^n, since <u, v> <= ||u||_{Z*} ||v||_Z and, for
a q-convex weighted L_r space X (r >= q), ||u||_{Z*} is bounded by the maximum over
the simplex of the concave function

    h(beta) = || (sum_k beta_k |u_k|^q')^(1/q') ||_{X'}.
"""
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from lattice_spaces.scripts.errors import LatticeInputError
from lattice_spaces.scripts.settings import DEFAULT_MAX_ITER
from lattice_spaces.scripts.spaces import (Exponent, FunctionSpace, OperatorMatrix, conjugate_exponent,
                                           coords_of, dual_norm, norm, norm_values, norming_functional)
from lattice_spaces.scripts.vector_calculus import lattice_sum
from regular_norms.scripts.estimates import ORACLE_EXACT, NormEstimate, analytic_kind

SIMPLEX_FLOOR = 1e-15
SCALING_RESTARTS = 2


@dataclass(frozen=True, eq=False)
class ZElement:
    """
    v = sum_k e_k (x) f_k in l_{q'}^n (x) X.

    X (FunctionSpace): the lattice
    n (int): dimension of the sequence factor
    components (ndarray): n x atoms, row k is f_k
    """
    X: FunctionSpace
    n: int
    components: np.ndarray

    def __post_init__(self):
        rows = [coords_of(self.X, member) for member in self.components]
        if len(rows) != self.n:
            raise LatticeInputError(f"a Z element with n = {self.n} needs {self.n} components, got {len(rows)}")
        components = np.array(rows, dtype=float).reshape(self.n, self.X.atom_count)
        components.setflags(write=False)
        object.__setattr__(self, "components", components)

    @property
    def active(self):
        """Indices of the nonzero components."""
        return [k for k in range(self.n) if np.any(self.components[k])]

    def scaled(self, factor):
        """factor * v."""
        return ZElement(self.X, self.n, factor * self.components)


def _check_q(q):
    q = Exponent.of(q)
    if q < 1:
        raise LatticeInputError(f"the Z-norm needs q >= 1, got {q}")
    return q


def is_q_convex(space, q):
    """True for weighted L_r spaces with r >= q, whose q-convexity constant is one."""
    return space.is_weighted_lr and space.exponent >= Exponent.of(q)


def _has_gradient(space):
    return space.is_weighted_lr or space.norm_kind.subgradient is not None


def z_objective(space, components, q, scales):
    """(sum |a_k|^q')^(1/q') ||(sum |f_k/a_k|^q)^(1/q)||_X for one scaling a."""
    q = Exponent.of(q)
    scales = np.asarray(scales, dtype=float)
    y = lattice_sum(np.abs(components) / scales[:, None], q, axis=0)
    return float(lattice_sum(scales, conjugate_exponent(q), axis=0)) * norm(space, y)


def _log_value_and_gradient(space, components, q, log_scales):
    """log of z_objective at a = exp(s) and its gradient in s, for finite q > 1."""
    q_value = q.value
    dual = conjugate_exponent(q).value
    shifted = dual * (log_scales - log_scales.max())
    softmax = np.exp(shifted) / np.exp(shifted).sum()
    scales = np.exp(log_scales)
    powers = np.abs(components) ** q_value * scales[:, None] ** (-q_value)
    y = powers.sum(axis=0) ** (1.0 / q_value)
    size = norm(space, y)
    value = log_scales.max() + np.log(np.exp(shifted).sum()) / dual + np.log(size)
    if not _has_gradient(space):
        return value, None
    functional = norming_functional(space, y)
    damping = np.divide(1.0, y ** (q_value - 1.0), out=np.zeros_like(y), where=y > 0)
    pulled = (powers * damping) @ (space.weight_array * functional)
    return value, softmax - pulled / size


def _scaling_search(space, components, q, seed):
    """Positive scales minimizing z_objective; returns (scales, value)."""
    start = np.log(norm_values(space, components))
    if q.infinite:
        def objective(log_scales):
            return np.log(z_objective(space, components, q, np.exp(log_scales - log_scales.max())))
        candidates = [optimize.minimize(objective, start, method="Nelder-Mead",
                                        options={"xatol": 1e-10, "fatol": 1e-14,
                                                 "maxiter": DEFAULT_MAX_ITER}).x]
    else:
        start = start / conjugate_exponent(q).value
        rng = np.random.default_rng(seed)
        starts = [start] + [start + rng.standard_normal(start.shape) for _ in range(SCALING_RESTARTS)]
        jac = True if _has_gradient(space) else None
        candidates = []
        for point in starts:
            if jac:
                function = lambda s: _log_value_and_gradient(space, components, q, s)
            else:
                function = lambda s: _log_value_and_gradient(space, components, q, s)[0]
            result = optimize.minimize(function, point, jac=jac, method="L-BFGS-B",
                                       options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": DEFAULT_MAX_ITER})
            candidates.append(result.x)
        candidates.append(start)
    best_scales, best_value = None, np.inf
    for log_scales in candidates:
        scales = np.exp(log_scales - np.max(log_scales))
        value = z_objective(space, components, q, scales)
        if value < best_value:
            best_scales, best_value = scales, value
    return best_scales, best_value


def _dual_profile(space, rows, q, beta):
    """h(beta) and its gradient for finite q > 1."""
    dual = conjugate_exponent(q).value
    s = conjugate_exponent(space.exponent)
    powered = np.abs(rows) ** dual
    profile = beta @ powered
    envelope = profile ** (1.0 / dual)
    height = dual_norm(space, envelope)
    if height == 0:
        return 0.0, np.zeros(len(beta))
    if s.infinite:
        raise LatticeInputError("the Z-dual profile needs a finite dual exponent")
    outer = space.weight_array * (envelope / height) ** (s.value - 1.0)
    inner = np.divide(profile ** (1.0 / dual - 1.0), dual, out=np.zeros_like(profile), where=profile > 0)
    return height, powered @ (outer * inner)


def z_dual_upper(space, rows, q, beta=None):
    """Certified upper bound of ||u||_{Z*} for a test operator with functional rows u_k.

    The rows are written in the pairing frame of X. The bound is h at beta plus the
    Frank-Wolfe gap of the concave profile; beta is optimized when not given.

    Args:
        space (FunctionSpace): weighted L_r space with r >= q
        rows (ndarray): n x atoms functionals
        q (Exponent): exponent of the l_q^n factor
        beta (ndarray): point of the simplex

    Returns:
        float
    """
    q = _check_q(q)
    if not is_q_convex(space, q):
        raise LatticeInputError(f"Z-dual bounds need a weighted L_r space with r >= q = {q}, got {space.describe()}")
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if not np.any(rows):
        return 0.0
    if q == Exponent(1.0):
        return dual_norm(space, np.abs(rows).max(axis=0))
    count = rows.shape[0]
    if beta is None:
        result = optimize.minimize(
            lambda b: tuple(-part for part in _dual_profile(space, rows, q, b)),
            np.full(count, 1.0 / count), jac=True, method="SLSQP", bounds=[(0.0, 1.0)] * count,
            constraints=[{"type": "eq", "fun": lambda b: b.sum() - 1.0, "jac": lambda b: np.ones_like(b)}],
            options={"ftol": 1e-14, "maxiter": 500})
        beta = result.x
    beta = np.maximum(np.asarray(beta, dtype=float), SIMPLEX_FLOOR)
    beta = beta / beta.sum()
    height, gradient = _dual_profile(space, rows, q, beta)
    return height + max(0.0, float(gradient.max() - gradient @ beta))


def z_pairing(space, rows, components):
    """<u, v> = sum_k <u_k, f_k>."""
    return float(np.sum(space.weight_array * np.asarray(rows) * np.asarray(components)))


def _dual_certificate(space, components, q, scales):
    """Test functionals u_k and the simplex point where their profile peaks.

    At optimal scales a the rows
        u_k = phi sign(f_k) (|f_k| / (a_k y))^(q-1) S^(1/q') / a_k,
    with S = sum a^q', y the weighted q-sum and phi norming y, satisfy <u, v> = ||v||_Z and
    peak at beta = a^q' / S.
    """
    q_value = q.value
    dual = conjugate_exponent(q).value
    total = float(np.sum(scales ** dual))
    y = lattice_sum(np.abs(components) / scales[:, None], q, axis=0)
    functional = np.abs(norming_functional(space, y))
    ratio = np.divide(np.abs(components), scales[:, None] * y, out=np.zeros_like(components), where=y > 0)
    rows = functional * np.sign(components) * ratio ** (q_value - 1.0) * (total ** (1.0 / dual) / scales)[:, None]
    return rows, scales ** dual / total


def _certified_lower(space, components, q, scales):
    """Certified lower bound and the full-size test rows."""
    fallback = float(norm_values(space, components).max())
    if not is_q_convex(space, q):
        return fallback, None
    rows, beta = _dual_certificate(space, components, q, scales)
    bound = z_dual_upper(space, rows, q, beta)
    if bound <= 0:
        return fallback, None
    value = z_pairing(space, rows, components) / bound
    if value < fallback:
        return fallback, None
    return value, rows


def _full_rows(v, active, rows):
    if rows is None:
        return None
    full = np.zeros_like(v.components)
    full[active] = rows
    return full


def _sup_sum(components):
    return float(np.abs(components).max(axis=1).sum())


def z_norm(v, q, seed=0):
    """Two-sided estimate of ||v||_Z.

    Args:
        v (ZElement): the element
        q (Exponent): exponent with q >= 1
        seed (int): seed of the restarts of the scaling search

    Returns:
        NormEstimate; the lower witness holds the test rows u_k when available
    """
    q = _check_q(q)
    active = v.active
    if not active:
        return NormEstimate(0.0, None, 0.0, ORACLE_EXACT)
    components = v.components[active]
    space = v.X
    if len(active) == 1:
        value = norm(space, components[0])
        return NormEstimate(value, None, value, ORACLE_EXACT)
    if q == Exponent(1.0):
        value = norm(space, np.abs(components).sum(axis=0))
        return NormEstimate(value, None, value, ORACLE_EXACT)
    if q.infinite and space.is_sup_normed():
        value = _sup_sum(components)
        rows = np.array([norming_functional(space, member) for member in components])
        return NormEstimate(value, _full_rows(v, active, rows), value, ORACLE_EXACT)
    scales, upper = _scaling_search(space, components, q, seed)
    if q.infinite:
        return NormEstimate(min(float(norm_values(space, components).max()), upper), None, upper,
                            analytic_kind("scaling_search"))
    lower, rows = _certified_lower(space, components, q, scales)
    return NormEstimate(min(lower, upper), _full_rows(v, active, rows), upper, analytic_kind("scaling_search"))


def _calderon_value_and_gradient(space, components, q, weights):
    """|| (sum_k |f_k|^q c_k^(1-q))^(1/q) ||_X and its gradient in c."""
    q_value = q.value
    powers = np.abs(components) ** q_value
    y = (powers * weights[:, None] ** (1.0 - q_value)).sum(axis=0) ** (1.0 / q_value)
    size = norm(space, y)
    if not _has_gradient(space) or size == 0:
        return size, np.zeros_like(weights)
    functional = norming_functional(space, y)
    damping = np.divide(1.0, y ** (q_value - 1.0), out=np.zeros_like(y), where=y > 0)
    pulled = (powers * damping) @ (space.weight_array * functional)
    return size, (1.0 - q_value) / q_value * pulled * weights ** (-q_value)


def calderon_product_norm(v, q):
    """Norm of (f_k) in the Calderón product E_0^(1-1/q) E_1^(1/q).

    E_0 holds n-tuples of bounded functions with norm sum_k ||g_k||_∞ and E_1 the
    tuples (h_k) with norm ||(sum_k |h_k|)^(1/q)||_X^q. Decompositions with constant
    g_k = c_k and h_k = |f_k|^q c_k^(1-q) are optimal, so the value is the minimum over
    the simplex of ||(sum_k |f_k|^q c_k^(1-q))^(1/q)||_X.

    The product coincides with the Z-norm only when X is q-convex with constant one,
    so other spaces are rejected for q > 1; at q = ∞ that leaves the sup-normed spaces.

    Args:
        v (ZElement): the element
        q (Exponent): exponent with q >= 1

    Returns:
        NormEstimate
    """
    q = _check_q(q)
    if q > 1 and not is_q_convex(v.X, q):
        raise LatticeInputError(
            f"the Calderón form needs a q-convex X (weighted L_r, r >= {q}), got {v.X.describe()}")
    active = v.active
    if not active:
        return NormEstimate(0.0, None, 0.0, ORACLE_EXACT)
    components = v.components[active]
    space = v.X
    if len(active) == 1:
        value = norm(space, components[0])
        return NormEstimate(value, None, value, ORACLE_EXACT)
    if q == Exponent(1.0):
        value = norm(space, np.abs(components).sum(axis=0))
        return NormEstimate(value, None, value, ORACLE_EXACT)
    if q.infinite:
        value = _sup_sum(components)
        return NormEstimate(value, None, value, ORACLE_EXACT)
    count = len(active)
    start = norm_values(space, components)
    start = start / start.sum()
    jac = True if _has_gradient(space) else None
    function = (lambda c: _calderon_value_and_gradient(space, components, q, c)) if jac \
        else (lambda c: _calderon_value_and_gradient(space, components, q, c)[0])
    result = optimize.minimize(
        function, start, jac=jac, method="SLSQP", bounds=[(SIMPLEX_FLOOR, 1.0)] * count,
        constraints=[{"type": "eq", "fun": lambda c: c.sum() - 1.0, "jac": lambda c: np.ones_like(c)}],
        options={"ftol": 1e-15, "maxiter": 1000})
    weights = np.maximum(result.x, SIMPLEX_FLOOR)
    weights = weights / weights.sum()
    upper = min(_calderon_value_and_gradient(space, components, q, weights)[0],
                _calderon_value_and_gradient(space, components, q, start)[0])
    scales = weights ** (1.0 / conjugate_exponent(q).value)
    lower, rows = _certified_lower(space, components, q, scales)
    return NormEstimate(min(lower, upper), _full_rows(v, active, rows), upper,
                        analytic_kind("calderon_decomposition"))


def pairing_operator(space, rows, q):
    """The operator X -> l_q^n whose k-th coordinate is the functional u_k."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return OperatorMatrix(space, FunctionSpace.lr(q, atoms=rows.shape[0]), rows * space.weight_array)


def z_dual_norm(operator, q):
    """Certified upper bound of ||u||_{Z*} for u : X -> l_q^n.

    Equals max_k ||u_k||_{X'} when X is an L_q space, and never exceeds rho_{∞,q}(u).
    """
    rows = operator.entries / operator.domain.weight_array
    return z_dual_upper(operator.domain, rows, q)
