"""
Analytic upper bounds for rho_{p,q}.

Each bound is a multiple of an operator norm upper bound and holds whenever q <= p:

* positive: a positive T satisfies rho_{p,q}(T) <= ||T||.
* modulus: |T x| <= |T| |x| pointwise, so rho_{p,q}(T) <= || |T| ||.
* lattice exponents: for L_r -> L_t spaces, rho_{p,q}(T) <= ||T|| as soon as
  max(q, r) <= min(p, t), and this persists for smaller q and larger p.
* krivine: rho_{p,q}(T) <= rho_{2,2}(T) <= K_G ||T|| when q <= 2 <= p.
"""
import math

from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.settings import GROTHENDIECK_CONSTANT
from lattice_spaces.scripts.spaces import Exponent


def lattice_exponents_apply(operator, p, q):
    """True when domain L_r and codomain L_t satisfy r <= min(p, t) and q <= t."""
    r, t = operator.domain.exponent, operator.codomain.exponent
    if r is None or t is None:
        return False
    p, q = Exponent.of(p), Exponent.of(q)
    return r <= min(p, t) and q <= t


def modulus_bound(operator, seed=0):
    """Upper bound || |T| || for rho_{p,q}(T), valid for every q <= p."""
    return operator_norm_bounds(operator.modulus(), seed=seed).upper


def analytic_rho_upper(operator, p, q, operator_norm_upper=None,
                       grothendieck_constant=GROTHENDIECK_CONSTANT, seed=0):
    """Smallest applicable analytic upper bound for rho_{p,q}(T).

    Args:
        operator (OperatorMatrix): T
        p, q (Exponent): exponents with q <= p
        operator_norm_upper (float): known upper bound of ||T||; computed when None
        grothendieck_constant (float): K_G
        seed (int): seed of the operator norm search

    Returns:
        (float, string): the bound and its name, (inf, None) when nothing applies
    """
    p, q = Exponent.of(p), Exponent.of(q)
    if p < q:
        return math.inf, None
    if operator_norm_upper is None:
        operator_norm_upper = operator_norm_bounds(operator, seed=seed).upper
    candidates = []
    if operator.is_positive():
        candidates.append((operator_norm_upper, "positive"))
    else:
        candidates.append((modulus_bound(operator, seed), "modulus"))
    if lattice_exponents_apply(operator, p, q):
        candidates.append((operator_norm_upper, "lattice_exponents"))
    if q <= Exponent(2.0) <= p:
        candidates.append((grothendieck_constant * operator_norm_upper, "krivine"))
    return min(candidates, key=lambda candidate: candidate[0])


def concavity_upper(operator, p, q, operator_norm_upper=None):
    """||T|| bounds K_{p,q}(T) when the domain is an L_r space with r <= p."""
    r = operator.domain.exponent
    if r is None or Exponent.of(q) > Exponent.of(p) or r > Exponent.of(p):
        return math.inf, None
    if operator_norm_upper is None:
        operator_norm_upper = operator_norm_bounds(operator).upper
    return operator_norm_upper, "p_concave_domain"


def convexity_upper(operator, p, q, operator_norm_upper=None):
    """||T|| bounds M^{(p,q)}(T) when the codomain is an L_t space with t >= q."""
    t = operator.codomain.exponent
    if t is None or Exponent.of(q) > Exponent.of(p) or t < Exponent.of(q):
        return math.inf, None
    if operator_norm_upper is None:
        operator_norm_upper = operator_norm_bounds(operator).upper
    return operator_norm_upper, "q_convex_codomain"
