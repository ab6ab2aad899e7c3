"""
The acceptance battery: twelve property checks over randomized instances.

Every check takes a seed and a scale; the scale multiplies the sample counts so
that a quick run exercises the same code paths as the full battery.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from lattice_spaces.scripts.errors import CertificationError, FactorizationError
from lattice_spaces.scripts.operator_norms import operator_norm_bounds
from lattice_spaces.scripts.serialization import dumps_json
from lattice_spaces.scripts.settings import GROTHENDIECK_CONSTANT
from lattice_spaces.scripts.spaces import (Exponent, FunctionSpace, OperatorMatrix, conjugate_exponent,
                                           dual_norm, dual_space, identity_operator, norm, norm_values)
from lattice_spaces.scripts.vector_calculus import (VectorTuple, dual_witness, holder_check, p_sum,
                                                    pointwise_product, psum_norm)
from regular_norms.scripts.estimates import RegularityParams
from regular_norms.scripts.regular_norms import rho_growth_witness, rho_lower_bound
from tensor_norms.scripts.tensor_norms import eps_norm, phi_pq_upper, pi_bounds, r_pq_bounds
from tensor_norms.scripts.tensors import Tensor
from tensor_norms.scripts.trace_duality import trace_duality_check
from factorization.scripts.factorize import (matrix_inequality_constant, maurey_rosenthal_factorize,
                                             strong_factorize_Lr, strong_target, verify_factorization)
from factorization.scripts.mz_sweep import mz_predicted, observed_ratio
from extension.scripts.dyadic import DyadicLevel, dyadic_Jn, dyadic_Pn, uniform_lq
from extension.scripts.hahn_banach import (RestrictedOperator, Subspace, certify_extension,
                                           extend_operator_Lq, hahn_banach_extend, rho_infinity_q)
from extension.scripts.z_norm import ZElement, calderon_product_norm, z_norm

MAX_LISTED_FAILURES = 10
HOLDER_TRIPLES = [(1, 2, 2), (1, "inf", 1), (2, 4, 4), (1, 3, 1.5)]
T_R_PAIRS = [(1, 1), (1, 2), (1, "inf"), (2, 2), (2, "inf"), ("inf", "inf")]
RANDOM_EXPONENTS = [1, 1.5, 2, 4, math.inf]
# one cell per coincidence case, in the order of mz_predicted
MZ_FAMILIES = [(3, 1.5, 2, 2), (3, 2, 1, 1), (2, 1, 1.5, 1.2), (3, 2, 4, 3), (3, 2, "inf", "inf"), (2, 2, 3, 1.5)]
MZ_SIZES = (2, 3, 4)
GRID_POINTS = 401


@dataclass
class CriterionResult:
    """
    Outcome of one acceptance criterion.

    number (int): position in the battery
    name (string): short name
    checked (int): number of instances checked
    failures (list): descriptions of the failed instances
    worst (float): largest observed deviation, in the criterion's own measure
    """
    number: int
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    worst: float = 0.0

    @property
    def passed(self):
        return self.checked > 0 and not self.failures

    def record(self, ok, label, deviation=0.0):
        """Counts one instance."""
        self.checked += 1
        self.worst = max(self.worst, float(deviation))
        if not ok:
            self.failures.append(label)

    def to_dict(self):
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "failure_count": len(self.failures),
            "failures": self.failures[:MAX_LISTED_FAILURES],
            "worst": self.worst,
        }


def _count(full, scale):
    return max(1, int(round(full * scale)))


def _label(*exponents):
    return ",".join(str(Exponent.of(value)) for value in exponents)


def _random_space(rng, atoms=None, exponents=RANDOM_EXPONENTS):
    atoms = atoms or int(rng.integers(2, 5))
    return FunctionSpace.lr(rng.choice(exponents), weights=rng.uniform(0.3, 2.0, size=atoms))


def _random_tensor(rng, left, right, rank):
    return Tensor(left, right, rng.standard_normal((rank, left.atom_count)),
                  rng.standard_normal((rank, right.atom_count)))


def identity_suite(seed=0, scale=1.0):
    """rho_{p,q}(Id) = 1 on l_r^n for q <= p."""
    result = CriterionResult(1, "identity")
    exponents = [Exponent.of(value) for value in (1, 2, 3, "inf")]
    largest = min(4, max(1, int(round(4 * scale))))
    for r in exponents:
        for n in range(1, largest + 1):
            identity = identity_operator(FunctionSpace.lr(r, atoms=n))
            for p in exponents:
                for q in exponents:
                    if p < q:
                        continue
                    estimate = rho_lower_bound(identity, RegularityParams(p, q), n, seed=seed, restarts=4)
                    ok = 1 - 1e-6 <= estimate.lower <= 1 + 1e-9 and estimate.upper <= 1 + 1e-9
                    result.record(ok, f"r={_label(r)} n={n} p,q={_label(p, q)}",
                                  max(abs(1 - estimate.lower), estimate.upper - 1))
    return result


def t_r_exactness(seed=0, scale=1.0):
    """rho_{t,r}(T) = ||T|| for T: l_r^3 -> l_t^3 with r <= t."""
    result = CriterionResult(2, "t_r_exactness")
    rng = np.random.default_rng(seed)
    for index in range(_count(100, scale)):
        r, t = T_R_PAIRS[index % len(T_R_PAIRS)]
        operator = OperatorMatrix(FunctionSpace.lr(r, atoms=3), FunctionSpace.lr(t, atoms=3),
                                  rng.standard_normal((3, 3)))
        size = operator_norm_bounds(operator, seed=seed).upper
        estimate = rho_lower_bound(operator, RegularityParams(t, r), 3, seed=seed, restarts=4)
        ok = size * (1 - 1e-3) <= estimate.lower <= size * (1 + 1e-9)
        result.record(ok, f"sample {index} r,t={_label(r, t)}", abs(estimate.lower / size - 1))
    return result


def krivine_bound(seed=0, scale=1.0):
    """rho_{2,2}(T) <= K_G ||T|| on random operators, and the Hadamard separation."""
    result = CriterionResult(3, "krivine")
    rng = np.random.default_rng(seed)
    for index in range(_count(500, scale)):
        domain, codomain = _random_space(rng), _random_space(rng)
        operator = OperatorMatrix(domain, codomain, rng.standard_normal((codomain.atom_count, domain.atom_count)))
        size = operator_norm_bounds(operator, seed=seed).upper
        estimate = rho_lower_bound(operator, RegularityParams(2, 2), domain.atom_count, seed=seed, restarts=4)
        result.record(estimate.lower <= GROTHENDIECK_CONSTANT * size * (1 + 1e-12), f"sample {index}",
                      estimate.lower / size)
    hadamard = OperatorMatrix(FunctionSpace.lr("inf", atoms=2), FunctionSpace.lr(1, atoms=2), [[1, 1], [1, -1]])
    estimate = rho_lower_bound(hadamard, RegularityParams(2, 2), 2, seed=seed, restarts=4)
    size = operator_norm_bounds(hadamard).upper
    separated = estimate.lower >= 2 * math.sqrt(2) - 1e-9 and estimate.lower >= 1.41 * size
    result.record(separated, "hadamard separation", estimate.lower / size)
    return result


def degeneracy(seed=0, scale=1.0):
    """For p < q the constant tuple grows exactly like n^(1/p - 1/q)."""
    result = CriterionResult(4, "degeneracy")
    rng = np.random.default_rng(seed)
    for p, q in [(1, 2), (2, "inf"), (1.5, 3)]:
        params = RegularityParams(p, q)
        domain, codomain = _random_space(rng, 3, [2]), _random_space(rng, 3, [2])
        operator = OperatorMatrix(domain, codomain, rng.standard_normal((3, 3)))
        x = rng.standard_normal(3)
        single = norm(codomain, operator.apply(x)) / norm(domain, x)
        power = params.p.reciprocal - params.q.reciprocal
        for n in range(1, 65):
            value = rho_growth_witness(operator, params, x, n)
            expected = n ** power * single
            deviation = abs(value / expected - 1)
            result.record(deviation <= 1e-12, f"p,q={_label(p, q)} n={n}", deviation)
    return result


def duality_formula(seed=0, scale=1.0):
    """The dual witness attains the p-sum norm and has s-sum dual norm at most one."""
    result = CriterionResult(5, "duality")
    rng = np.random.default_rng(seed)
    for index in range(_count(200, scale)):
        space = FunctionSpace.lr(rng.choice([1, 2, 3, math.inf]), weights=rng.uniform(0.2, 2.0,
                                                                                   size=int(rng.integers(1, 5))))
        p = float(rng.choice([1.5, 2, 3]))
        r, p, s = [(1, 2, 2), (1, p, conjugate_exponent(p)), (2, 4, 4)][int(rng.integers(0, 3))]
        t = VectorTuple(space, rng.standard_normal((int(rng.integers(1, 5)), space.atom_count)))
        witness = dual_witness(space, t, p, r, s)
        target = psum_norm(t, p)
        attained = psum_norm(pointwise_product(t, witness), r)
        size = dual_norm(space, p_sum(witness, s))
        deviation = abs(attained - target) / max(1.0, target)
        result.record(deviation <= 1e-9 and size <= 1 + 1e-9, f"sample {index}", max(deviation, size - 1))
    return result


def holder_suite(seed=0, scale=1.0):
    """No violation of the generalized Hölder inequality beyond 1e-9 relative slack."""
    result = CriterionResult(6, "holder")
    rng = np.random.default_rng(seed)
    for r, p, s in HOLDER_TRIPLES:
        for index in range(_count(1000, scale)):
            space = FunctionSpace.lr(rng.choice([1, 1.5, 2, 3, math.inf]),
                                     weights=rng.uniform(0.2, 2.0, size=int(rng.integers(1, 5))))
            n = int(rng.integers(1, 5))
            phi = VectorTuple(space, rng.standard_normal((n, space.atom_count)))
            psi = VectorTuple(space, rng.standard_normal((n, space.atom_count)))
            record = holder_check(space, phi, psi, r, p, s)
            result.record(record.slack >= -1e-9 * record.rhs, f"r,p,s={_label(r, p, s)} sample {index}",
                          max(0.0, -record.slack))
    return result


def tensor_ordering(seed=0, scale=1.0):
    """eps <= r_{2,1} <= pi as certified intervals, and the trace duality gap."""
    result = CriterionResult(7, "tensor_ordering")
    rng = np.random.default_rng(seed)
    for index in range(_count(200, scale)):
        left = FunctionSpace.lr(rng.choice([1, 2, math.inf]), atoms=int(rng.integers(2, 4)))
        right = FunctionSpace.lr(rng.choice([1, 2, math.inf]), atoms=int(rng.integers(2, 4)))
        tensor = _random_tensor(rng, left, right, int(rng.integers(1, 4)))
        eps, pi = eps_norm(tensor, seed=seed), pi_bounds(tensor, seed=seed)
        r = r_pq_bounds(tensor, 2, 1, seed=seed, restarts=2)
        ok = eps.lower <= r.upper * (1 + 1e-6) and r.lower <= pi.upper * (1 + 1e-6)
        result.record(ok, f"tensor {index}", max(0.0, eps.lower - r.upper, r.lower - pi.upper))
    space = FunctionSpace.lr(2, atoms=2)
    for index in range(_count(10, scale)):
        operator = OperatorMatrix(space, space, rng.standard_normal((2, 2)))
        record = trace_duality_check(operator, 2, 2, 4, seed=seed, restarts=8)
        result.record(record.gap <= 2e-2 * max(1.0, record.rho_estimate), f"trace duality {index}", record.gap)
    return result


def grothendieck_predual(seed=0, scale=1.0):
    """pi <= K_G phi_{2,2} on sup-normed and general weighted L_r spaces."""
    result = CriterionResult(8, "grothendieck_predual")
    rng = np.random.default_rng(seed)
    for index in range(_count(200, scale)):
        if index % 2:
            left, right = _random_space(rng, 2), _random_space(rng, 2)
        else:
            left = right = FunctionSpace.lr("inf", atoms=2)
        tensor = _random_tensor(rng, left, right, 2)
        pi = pi_bounds(tensor, seed=seed)
        phi = phi_pq_upper(tensor, 2, 2)
        result.record(pi.upper <= GROTHENDIECK_CONSTANT * phi * (1 + 1e-6), f"tensor {index}",
                      pi.upper / phi if phi > 0 else 0.0)
    return result


def _factorization_case(result, label, operator, solve, bound=None):
    try:
        factorization = solve()
    except FactorizationError as error:
        result.record(False, f"{label}: {error}", math.inf)
        return
    check = verify_factorization(factorization, operator, seed=0)
    ok = check.ok and (bound is None or factorization.constant <= bound * (1 + 1e-2))
    result.record(ok, label, check.residual)


def factorization_soundness(seed=0, scale=1.0):
    """Every factorization recomposes to T with an inner constant within tolerance."""
    result = CriterionResult(9, "factorization")
    rng = np.random.default_rng(seed)
    domain, codomain = FunctionSpace.lr(4, atoms=2), FunctionSpace.lr(4 / 3, atoms=2)
    for index in range(_count(50, scale)):
        operator = OperatorMatrix(domain, codomain, rng.uniform(0.2, 1.0, (2, 2)))
        target = operator_norm_bounds(operator).upper * (1 + 1e-3)
        _factorization_case(result, f"positive {index}", operator,
                            lambda: maurey_rosenthal_factorize(operator, 2, 2, C_hint=target, max_cuts=120,
                                                               seed=seed))
    sup, l1 = FunctionSpace.lr("inf", atoms=2), FunctionSpace.lr(1, atoms=2)
    for index in range(_count(50, scale)):
        operator = OperatorMatrix(sup, l1, rng.standard_normal((2, 2)))
        bound = GROTHENDIECK_CONSTANT * operator_norm_bounds(operator).upper
        _factorization_case(result, f"krivine {index}", operator,
                            lambda: maurey_rosenthal_factorize(operator, 2, 2, seed=seed), bound)
    l2 = FunctionSpace.lr(2, atoms=2)
    for index in range(_count(10, scale)):
        operator = OperatorMatrix(l2, l2, rng.uniform(0.1, 1.0, (2, 2)))
        K = strong_target(matrix_inequality_constant(operator, 2, 1, 2, seed=seed, restarts=4))
        try:
            factorization = strong_factorize_Lr(operator, 2, 1, 2, K=K, seed=seed)
        except FactorizationError as error:
            result.record(False, f"strong {index}: {error}", math.inf)
            continue
        inner = rho_lower_bound(factorization.inner, RegularityParams(2, 1), 2, seed=seed, restarts=4).lower
        ok = inner <= K * (1 + 1e-2) and verify_factorization(factorization, operator).ok
        result.record(ok, f"strong {index}", inner / K if K > 0 else 0.0)
    return result


def mz_consistency(seed=0, scale=1.0):
    """Predicted coincidences show no growth in n; the p < q cell diverges."""
    result = CriterionResult(10, "mz_sweep")
    samples = _count(20, scale)
    for p, q, r1, r2 in MZ_FAMILIES:
        label = f"p,q,r1,r2={_label(p, q, r1, r2)}"
        if not mz_predicted(p, q, r1, r2):
            result.record(False, f"{label} is not a predicted coincidence", math.inf)
            continue
        ratios = [observed_ratio(p, q, r1, r2, n, samples, seed=seed) for n in MZ_SIZES]
        spread = max(ratios) / min(ratios) - 1 if min(ratios) > 0 else math.inf
        result.record(spread <= 0.1, label, spread)
    space = FunctionSpace.lr(2, atoms=2)
    growth = rho_growth_witness(identity_operator(space), RegularityParams(1, 2), [1.0, 0.0], 64)
    result.record(abs(growth / 8.0 - 1) <= 1e-12, "p < q divergence", abs(growth / 8.0 - 1))
    return result


def _grid_minimum(space, base, complement):
    """Smallest dual norm of base + s c_1 + t c_2 over a square grid."""
    reach = 2.0 * float(np.abs(base).sum()) + 1.0
    axis = np.linspace(-reach, reach, GRID_POINTS)
    s, t = np.meshgrid(axis, axis, indexing="ij")
    rows = base + s[..., None] * complement[:, 0] + t[..., None] * complement[:, 1]
    return float(norm_values(dual_space(space), rows).min())


def extension_pipeline(seed=0, scale=1.0):
    """Dyadic maps, Z-norm against Calderón, grid-checked extensions and the L_q pipeline."""
    result = CriterionResult(11, "extension")
    rng = np.random.default_rng(seed)
    exponents = [1, 2, 3, "inf"]
    for index in range(_count(1000, scale)):
        level = DyadicLevel(1, exponents[index % len(exponents)])
        push, lift = dyadic_Pn(level, 4), dyadic_Jn(level, 4)
        f, v = rng.standard_normal(4), rng.standard_normal(2)
        contraction = norm(push.codomain, push.apply(f)) / norm(push.domain, f)
        isometry = abs(norm(lift.codomain, lift.apply(v)) - norm(lift.domain, v)) / norm(lift.domain, v)
        result.record(contraction <= 1 + 1e-12 and isometry <= 1e-12, f"dyadic {index}",
                      max(contraction - 1, isometry))
    for q in exponents:
        for n in range(3):
            level = DyadicLevel(n, q)
            deviation = float(np.abs(dyadic_Pn(level, 8).entries @ dyadic_Jn(level, 8).entries
                                     - np.eye(level.blocks)).max())
            result.record(deviation <= 1e-12, f"P_n J_n q={_label(q)} n={n}", deviation)
    l3 = FunctionSpace.lr(3, atoms=3)
    for index in range(_count(100, scale)):
        element = ZElement(l3, 2, rng.standard_normal((2, 3)))
        z, calderon = z_norm(element, 2, seed=seed), calderon_product_norm(element, 2)
        deviation = abs(z.upper - calderon.upper) / z.upper
        result.record(deviation <= 1e-6, f"calderon {index}", deviation)
    line = FunctionSpace.lr(3, atoms=1)
    for index in range(_count(20, scale)):
        subspace = Subspace(l3, rng.standard_normal((1, 3)))
        T = RestrictedOperator(subspace, line, rng.standard_normal((1, 1)))
        extension = hahn_banach_extend(T, 3, seed=seed)
        rho = rho_infinity_q(extension, 3).upper
        grid = _grid_minimum(l3, extension.entries[0] / l3.weight_array, subspace.complement())
        ok = rho <= grid + 1e-2 * max(1.0, grid) and T.agreement_residual(extension) <= 1e-8
        result.record(ok, f"grid oracle {index}", max(0.0, rho - grid))
    ambient, codomain = uniform_lq(2, 4), uniform_lq(2, 4)
    for index in range(_count(10, scale)):
        T = RestrictedOperator(Subspace(ambient, rng.standard_normal((2, 4))), codomain, rng.standard_normal((4, 2)))
        try:
            record = certify_extension(T, extend_operator_Lq(T, 2, seed=seed), 2, seed=seed)
        except CertificationError as error:
            result.record(False, f"pipeline {index}: {error}", math.inf)
            continue
        ok = record.agreement_residual <= 1e-8 and record.rho_after.lower <= record.rho_before * (1 + 1e-2)
        result.record(ok, f"pipeline {index}", record.agreement_residual)
    return result


def replayed_criteria():
    """Every criterion but determinism itself."""
    return [check for check in CRITERIA if check is not determinism]


def determinism(seed=0, scale=1.0, checks=None):
    """Two runs with the same seed give byte-identical payloads, for every other criterion by default."""
    result = CriterionResult(12, "determinism")
    for check in checks or replayed_criteria():
        first = dumps_json(check(seed, scale).to_dict())
        second = dumps_json(check(seed, scale).to_dict())
        result.record(first == second, check.__name__)
    return result


CRITERIA = (identity_suite, t_r_exactness, krivine_bound, degeneracy, duality_formula, holder_suite,
            tensor_ordering, grothendieck_predual, factorization_soundness, mz_consistency,
            extension_pipeline, determinism)


def run_battery(seed=0, scale=1.0, numbers=None, verbose=False):
    """Runs the selected criteria, all of them by default.

    Args:
        seed (int): seed of every criterion
        scale (float): fraction of the stated sample counts
        numbers (list): criterion numbers to run, 1-based
        verbose (bool): print progress

    Returns:
        list of CriterionResult
    """
    selected = [index for index in range(1, len(CRITERIA) + 1) if numbers is None or index in numbers]
    results = []
    for position, number in enumerate(selected, start=1):
        started = time.perf_counter()
        results.append(CRITERIA[number - 1](seed, scale))
        if verbose:
            print(f"Checked {position} out of {len(selected)} criteria "
                  f"({CRITERIA[number - 1].__name__}, {time.perf_counter() - started:.1f} s).")
    return results
