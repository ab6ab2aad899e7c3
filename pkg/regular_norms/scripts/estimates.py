"""
Certified intervals for operator and regularity norms.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lattice_spaces.scripts.errors import CertificationError, GuardError, LatticeInputError
from lattice_spaces.scripts.settings import ORACLE_TOLERANCE
from lattice_spaces.scripts.spaces import Exponent

ORACLE_EXACT = "OracleExact"
NO_UPPER = "None"


def analytic_kind(name):
    """Label of an analytic upper bound. E.g.: AnalyticBound(krivine)."""
    return f"AnalyticBound({name})"


@dataclass(frozen=True)
class RegularityParams:
    """
    The exponent pair of a (p,q)-regularity question.

    p (Exponent): exponent of the image p-sum
    q (Exponent): exponent of the input q-sum
    """
    p: Exponent
    q: Exponent

    def __post_init__(self):
        p, q = Exponent.of(self.p), Exponent.of(self.q)
        if p < 1 or q < 1:
            raise LatticeInputError(f"regularity exponents must be at least 1, got p={p}, q={q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def require_ordered(self):
        """Estimators need q <= p; for p < q the regular class is {0}."""
        if self.p < self.q:
            raise GuardError("exponent_order",
                             f"estimators need q <= p, got p={self.p}, q={self.q}; "
                             "use rho_growth_witness for p < q")
        return self


@dataclass(frozen=True, eq=False)
class NormEstimate:
    """
    A two-sided bound lower <= value <= upper.

    lower (float): best value attained by the witness
    lower_witness (object): VectorTuple, VectorMatrix or array attaining lower
    upper (float): certified upper bound, math.inf when none is known
    upper_kind (string): "OracleExact", "AnalyticBound(name)" or "None"
    tolerance (float): relative slack allowed between lower and upper
    """
    lower: float
    lower_witness: Optional[object]
    upper: float = math.inf
    upper_kind: str = NO_UPPER
    tolerance: float = ORACLE_TOLERANCE

    def __post_init__(self):
        lower, upper = float(self.lower), float(self.upper)
        if lower < 0 or math.isnan(lower):
            raise CertificationError(f"lower bound must be a nonnegative number, got {lower}")
        if lower > upper + self.tolerance * max(1.0, upper):
            raise CertificationError(f"lower bound {lower} exceeds upper bound {upper} ({self.upper_kind})")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def width(self):
        """upper - lower, infinite without an upper bound."""
        return self.upper - self.lower

    def scaled(self, factor):
        """The estimate of |c| times the quantity."""
        factor = abs(factor)
        return NormEstimate(factor * self.lower, self.lower_witness, factor * self.upper,
                            self.upper_kind, self.tolerance)

    def to_dict(self):
        """Report form {lower, upper, upper_kind, witness, tolerance}."""
        witness = self.lower_witness
        if witness is not None and hasattr(witness, "members"):
            witness = witness.members
        return {
            "lower": self.lower,
            "upper": self.upper,
            "upper_kind": self.upper_kind,
            "witness": np.asarray(witness) if witness is not None else None,
            "tolerance": self.tolerance,
        }


def tighter(first, second):
    """The estimate with the larger lower bound and the smaller upper bound."""
    lower, witness = (first.lower, first.lower_witness) if first.lower >= second.lower \
        else (second.lower, second.lower_witness)
    upper, kind = (first.upper, first.upper_kind) if first.upper <= second.upper \
        else (second.upper, second.upper_kind)
    return NormEstimate(lower, witness, max(upper, lower), kind, max(first.tolerance, second.tolerance))
