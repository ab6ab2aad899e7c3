"""
Exceptions raised by the lattice operator library.
"""


class LatticeInputError(ValueError):
    """Malformed data: dimension mismatch, bad exponent relation, negative weights."""


class GuardError(LatticeInputError):
    """
    A documented cost or applicability guard was hit.

    guard (string): short guard name. E.g.: oracle_size, divisibility
    """

    def __init__(self, guard, message):
        super().__init__(f"[{guard}] {message}")
        self.guard = guard


class NoNormingFunctionalError(LatticeInputError):
    """A custom norm lacks the oracle needed for a duality step."""


class CertificationError(RuntimeError):
    """A certified bound or residual failed its assertion."""


class FactorizationError(CertificationError):
    """
    No feasible weights were found at the requested constant.

    witness (dict): most violated pair found, with keys x, y and ratio.
    history (list): best violation after every cut.
    """

    def __init__(self, message, witness=None, history=None):
        super().__init__(message)
        self.witness = witness or {}
        self.history = list(history or [])


class ExtensionError(CertificationError):
    """The agreement constraints of an extension cannot be met."""
