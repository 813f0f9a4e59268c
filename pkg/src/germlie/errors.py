"""Exception types shared across the package."""


class StructureError(ValueError):
    """Incompatible operands: anchor, coefficient space, level or shape mismatch."""


class BudgetError(ArithmeticError):
    """A certified-norm budget (Neumann, log branch, BCH radius, ...) is violated.

    The message names the budget and the offending quantity so callers can
    shrink radii or levels and retry.
    """


class EvaluationError(RuntimeError):
    """An evaluator produced non-finite samples."""


class ExtensionError(RuntimeError):
    """Holomorphic extension of a transition map failed at every admissible height."""
