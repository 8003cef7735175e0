"""Error types shared across the package."""


class PaceError(Exception):
    pass


class ModelMalformedError(PaceError):
    """Tree or ensemble structure violates its invariants."""


class DegenerateModelError(PaceError):
    """Operation on a model with no usable content (all-zero weights, empty forest)."""


class ScalingOverflowError(PaceError):
    """Integer scaling would exceed the supported width; retry with smaller d."""


class SolverLimitError(PaceError):
    """Pivot or node budget exhausted before reaching a conclusion."""


class BudgetExceededError(PaceError):
    """Search node budget exhausted; the caller cannot certify the result."""


class InternalConsistencyError(PaceError):
    """A condition the driver is supposed to guarantee was violated."""
