"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates a documented invariant (bad matrix, probs, file, flag)."""


class DomainError(ValueError):
    """An operation was evaluated outside its mathematical domain."""


class BudgetExceededError(RuntimeError):
    """An enumeration would exceed the configured evaluation budget."""
