"""Exception hierarchy for the package."""


class ArgosError(Exception):
    """Base class for all package errors."""


class FormulaSyntaxError(ArgosError):
    """Bad concrete syntax; carries the character position of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ArityError(ArgosError):
    """A predicate used with the wrong number of arguments."""


class UndeclaredEntityError(ArgosError):
    """Strict parsing hit a constant outside the declared entity universe."""


class GroundingError(ArgosError):
    """Quantifier expansion failed (empty universe, depth, unbound variable)."""


class SolverBudgetExceeded(ArgosError):
    """The SAT solver ran out of its conflict budget."""


class CorpusError(ArgosError):
    """A problem file or corpus directory violated the expected schema."""


class BackendError(ArgosError):
    """An LLM backend failed to service a request."""


class BackendExhausted(BackendError):
    """All transport retries failed."""
