"""Exception hierarchy.

Every error raised on purpose by the library derives from `FdqError`, itself a
`ValueError`, so callers that only know about bad input still catch it.
"""


class FdqError(ValueError):
    """Base class of the library errors."""


class ContextError(FdqError):
    """Unknown variable, mismatched contexts, arities or truncation orders."""


class FdqDomainError(FdqError):
    """An object lives in the wrong variable groups for the operation."""


class NotInvertibleError(FdqError):
    """A series whose order-0 coefficient is not the unit."""


class BoundViolationError(FdqError):
    """Evaluations that are not those of a cochain within the given bound."""


class ObstructionError(FdqError):
    """A cochain that has to be closed is not."""


class InvalidStarProductError(ObstructionError):
    pass


class InvalidModuleError(ObstructionError):
    pass


class NotInCommutantError(FdqError):
    """A residual whose leading term is not vertical."""


class SerializationError(FdqError):
    pass


class ConfigError(FdqError):
    pass
