class SigmaSiteError(Exception):
    """Base class for all errors raised by sigmasite."""


class DomainError(SigmaSiteError, ValueError):
    """An argument lies outside the domain of the operation."""


class ScaleError(SigmaSiteError, ValueError):
    """Parameters exceed the desk-scale enumeration bound."""


class PreconditionError(SigmaSiteError, ValueError):
    """Inputs violate a stated precondition (e.g. extractor inputs)."""


class InconsistencyError(SigmaSiteError, RuntimeError):
    """An internal postcondition failed; indicates a bug or corrupted input."""


class ConfigError(SigmaSiteError, ValueError):
    """Configuration could not be parsed or validated.

    ``errors`` holds ``(location, message)`` pairs, one per problem found.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{loc}: {msg}" for loc, msg in self.errors))
