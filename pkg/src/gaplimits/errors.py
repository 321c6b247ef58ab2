"""Exception hierarchy.

Every error carries a short ``code`` so the CLI can print a stable,
greppable diagnostic prefix (``error[E_RANGE]: ...``).
"""


class GapLimitsError(Exception):
    code = "E_GENERIC"


class ArgumentError(GapLimitsError, ValueError):
    """An argument violates a documented precondition."""

    code = "E_ARG"


class RangeError(GapLimitsError, ValueError):
    """A query reaches beyond the sieved range of a store."""

    code = "E_RANGE"


class ResourceError(GapLimitsError, MemoryError):
    """A requested build would exceed the configured memory budget."""

    code = "E_RESOURCE"


class PreconditionError(GapLimitsError, ValueError):
    """A counting/supply hypothesis required by a construction step does not hold."""

    code = "E_PRECOND"


class InfeasibleError(GapLimitsError, RuntimeError):
    """A construction stage could not be completed at the given scale."""

    code = "E_INFEASIBLE"

    def __init__(self, message, stage=None, window=None, interval=None, survivors=None):
        super().__init__(message)
        self.stage = stage
        self.window = window  # (index, lo, hi) of a failed window
        self.interval = interval  # [lo, hi] spanned by what could not be sieved
        self.survivors = survivors


class DegenerateBasisError(GapLimitsError, ValueError):
    """The Gram matrix of a test-function basis is singular."""

    code = "E_DEGENERATE"

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class ConfigError(GapLimitsError, ValueError):
    code = "E_CONFIG"


class UnknownKeyError(ConfigError):
    code = "E_UNKNOWN_KEY"


class DuplicateKeyError(ConfigError):
    code = "E_DUPLICATE_KEY"


class MalformedValueError(ConfigError):
    code = "E_MALFORMED"


class OutputError(GapLimitsError, OSError):
    code = "E_OUTPUT"


class UsageError(ConfigError):
    """Command-line syntax error (unknown flag, missing subcommand, ...)."""

    code = "E_USAGE"
