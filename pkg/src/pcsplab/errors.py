"""Exception types shared across the package."""


class PcspError(Exception):
    """Base class for workbench-specific failures."""


class SignatureMismatchError(PcspError):
    """Two structures do not have the same signature."""


class FormatError(PcspError):
    """A text artifact (structure, table, instance) could not be parsed."""


class ArityBoundError(PcspError):
    """A requested arity exceeds the configured enumeration bound."""


class UnsupportedTargetError(PcspError):
    """No relaxation route exists for the requested target structure."""


class TimeBudgetExceeded(PcspError):
    """A search ran past its deadline and was aborted."""
