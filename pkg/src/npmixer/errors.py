"""Exception hierarchy shared by every npmixer module."""


class NPMixerError(Exception):
    """Base class for all library errors."""


class DimensionError(NPMixerError, ValueError):
    """Tensor shapes are incompatible for the requested operation."""


class ParameterError(NPMixerError, ValueError):
    """A numeric argument lies outside its admissible range."""


class ConfigurationError(NPMixerError, ValueError):
    """Invalid or contradictory configuration."""


class ContractError(NPMixerError, RuntimeError):
    """A caller violated an operation's precondition."""


class StateError(NPMixerError, RuntimeError):
    """An object was used in a state that does not permit the call."""


class IngestionError(NPMixerError, ValueError):
    """A data file could not be parsed."""


class DivergenceError(NPMixerError, ArithmeticError):
    """Training produced a non-finite loss."""
