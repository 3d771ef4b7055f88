"""Exception types shared across the engine."""


class ParameterError(ValueError):
    """A constructor or operation received out-of-range parameters."""


class EmptyBandError(ParameterError):
    """A continuum band [m, omega_max] with omega_max <= m has no modes."""


class DomainError(ValueError):
    """Evaluation requested outside the valid domain (analyticity strip,
    smearing support, detector position, ...)."""


class SpectrumParseError(ValueError):
    """A spectrum file could not be parsed; carries the offending line."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ConvergenceError(RuntimeError):
    """A mode sum tripped its divergence sentinel."""


class AccuracyError(RuntimeError):
    """A quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        if achieved is not None:
            message = f"{message} (achieved {achieved:.3e})"
        super().__init__(message)
        self.achieved = achieved


class TruncationError(RuntimeError):
    """A truncated expansion (atom lattice, Fock cutoff) failed its tail
    bound; ``suggested`` carries a size that would satisfy it."""

    def __init__(self, message, suggested=None):
        if suggested is not None:
            message = f"{message} (suggested: {suggested})"
        super().__init__(message)
        self.suggested = suggested


class WindowError(RuntimeError):
    """FFT inversion detected probability mass near the grid edge."""


class ConfigError(ValueError):
    """A run configuration file is missing, malformed, or inconsistent."""
