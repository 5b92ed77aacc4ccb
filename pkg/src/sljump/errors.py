"""Exception hierarchy. DomainError maps to CLI exit code 1, ConfigError to 2."""


class DomainError(ValueError):
    """Invalid mathematical input or a numerical stage that cannot proceed."""


class RootLocalizationError(DomainError):
    """A required zero could not be bracketed, even after the dense-scan fallback."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"root localization failed at index {index}")


class InsufficientTailError(DomainError):
    """Too few eigenvalues to estimate the asymptotic constants."""


class AsymptoticClassError(DomainError):
    """The sequence does not behave like an admissible spectrum (diverging remainder)."""


class PerturbationTooLargeError(DomainError):
    """Requested perturbation breaks ordering or positivity of the sequence."""


class BasisDegenerateError(DomainError):
    """The truncated Gram system is numerically singular; not a usable frame."""


class BorgDivergedError(DomainError):
    """The two-spectra fit did not converge within the iteration budget."""

    def __init__(self, residual, iterations, message=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            message
            or f"Borg step diverged: residual {residual:.3e} after {iterations} iterations"
        )


class DeficientIndexSetError(DomainError):
    """The chosen subspectrum looks too sparse for a unique reconstruction."""


class WeylPoleError(DomainError):
    """Evaluation of the Weyl function at (or too close to) one of its poles."""


class ConfigError(Exception):
    """Malformed configuration file or missing referenced input."""
