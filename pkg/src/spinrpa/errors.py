"""Exception hierarchy for the spinrpa engine."""


class SpinRpaError(Exception):
    """Base class for all engine errors."""


class ModelError(SpinRpaError):
    """Invalid model construction: bad spins, self-couplings, broken symmetry."""


class MeanFieldError(SpinRpaError):
    """Mean-field solver failure (non-convergence, degenerate model, zero field)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StabilityError(SpinRpaError):
    """A quasiparticle frequency is zero, imaginary or below the marginal
    threshold, so the reference state is not a stable vacuum.

    ``mode`` names the offending mode (momentum index k or dense mode index),
    ``value`` carries the offending frequency or eigenvalue.
    """

    def __init__(self, message, mode=None, value=None):
        super().__init__(message)
        self.mode = mode
        self.value = value


class SpectrumError(SpinRpaError):
    """Symplectic spectrum failed its pairing or positivity checks."""


class OracleError(SpinRpaError):
    """Exact-diagonalization oracle cannot run (dimension cap, wrong sector)."""


class ConfigError(SpinRpaError):
    """Sweep configuration is unparsable or semantically invalid."""
