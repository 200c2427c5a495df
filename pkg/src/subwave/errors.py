"""Exception hierarchy for the band-structure engine."""


class SubwaveError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateLattice(SubwaveError):
    """Primitive vectors are (numerically) linearly dependent."""


class EmptyPath(SubwaveError):
    """A Brillouin-zone path needs at least two waypoints."""


class AlphaOnDualLattice(SubwaveError):
    """Quasimomentum coincides with a dual-lattice point, where the
    quasiperiodic operator is singular."""


class TruncationNotConverged(SubwaveError):
    """Refined-truncation self-check exceeded the configured tolerance."""


class SingularOperator(SubwaveError):
    """Discretized boundary operator is numerically singular."""


class UnequalVolumes(SubwaveError):
    """Operation requires all resonators to share one volume."""


class NonpositiveRadius(SubwaveError):
    """Resonator radius must be strictly positive."""


class IntegrationFailure(SubwaveError):
    """Adaptive ODE integration could not meet the requested tolerance."""


class DeterminantNotConverged(SubwaveError):
    """Truncated infinite determinant did not settle under refinement."""


class NonpositiveKappa(SubwaveError):
    """Time-modulated bulk modulus must stay strictly positive."""


class NonpositiveParameter(SubwaveError):
    """A reconstructed material law is non-positive somewhere on the period."""


class NonSymmetricCapacitance(SubwaveError):
    """User-supplied finite capacitance matrix is not symmetric."""


class WindowOutOfRange(SubwaveError):
    """Fit window extends beyond the sampled path."""


class SchemaError(SubwaveError):
    """Configuration document violates the strict schema."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class RangeError(SubwaveError):
    """Configuration value outside its admissible range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
