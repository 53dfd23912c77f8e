"""Exception hierarchy shared by all modules.

Every error class carries a process exit code so the CLI can map failures
one-to-one onto documented codes (see README).
"""


class AerialDocError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ParameterError(AerialDocError):
    """A caller-supplied parameter violates a precondition."""

    exit_code = 3


class SchemaError(AerialDocError):
    """A document fails schema validation or has an unsupported format version."""

    exit_code = 3


class DegenerateGeometryError(AerialDocError):
    """Geometric input too degenerate for the requested operation."""

    exit_code = 3


class MissionValidationError(AerialDocError):
    """A mission request violates technique constraints."""

    exit_code = 4

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InfeasiblePlanError(AerialDocError):
    """Planning cannot satisfy endpoint, reachability, or budget constraints."""

    exit_code = 5


class RegistrationFailureError(AerialDocError):
    """Map alignment failed (no overlapping initialization converged)."""

    exit_code = 6


class AlignmentPhaseError(AerialDocError):
    """A named phase of the alignment pipeline failed."""

    exit_code = 6

    def __init__(self, phase, cause):
        super().__init__(f"alignment phase '{phase}' failed: {cause}")
        self.phase = phase
        self.cause = cause


class SafetyViolationError(AerialDocError):
    """A collision or separation violation was detected or could not be resolved."""

    exit_code = 7
