"""Exception families shared by all solver modules."""


class NumericsError(Exception):
    """Base class for all solver failures."""


# -- ground state ------------------------------------------------------------

class NoBracket(NumericsError):
    """The initial shooting interval does not bracket the decaying solution."""


class ToleranceNotReached(NumericsError):
    """Bisection stalled before reaching the requested width."""


class WindowUnstable(NumericsError):
    """Tail-fit window has too much spread; grid probably too small."""


class QuadratureOverflow(NumericsError):
    """Exponentially weighted integrand is not summable on the grid."""


# -- spectrum ----------------------------------------------------------------

class NoNegativeEigenvalue(NumericsError):
    """Discretized linearized operator has no negative eigenvalue."""


class CoercivityFailed(NumericsError):
    """Projected smallest eigenvalue is not positive."""


# -- interactions ------------------------------------------------------------

class DomainTooSmall(NumericsError):
    """Requested separation exceeds what the radial grid can support."""


# -- field -------------------------------------------------------------------

class GridTooSmall(NumericsError):
    """Initial data violates the boundary-smallness invariant."""


class CFLViolation(NumericsError):
    """Time step too large for the explicit part of the scheme."""


class BoundaryContaminated(NumericsError):
    """Field reached the boundary nodes above the safety threshold."""


# -- modulation --------------------------------------------------------------

class NewtonDiverged(NumericsError):
    """Modulation Newton iteration did not converge."""


class ProximityViolated(NumericsError):
    """Remainder norm exceeds the proximity gate gamma."""


class SeparationLost(NumericsError):
    """Soliton separation fell below the configured floor."""


class InsufficientCadence(NumericsError):
    """Trajectory samples too sparse to resolve parameter derivatives."""


class SingularSystem(NumericsError):
    """Corrector linear system is singular (separation too small)."""


# -- reduced ODE -------------------------------------------------------------

class StepUnderflow(NumericsError):
    """Adaptive integrator step size collapsed."""


class NotConverged(NumericsError):
    """Limit quantity did not converge on the available horizon."""


# -- shooter -----------------------------------------------------------------

class NoSignChange(NumericsError):
    """Search box does not bracket the unstable manifold."""

    def __init__(self, message, corners=None):
        super().__init__(message)
        self.corners = corners


class MaxIterations(NumericsError):
    """Bisection exhausted its iteration budget without a persisting point."""


class DecompositionLost(NumericsError):
    """Modulation tracking failed before any exit condition triggered."""


# -- harness -----------------------------------------------------------------

class ConfigInvalid(NumericsError):
    """Run configuration failed validation."""


class ScenarioFailed(NumericsError):
    """A scenario pipeline raised; original error attached as __cause__."""


class MissingOutputs(NumericsError):
    """Plot-data emission requested on an incomplete run directory."""
