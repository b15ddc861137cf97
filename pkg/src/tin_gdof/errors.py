"""Exception types shared across the package."""


class TinGdofError(Exception):
    """Base class for all package errors."""


class NetworkSpecError(TinGdofError):
    """Invalid network description (parse failure, dimension mismatch, ...)."""


class TopologyError(TinGdofError):
    """Operation requires a specific network topology."""


class GuardExceededError(TinGdofError):
    """Problem size exceeds a hard guard of an exhaustive routine."""


class ConditionsNotMetError(TinGdofError):
    """Operation is only valid when the TIN sufficient conditions hold."""


class InfeasibleAllocationError(TinGdofError):
    """No feasible power allocation exists for the requested GDoF tuple."""


class EmptyRegionError(TinGdofError):
    """The inequality system has no feasible point at all."""
