"""Shared exception types."""


class MembershipError(ValueError):
    """A vertex or coordinate is outside the structure it was used with."""


class CapacityError(RuntimeError):
    """An exact computation was requested above its configured ceiling."""


class PlanError(RuntimeError):
    """No gadget decomposition exists for a requested cycle extension."""


class DomainError(ValueError):
    """A numeric argument is outside the domain where a formula is asserted."""
