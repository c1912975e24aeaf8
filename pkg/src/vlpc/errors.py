"""Exception types raised across the package."""


class VlpcError(Exception):
    """Base class for all package errors."""


class DomainError(VlpcError, ValueError):
    """An argument lies outside the domain of a formula."""


class DegenerateGeometryError(VlpcError, ValueError):
    """The geometry makes a gradient or Fisher matrix undefined or singular."""


class InfeasibleError(VlpcError):
    """No allocation satisfies the requested rate/outage/power triple."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class ConfigError(VlpcError, ValueError):
    """Configuration failed validation.

    ``problems`` lists every ``(field_path, message)`` pair found, not just
    the first.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.problems)
        super().__init__(f"invalid configuration: {lines}")
