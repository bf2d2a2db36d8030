"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class KGError(Exception):
    """Base class for every error raised by kgconc."""


class ParameterDomainError(KGError, ValueError):
    pass


class ConsistencyError(KGError):
    pass


class EigenvalueNotFound(KGError):
    pass


class DomainTooSmall(KGError):
    pass


class FrequencySolveError(KGError):
    pass


class KinematicsError(KGError, ValueError):
    pass


class InvalidFieldError(KGError, ValueError):
    pass


class ShapeError(KGError, ValueError):
    pass


class DomainError(KGError, ValueError):
    pass


class ResolutionError(KGError, ValueError):
    pass


class ConfigError(KGError, ValueError):
    pass


class ConstructionFailure(KGError):
    """Characteristic construction broke down; ``state`` holds the offending point."""

    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = dict(state or {})


class DiscriminantCollapse(ConstructionFailure):
    pass


class InversionError(ConstructionFailure):
    pass
