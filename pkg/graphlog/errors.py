"""Exception types raised by graphlog."""
from __future__ import annotations


class GraphlogError(Exception):
    """Base class for all graphlog errors."""


class DimensionError(GraphlogError, ValueError):
    """A vertex function does not belong to the graph it is used with."""


class GraphValidationError(GraphlogError, ValueError):
    """Graph data violates a structural invariant."""


class PotentialClassError(GraphlogError, ValueError):
    """A potential violates (A1), (A2) or (A'2)."""


class ProjectionError(GraphlogError):
    """The Nehari projection is undefined for the given function."""


class CertificateError(GraphlogError):
    """A Nehari level certificate was refused or failed."""


class GeometryError(GraphlogError):
    """Mountain-pass geometry could not be detected within budget."""


class EnergyIdentityError(GraphlogError):
    """The energy and its derivative disagree beyond rounding."""


class NonFiniteEnergyError(GraphlogError):
    """The energy became non-finite during a solve."""

    def __init__(self, message: str, trace=None) -> None:
        super().__init__(message)
        self.trace = trace


class ConfigError(GraphlogError, ValueError):
    """Run configuration or spec string is malformed."""


__all__ = [
    "GraphlogError",
    "DimensionError",
    "GraphValidationError",
    "PotentialClassError",
    "ProjectionError",
    "CertificateError",
    "GeometryError",
    "EnergyIdentityError",
    "NonFiniteEnergyError",
    "ConfigError",
]
