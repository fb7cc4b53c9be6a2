"""Exception types shared across the package."""

from __future__ import annotations


class FetchguardError(Exception):
    """Base class for all package errors."""


class ConfigError(FetchguardError):
    """A configuration is structurally unusable (empty composite, missing
    matrix row, invalid region, ...). Raised before any request is decided."""


class EvaluationError(FetchguardError):
    """A runtime evaluation failed (missing blackboard key, schema type
    mismatch, zone table hole). Carries the offending node and key when known."""

    def __init__(self, message: str, *, node: str | None = None, key: str | None = None):
        super().__init__(message)
        self.node = node
        self.key = key


class MissingKeyError(EvaluationError):
    """A required blackboard key is absent."""

    def __init__(self, key: str):
        super().__init__(f"missing blackboard key: {key!r}", key=key)


class PermissionDeniedError(FetchguardError):
    """Actor lacks the right to perform a registry operation."""


class TagConflictError(FetchguardError):
    """Object is already tagged personal by a different user (first tag wins)."""


class ReplayError(FetchguardError):
    """Trace cannot be replayed (config fingerprint mismatch)."""


class ScenarioParseError(FetchguardError):
    """Scenario file is malformed; nothing is executed."""
