"""Exception hierarchy shared across the package.

Domain errors (anything a caller can plausibly handle or report) derive
from AssertflowError; the CLI maps them to exit code 1. Programming
errors stay on ValueError/TypeError.
"""

from __future__ import annotations


class AssertflowError(Exception):
    """Base class for all domain errors raised by this package."""


class ArtifactParseError(AssertflowError):
    """A document could not be decoded into an artifact at all.

    Distinct from invariant violations, which are reported as data in a
    SchemaReport rather than raised.
    """


class BrokenLineageError(AssertflowError):
    """A lineage walk hit a reference to an id missing from the store."""

    def __init__(self, missing_id: str, via: str = "") -> None:
        self.missing_id = missing_id
        self.via = via
        detail = f" (referenced by {via})" if via else ""
        super().__init__(f"broken lineage: artifact {missing_id!r} not found{detail}")


class NotFoundError(AssertflowError):
    """Requested object does not exist in the store."""


class CorruptArtifactError(AssertflowError):
    """Stored bytes no longer match the content-addressed id."""


class ConflictError(AssertflowError):
    """A terminal state was already reached; the first decision wins."""


class UndefinedRateError(AssertflowError):
    """A pass rate was requested over an empty denominator."""


class BudgetExceededError(AssertflowError):
    """Exhaustive trace enumeration would exceed the configured budget."""


class UnknownSignalError(AssertflowError):
    """An assertion references a signal absent from the trace."""

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown signal {name!r}")


class SvaParseError(AssertflowError):
    """Base for assertion-text rejections; always carries a position."""

    def __init__(self, message: str, line: int, col: int, token: str = "") -> None:
        self.message = message
        self.line = line
        self.col = col
        self.token = token
        super().__init__(f"{line}:{col}: {message}")


class RenderError(AssertflowError):
    """A prompt template placeholder had no binding."""

    def __init__(self, placeholder: str) -> None:
        self.placeholder = placeholder
        super().__init__(f"unbound placeholder {placeholder!r}")


class CredentialError(AssertflowError):
    """A remote backend's credential environment variable is not set."""


class ScenarioKeyError(AssertflowError):
    """A scripted mock has no response for the derived scenario key."""

    def __init__(self, agent: str, key: str) -> None:
        self.agent = agent
        self.key = key
        super().__init__(f"no scripted response for agent {agent!r}, scenario key {key!r}")


class InvocationError(AssertflowError):
    """An agent invocation failed after exhausting retries."""


class GroupInvocationError(AssertflowError):
    """A group member failed; partial responses are attached."""

    def __init__(self, message: str, partial: dict, failed_index: int) -> None:
        self.partial = partial
        self.failed_index = failed_index
        super().__init__(message)


class StageFailureError(AssertflowError):
    """A pipeline stage exhausted its repair attempts.

    Carries every raw response received so the run manifest can record
    them for post-mortem.
    """

    def __init__(self, message: str, raw_responses: list) -> None:
        self.raw_responses = raw_responses
        super().__init__(message)


class PendingOutcomesError(AssertflowError):
    """Dataset construction was attempted while outcomes are unresolved."""

    def __init__(self, pending: list) -> None:
        self.pending = list(pending)
        super().__init__(
            "cannot build dataset: unresolved outcomes for candidates "
            + ", ".join(str(p) for p in self.pending)
        )
