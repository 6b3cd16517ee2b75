"""Exception types shared across the harness."""


class HarnessError(Exception):
    """Base class for all harness-raised errors."""


class ConfigError(HarnessError):
    """Invalid search or provider configuration."""


class UnknownTaskError(HarnessError):
    """Task name not present in the registry."""


class UnknownGameError(HarnessError):
    """Game id outside the supported set."""


class InvalidActionError(HarnessError):
    """Action token outside the game's vocabulary."""


class SteppedTerminalError(HarnessError):
    """step() called on a terminal state."""


class MissingIncumbentError(HarnessError):
    """Improve prompt requested without a best program."""


class MalformedGridError(HarnessError):
    """Maze grid is ragged, empty, or has out-of-bounds endpoints."""


class EmptySweepError(HarnessError):
    """Omega sweep invoked with no omega values."""


class ProviderUnavailable(HarnessError):
    """All retries against the provider were exhausted."""


class AuthError(HarnessError):
    """Credentials missing or rejected; not retried."""


class ReplayExhausted(ProviderUnavailable):
    """Replay cassette has no entry left for this request."""


class EmptyResponseError(HarnessError):
    """Provider returned an empty response body."""


class SandboxError(HarnessError):
    """Base class for sandbox supervision failures."""


class SpawnFailureError(SandboxError):
    """Runner process could not be started."""


class HandshakeTimeoutError(SandboxError):
    """Runner did not announce readiness within the load timeout."""


class ProtocolVersionMismatchError(SandboxError):
    """Runner speaks a different protocol version."""


class SandboxProtocolError(SandboxError):
    """Runner emitted bytes that are not valid protocol messages."""


class SandboxUnavailableError(SandboxError):
    """Sandbox handle cannot serve requests and cannot be revived."""


class CorruptLogError(HarnessError):
    """Run log contains an unparseable record."""


class EmptyInputError(HarnessError):
    """Aggregation invoked with no results."""
