"""Exception types shared across the package.

I/O failures (unreadable roots, missing files) are raised as the builtin
``OSError`` family; everything domain-specific derives from ``LoomError``.
"""

from __future__ import annotations


class LoomError(Exception):
    """Base class for all streamloom errors."""


class SchemaError(LoomError):
    """A document is malformed. The message names the offending field path."""


class InvariantError(LoomError):
    """A document or value is structurally valid but violates an invariant."""


class ResolverError(LoomError):
    """A dataset resolver failed (nonzero exit, malformed reply, bad pattern)."""


class FormatError(LoomError):
    """A data file does not match its declared format (e.g. missing CSV column)."""


class SpecError(LoomError):
    """A simulation spec does not line up with the stream metadata."""


class NotFound(LoomError):
    """No live outlet (or other named thing) matches the given selector."""


class ConnectionLost(LoomError):
    """A live data channel closed mid-stream."""


class IllegalTransition(LoomError):
    """A control action is not legal from the handle's current state."""

    def __init__(self, state: str, action: str):
        super().__init__(f"cannot {action} from state {state!r}")
        self.state = state
        self.action = action


class UnsupportedInLive(LoomError):
    """The control action only applies to replay/simulate handles."""


class BindError(LoomError):
    """The server address could not be bound."""


class BadMessage(LoomError):
    """A protocol message failed to decode or validate."""


class UnknownStream(LoomError):
    """A subscription referenced a stream id the server does not know."""


class CycleError(LoomError):
    """The workflow graph contains a cycle."""

    def __init__(self, cycle: list[str]):
        super().__init__("workflow contains a cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class UnknownKind(LoomError):
    """A workflow node references an unregistered kind."""


class PortMismatch(LoomError):
    """A connector references a port its node does not declare."""


class DuplicateKind(LoomError):
    """A node kind with this name is already registered."""


class ParamError(LoomError):
    """An operation parameter is out of its valid range."""


class UnknownKey(LoomError):
    """A router was pointed at a channel or attribute that does not exist."""
