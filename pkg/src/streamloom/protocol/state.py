"""Reference connection state machine, as a pure transition function.

A connection is `awaiting` until its first subscription is accepted,
`streaming` while any subscription is active, and back to `awaiting`
when the last one ends, however it ends: unsubscribed, stopped, ran out
of data, or failed. Discovery and errors never change the state; the
two concerns are deliberately independent.

The server tracks its own state incrementally under locks; this model
recomputes it from first principles so a property test can drive both
with the same event sequence and compare.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvariantError

__all__ = ["AWAITING", "STREAMING", "EVENTS", "ConnectionModel", "transition"]

AWAITING = "awaiting"
STREAMING = "streaming"

EVENTS = ("subscribed", "subscription_ended", "discovery", "error")


@dataclass(frozen=True)
class ConnectionModel:
    """Value-type connection state; `state` is derived, never stored."""

    subscriptions: frozenset = field(default_factory=frozenset)

    @property
    def state(self) -> str:
        return STREAMING if self.subscriptions else AWAITING


def transition(model: ConnectionModel, event: str,
               subscription_id: str | None = None) -> ConnectionModel:
    """Next connection state after one protocol event.

    `subscribed` and `subscription_ended` require a subscription id that
    is respectively new and active; the server feeding this model ids it
    already validated makes a violation here a server bug, not bad input.
    """
    if event == "subscribed":
        if subscription_id is None:
            raise InvariantError("subscribed event needs a subscription id")
        if subscription_id in model.subscriptions:
            raise InvariantError(
                f"subscription {subscription_id!r} is already active"
            )
        return ConnectionModel(model.subscriptions | {subscription_id})
    if event == "subscription_ended":
        if subscription_id is None:
            raise InvariantError("subscription_ended event needs a subscription id")
        if subscription_id not in model.subscriptions:
            raise InvariantError(
                f"subscription {subscription_id!r} is not active"
            )
        return ConnectionModel(model.subscriptions - {subscription_id})
    if event in ("discovery", "error"):
        return model
    raise InvariantError(f"unknown event {event!r}; one of {EVENTS}")
