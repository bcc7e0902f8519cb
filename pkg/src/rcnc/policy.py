"""Mode selection and decoder capability negotiation."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, replace
from typing import Sequence

from .channel import ClientProfile, as_rng
from .errors import ConfigError, InvalidInputError


class Mode(str, enum.Enum):
    RCNC = "rcnc"
    UNICAST = "unicast"
    MIXED = "mixed"


BELOW_THRESHOLD = "below-threshold"
COLLOCATED = "collocated"
NO_CAPABILITY = "no-capability"
ALL_CAPABLE = "all-capable"
PARTIAL_CAPABILITY = "partial-capability"


@dataclass(frozen=True)
class PolicyConfig:
    unicast_threshold: int = 10
    rcnc_sweet_spot: int = 30  # informational only
    collocation_fraction_limit: float = 0.5

    def __post_init__(self):
        if self.unicast_threshold < 1:
            raise ConfigError(f"unicast_threshold must be >= 1, got {self.unicast_threshold}")
        if not 0.0 < self.collocation_fraction_limit <= 1.0:
            raise ConfigError(f"collocation_fraction_limit must be in (0, 1], got {self.collocation_fraction_limit}")


@dataclass(frozen=True)
class ModeDecision:
    mode: Mode
    rcnc_set: frozenset
    unicast_set: frozenset
    reason: str


@dataclass(frozen=True)
class NegotiationOutcome:
    client_id: int
    accepted: bool
    declared_resources_ok: bool


def negotiate(client: ClientProfile, accept_policy: bool | float = True, rng=None) -> NegotiationOutcome:
    """Abstract decoder-push handshake between a client and the network manager.

    ``accept_policy`` is the client's willingness: a flag, or a probability
    drawn once per capable client.  Clients without decode capability fail
    the resource check and never consume randomness.
    """
    resources_ok = bool(client.supports_decoding)
    if not resources_ok:
        return NegotiationOutcome(client.client_id, False, False)
    if isinstance(accept_policy, bool):
        willing = accept_policy
    else:
        if not 0.0 <= accept_policy <= 1.0:
            raise InvalidInputError(f"acceptance probability must be in [0, 1], got {accept_policy}")
        willing = bool(as_rng(rng).random() < accept_policy)
    return NegotiationOutcome(client.client_id, willing and resources_ok, resources_ok)


def apply_negotiation(client: ClientProfile, outcome: NegotiationOutcome) -> ClientProfile:
    """Effective profile after the handshake: decoding is enabled only if accepted."""
    if outcome.client_id != client.client_id:
        raise InvalidInputError(f"outcome for client {outcome.client_id} applied to client {client.client_id}")
    return replace(client, supports_decoding=outcome.accepted)


def negotiate_all(clients: Sequence[ClientProfile], accept_policy: bool | float = True, rng=None):
    """Negotiate with each client in ascending id order.

    Returns the effective profiles and the outcomes, both in that order.
    """
    rng = as_rng(rng)
    profiles, outcomes = [], []
    for client in sorted(clients, key=lambda c: c.client_id):
        outcome = negotiate(client, accept_policy, rng)
        outcomes.append(outcome)
        profiles.append(apply_negotiation(client, outcome))
    return profiles, outcomes


def decide_mode(clients: Sequence[ClientProfile], policy: PolicyConfig = PolicyConfig()) -> ModeDecision:
    """Pick a delivery mode; first matching rule wins.

    1. fewer than ``unicast_threshold`` clients -> unicast
    2. one collocation group holds more than ``collocation_fraction_limit``
       of the clients -> unicast
    3. by decode capability: all -> RCNC, none -> unicast, else mixed
    """
    if not clients:
        raise InvalidInputError("cannot decide a mode for an empty roster")
    ids = frozenset(c.client_id for c in clients)
    if len(ids) != len(clients):
        raise InvalidInputError("duplicate client ids")
    n = len(clients)
    if n < policy.unicast_threshold:
        return ModeDecision(Mode.UNICAST, frozenset(), ids, BELOW_THRESHOLD)
    groups = Counter(c.collocation_group for c in clients if c.collocation_group is not None)
    if groups and max(groups.values()) > policy.collocation_fraction_limit * n:
        return ModeDecision(Mode.UNICAST, frozenset(), ids, COLLOCATED)
    capable = frozenset(c.client_id for c in clients if c.supports_decoding)
    if capable == ids:
        return ModeDecision(Mode.RCNC, ids, frozenset(), ALL_CAPABLE)
    if not capable:
        return ModeDecision(Mode.UNICAST, frozenset(), ids, NO_CAPABILITY)
    return ModeDecision(Mode.MIXED, capable, ids - capable, PARTIAL_CAPABILITY)
