"""Bernoulli loss model between the AP and its clients.

Clients sharing a collocation group see one shared draw per transmission,
made against the group's lowest success probability.  ACK frames are not
modelled as lossy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class ClientProfile:
    client_id: int
    success_prob: float
    supports_decoding: bool = True
    collocation_group: Hashable | None = None

    def __post_init__(self):
        if not 0.0 < self.success_prob <= 1.0:
            raise InvalidInputError(f"client {self.client_id}: success_prob must be in (0, 1], got {self.success_prob}")


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator, an integer seed or a SeedSequence."""
    return np.random.default_rng(rng)


def split_streams(rng, n: int) -> list[np.random.Generator]:
    """Derive ``n`` independent child generators from one stream."""
    rng = as_rng(rng)
    seeds = rng.integers(0, 2**63, size=n, dtype=np.int64)
    return [np.random.default_rng(int(s)) for s in seeds]


class Channel:
    """Vectorised broadcast/unicast delivery for a fixed client roster.

    Clients are ordered by ascending ``client_id``; ``broadcast`` returns a
    boolean array in that order.  One uniform is drawn per independent
    "draw slot": each ungrouped client is its own slot and each collocation
    group is one slot, placed at its lowest-id member.
    """

    def __init__(self, clients: Sequence[ClientProfile]):
        if not clients:
            raise InvalidInputError("channel needs at least one client")
        self.clients = sorted(clients, key=lambda c: c.client_id)
        ids = [c.client_id for c in self.clients]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("duplicate client ids")
        slot_of = np.empty(len(self.clients), dtype=np.int64)
        slot_p: list[float] = []
        group_slot: dict = {}
        for i, c in enumerate(self.clients):
            g = c.collocation_group
            if g is None:
                slot_of[i] = len(slot_p)
                slot_p.append(c.success_prob)
            elif g in group_slot:
                s = group_slot[g]
                slot_of[i] = s
                slot_p[s] = min(slot_p[s], c.success_prob)
            else:
                group_slot[g] = slot_of[i] = len(slot_p)
                slot_p.append(c.success_prob)
        self._slot_of = slot_of
        self._slot_p = np.array(slot_p)
        self.client_ids = np.array(ids)

    def __len__(self):
        return len(self.clients)

    def broadcast(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(self._slot_p.shape[0])
        return (u < self._slot_p)[self._slot_of]

    def outcome(self, delivered: np.ndarray) -> dict[int, bool]:
        return {int(cid): bool(d) for cid, d in zip(self.client_ids, delivered)}


def transmit_broadcast(clients: Sequence[ClientProfile], rng) -> dict[int, bool]:
    """One broadcast frame; returns client_id -> delivered for every client."""
    channel = Channel(clients)
    return channel.outcome(channel.broadcast(as_rng(rng)))


def transmit_unicast(client: ClientProfile, rng) -> bool:
    return bool(as_rng(rng).random() < client.success_prob)
