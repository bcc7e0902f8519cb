"""Airtime simulation of RCNC, multicast-to-unicast conversion and plain multicast.

Each ``run_*`` function is one sequential event loop over a single
generation.  Airtime is never accumulated incrementally: it is computed from
the integer counters, so ``airtime_units`` always equals
``data_tx*t_data + ack_count*t_ack + backoff_slots*t_slot``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .channel import Channel, ClientProfile, as_rng, split_streams
from .codec import DecoderState, Generation, ReceiveResult, next_coded_packet
from .errors import ConfigError, InvalidInputError, RCNCError, SimulationCapError

DEFAULT_MAX_EVENTS = 10_000_000
_UNIFORM_CHUNK = 4096


@dataclass(frozen=True)
class AirtimeModel:
    t_data: float = 1.0
    t_ack: float = 0.05
    t_slot: float = 0.01
    cw_min: int = 16
    cw_max: int = 1024

    def __post_init__(self):
        if min(self.t_data, self.t_ack, self.t_slot) <= 0:
            raise ConfigError("airtime costs must be positive")
        if self.cw_min < 1 or self.cw_max < self.cw_min:
            raise ConfigError(f"need 1 <= cw_min <= cw_max, got {self.cw_min}, {self.cw_max}")
        ratio, rem = divmod(self.cw_max, self.cw_min)
        if rem or ratio & (ratio - 1):
            raise ConfigError(f"cw_max must be cw_min times a power of two, got {self.cw_min}, {self.cw_max}")

    def cost(self, data_tx: int, ack_count: int, backoff_slots: int) -> float:
        return data_tx * self.t_data + ack_count * self.t_ack + backoff_slots * self.t_slot


@dataclass(frozen=True)
class RunMetrics:
    mode: str
    n_clients: int
    airtime_units: float
    data_tx: int
    ack_count: int
    retransmissions: int
    backoff_slots: int
    delivery_ratio: float
    completed: bool
    seed: int | None = None


def _seed_label(rng) -> int | None:
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        return int(rng)
    return None


def _check_clients(clients):
    if not clients:
        raise InvalidInputError("at least one client is required")


def run_rcnc(
    generation: Generation,
    clients: Sequence[ClientProfile],
    airtime: AirtimeModel = AirtimeModel(),
    rng=None,
    *,
    max_events: int = DEFAULT_MAX_EVENTS,
    verify: bool = False,
) -> RunMetrics:
    """Broadcast fresh coded packets until every client has decoded.

    A client that reaches full rank sends its single ACK for the generation
    and drops out.  With ``verify`` each client's recovered data is checked
    against the generation.
    """
    _check_clients(clients)
    weak = [c.client_id for c in clients if not c.supports_decoding]
    if weak:
        raise ConfigError(f"clients {weak} cannot decode; route them through unicast")
    seed = _seed_label(rng)
    rng = as_rng(rng)
    channel = Channel(clients)
    decoders = [DecoderState.for_generation(generation) for _ in channel.clients]
    pending = np.ones(len(channel), dtype=bool)
    data_tx = acks = 0
    while acks < len(channel):
        if data_tx >= max_events:
            raise SimulationCapError(f"RCNC run hit the cap of {max_events} broadcasts")
        packet = next_coded_packet(generation, rng)
        data_tx += 1
        delivered = channel.broadcast(rng) & pending
        for i in np.flatnonzero(delivered):
            if decoders[i].receive(packet) is ReceiveResult.COMPLETE:
                pending[i] = False
                acks += 1
                if verify and decoders[i].recover(generation.original_length) != generation.data():
                    raise RCNCError(f"client {channel.clients[i].client_id} decoded corrupt data")
    return RunMetrics(
        mode="rcnc",
        n_clients=len(channel),
        airtime_units=airtime.cost(data_tx, acks, 0),
        data_tx=data_tx,
        ack_count=acks,
        retransmissions=0,
        backoff_slots=0,
        delivery_ratio=1.0,
        completed=True,
        seed=seed,
    )


def run_unicast_conversion(
    generation: Generation,
    clients: Sequence[ClientProfile],
    airtime: AirtimeModel = AirtimeModel(),
    rng=None,
    *,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> RunMetrics:
    """Send every source segment to every client with stop-and-wait ARQ.

    Clients are served in ascending id order.  Losses trigger binary
    exponential backoff on a per-packet contention window that resets after
    each ACK.
    """
    _check_clients(clients)
    seed = _seed_label(rng)
    rng = as_rng(rng)
    k = generation.k
    state = np.zeros(_kernels.ARQ_STATE_SIZE, dtype=np.int64)
    buf = np.empty(0)
    for client in sorted(clients, key=lambda c: c.client_id):
        state[_kernels.ARQ_DONE] = 0
        state[_kernels.ARQ_CW] = airtime.cw_min
        while state[_kernels.ARQ_DONE] < k:
            if state[_kernels.ARQ_DATA_TX] >= max_events:
                raise SimulationCapError(f"unicast run hit the cap of {max_events} transmissions")
            if state[_kernels.ARQ_POS] + 2 > buf.shape[0]:
                buf = rng.random(_UNIFORM_CHUNK)
                state[_kernels.ARQ_POS] = 0
            _kernels.arq_chain(buf, client.success_prob, airtime.cw_min, airtime.cw_max, k, state)
    data_tx = int(state[_kernels.ARQ_DATA_TX])
    acks = int(state[_kernels.ARQ_ACKS])
    slots = int(state[_kernels.ARQ_SLOTS])
    return RunMetrics(
        mode="unicast",
        n_clients=len(clients),
        airtime_units=airtime.cost(data_tx, acks, slots),
        data_tx=data_tx,
        ack_count=acks,
        retransmissions=int(state[_kernels.ARQ_RETX]),
        backoff_slots=slots,
        delivery_ratio=1.0,
        completed=True,
        seed=seed,
    )


def run_plain_multicast(
    generation: Generation,
    clients: Sequence[ClientProfile],
    airtime: AirtimeModel = AirtimeModel(),
    rng=None,
) -> RunMetrics:
    """Broadcast each source segment once, without feedback."""
    _check_clients(clients)
    seed = _seed_label(rng)
    rng = as_rng(rng)
    channel = Channel(clients)
    k = generation.k
    delivered = 0
    for _ in range(k):
        delivered += int(channel.broadcast(rng).sum())
    ratio = delivered / (len(channel) * k)
    return RunMetrics(
        mode="plain",
        n_clients=len(channel),
        airtime_units=airtime.cost(k, 0, 0),
        data_tx=k,
        ack_count=0,
        retransmissions=0,
        backoff_slots=0,
        delivery_ratio=ratio,
        completed=delivered == len(channel) * k,
        seed=seed,
    )


def combine(mode: str, parts: Sequence[RunMetrics], airtime: AirtimeModel, seed=None) -> RunMetrics:
    """Serialize several runs on one medium: counters add, airtime follows the counters."""
    n = sum(m.n_clients for m in parts)
    data_tx = sum(m.data_tx for m in parts)
    acks = sum(m.ack_count for m in parts)
    slots = sum(m.backoff_slots for m in parts)
    return RunMetrics(
        mode=mode,
        n_clients=n,
        airtime_units=airtime.cost(data_tx, acks, slots),
        data_tx=data_tx,
        ack_count=acks,
        retransmissions=sum(m.retransmissions for m in parts),
        backoff_slots=slots,
        delivery_ratio=sum(m.delivery_ratio * m.n_clients for m in parts) / n,
        completed=all(m.completed for m in parts),
        seed=seed,
    )


def run_mixed(
    generation: Generation,
    clients: Sequence[ClientProfile],
    airtime: AirtimeModel = AirtimeModel(),
    rng=None,
    policy_decision=None,
    *,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> RunMetrics:
    """RCNC for ``policy_decision.rcnc_set``, then unicast for ``unicast_set``.

    The stream is split into two child streams up front (RCNC phase first),
    so each phase can be replayed on its own with the same sub-seed.
    Without a decision, clients are partitioned by ``supports_decoding``.
    """
    _check_clients(clients)
    seed = _seed_label(rng)
    if policy_decision is None:
        rcnc_ids = {c.client_id for c in clients if c.supports_decoding}
    else:
        rcnc_ids = set(policy_decision.rcnc_set)
        unicast_ids = set(policy_decision.unicast_set)
        if rcnc_ids & unicast_ids or rcnc_ids | unicast_ids != {c.client_id for c in clients}:
            raise ConfigError("policy decision does not partition the client roster")
    rcnc_rng, unicast_rng = split_streams(rng, 2)
    rcnc_clients = [c for c in clients if c.client_id in rcnc_ids]
    unicast_clients = [c for c in clients if c.client_id not in rcnc_ids]
    parts = []
    if rcnc_clients:
        parts.append(run_rcnc(generation, rcnc_clients, airtime, rcnc_rng, max_events=max_events))
    if unicast_clients:
        parts.append(run_unicast_conversion(generation, unicast_clients, airtime, unicast_rng, max_events=max_events))
    return combine("mixed", parts, airtime, seed)


def mixed_substreams(rng) -> tuple[np.random.Generator, np.random.Generator]:
    """The (rcnc, unicast) child streams ``run_mixed`` would use for ``rng``."""
    a, b = split_streams(rng, 2)
    return a, b
