"""Rateless-coded reliable multicast: GF(2) codec, airtime simulator and mode policy."""

from ._kernels import BACKEND
from .channel import ClientProfile, transmit_broadcast, transmit_unicast
from .codec import (
    CodedPacket,
    DecoderState,
    Generation,
    GenerationConfig,
    ReceiveResult,
    compute_generation_size,
    make_generation,
    next_coded_packet,
    receive,
    recover,
)
from .policy import Mode, ModeDecision, PolicyConfig, decide_mode, negotiate
from .protocols import AirtimeModel, RunMetrics, run_mixed, run_plain_multicast, run_rcnc, run_unicast_conversion

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AirtimeModel",
    "ClientProfile",
    "CodedPacket",
    "DecoderState",
    "Generation",
    "GenerationConfig",
    "Mode",
    "ModeDecision",
    "PolicyConfig",
    "ReceiveResult",
    "RunMetrics",
    "compute_generation_size",
    "decide_mode",
    "make_generation",
    "negotiate",
    "next_coded_packet",
    "receive",
    "recover",
    "run_mixed",
    "run_plain_multicast",
    "run_rcnc",
    "run_unicast_conversion",
    "transmit_broadcast",
    "transmit_unicast",
]
