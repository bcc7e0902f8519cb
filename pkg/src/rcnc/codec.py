"""Generation-based random linear rateless code over GF(2).

A generation is ``k`` equal-size segments.  Each coded packet carries a
uniformly random nonzero coefficient vector and the XOR of the segments it
selects.  Receivers row-reduce incrementally and can recover the generation
once they hold ``k`` independent packets.

Coefficient vectors are numpy ``uint8`` arrays of 0/1 values, one entry per
segment; payloads are ``uint8`` arrays of ``segment_size`` bytes.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from . import _kernels
from .errors import InvalidInputError, NotReadyError, ProtocolError

HEADER = struct.Struct(">IHH")
MAX_K = 0xFFFF
MAX_SEGMENT_SIZE = 0xFFFF
MAX_GENERATION_ID = 0xFFFFFFFF


@dataclass(frozen=True)
class GenerationConfig:
    k: int
    segment_size: int

    def __post_init__(self):
        if self.k < 1 or self.segment_size < 1:
            raise InvalidInputError(f"k and segment_size must be >= 1, got {self.k}, {self.segment_size}")

    @property
    def capacity(self) -> int:
        return self.k * self.segment_size


@dataclass(frozen=True, eq=False)
class Generation:
    id: int
    config: GenerationConfig
    segments: np.ndarray  # (k, segment_size) uint8
    original_length: int

    @property
    def k(self) -> int:
        return self.config.k

    def data(self) -> bytes:
        return self.segments.tobytes()[: self.original_length]


@dataclass(frozen=True, eq=False)
class CodedPacket:
    generation_id: int
    coefficients: np.ndarray  # (k,) uint8 of 0/1
    payload: np.ndarray  # (segment_size,) uint8

    def __eq__(self, other):
        if not isinstance(other, CodedPacket):
            return NotImplemented
        return (
            self.generation_id == other.generation_id
            and np.array_equal(self.coefficients, other.coefficients)
            and np.array_equal(self.payload, other.payload)
        )

    @property
    def k(self) -> int:
        return self.coefficients.shape[0]

    @property
    def segment_size(self) -> int:
        return self.payload.shape[0]

    def to_bytes(self) -> bytes:
        """Wire layout: id u32, k u16, segment_size u16 (big-endian), MSB-first coefficient bits, payload."""
        if not 0 <= self.generation_id <= MAX_GENERATION_ID:
            raise InvalidInputError(f"generation id {self.generation_id} does not fit in 4 bytes")
        if self.k > MAX_K or self.segment_size > MAX_SEGMENT_SIZE:
            raise InvalidInputError("k and segment_size must fit in 2 bytes for serialization")
        header = HEADER.pack(self.generation_id, self.k, self.segment_size)
        bits = np.packbits(self.coefficients, bitorder="big")
        return header + bits.tobytes() + self.payload.tobytes()

    @classmethod
    def from_bytes(cls, buf: bytes) -> CodedPacket:
        packet, used = _parse_record(memoryview(buf), 0)
        if used != len(buf):
            raise ProtocolError(f"{len(buf) - used} trailing bytes after coded packet")
        return packet


def record_size(k: int, segment_size: int) -> int:
    return HEADER.size + (k + 7) // 8 + segment_size


def _parse_record(view: memoryview, offset: int) -> tuple[CodedPacket, int]:
    if len(view) - offset < HEADER.size:
        raise ProtocolError("truncated coded-packet header")
    gid, k, size = HEADER.unpack_from(view, offset)
    if k < 1 or size < 1:
        raise ProtocolError(f"bad header: k={k}, segment_size={size}")
    end = offset + record_size(k, size)
    if end > len(view):
        raise ProtocolError("truncated coded-packet body")
    nbytes = (k + 7) // 8
    start = offset + HEADER.size
    raw = np.frombuffer(view[start : start + nbytes], dtype=np.uint8)
    coefficients = np.unpackbits(raw, bitorder="big", count=k)
    payload = np.frombuffer(view[start + nbytes : end], dtype=np.uint8).copy()
    return CodedPacket(gid, coefficients, payload), end


def write_packets(stream: BinaryIO, packets: Iterable[CodedPacket]) -> int:
    """Append serialized packets to a binary stream; returns the count written."""
    n = 0
    for packet in packets:
        stream.write(packet.to_bytes())
        n += 1
    return n


def iter_packets(buf: bytes) -> Iterator[CodedPacket]:
    """Parse a concatenation of serialized packets (a fixture file's contents)."""
    view = memoryview(buf)
    offset = 0
    while offset < len(view):
        packet, offset = _parse_record(view, offset)
        yield packet


def make_generation(data, k: int, generation_id: int = 0) -> Generation:
    """Split ``data`` into ``k`` segments of ``ceil(len/k)`` bytes, zero-padding the tail."""
    raw = np.frombuffer(bytes(data), dtype=np.uint8)
    if raw.size == 0:
        raise InvalidInputError("cannot build a generation from empty data")
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    if generation_id < 0:
        raise InvalidInputError(f"generation id must be non-negative, got {generation_id}")
    config = GenerationConfig(k, -(-raw.size // k))
    segments = np.zeros(config.capacity, dtype=np.uint8)
    segments[: raw.size] = raw
    return Generation(generation_id, config, segments.reshape(k, config.segment_size), raw.size)


def compute_generation_size(bitrate: float, packet_size: float, max_latency: float) -> int:
    """Source packets per generation that fit the latency budget.

    ``ceil(bitrate * max_latency / (8 * packet_size))`` with bitrate in bits/s,
    packet_size in bytes and max_latency in seconds.

    >>> compute_generation_size(8 * 1500, 1500, 1.0)
    1
    """
    if bitrate <= 0 or packet_size <= 0 or max_latency <= 0:
        raise InvalidInputError("bitrate, packet_size and max_latency must all be positive")
    ratio = Fraction(bitrate) * Fraction(max_latency) / (8 * Fraction(packet_size))
    return math.ceil(ratio)


def random_coefficients(k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from GF(2)^k without the zero vector."""
    while True:
        bits = rng.integers(0, 2, size=k, dtype=np.uint8)
        if bits.any():
            return bits


def encode(generation: Generation, coefficients: np.ndarray) -> CodedPacket:
    coefficients = np.ascontiguousarray(coefficients, dtype=np.uint8)
    if coefficients.shape != (generation.k,):
        raise InvalidInputError(f"expected {generation.k} coefficients, got shape {coefficients.shape}")
    payload = np.empty(generation.config.segment_size, dtype=np.uint8)
    _kernels.xor_combine(generation.segments, coefficients, payload)
    return CodedPacket(generation.id, coefficients, payload)


def next_coded_packet(generation: Generation, rng: np.random.Generator) -> CodedPacket:
    return encode(generation, random_coefficients(generation.k, rng))


class ReceiveResult(enum.Enum):
    INNOVATIVE = "innovative"
    REDUNDANT = "redundant"
    COMPLETE = "complete"


class DecoderState:
    """Incremental Gaussian elimination for one generation.

    Row ``i`` of the coefficient matrix is the ``i``-th stored packet after
    reduction; its lowest set bit is its pivot and no two rows share one.
    """

    def __init__(self, config: GenerationConfig, generation_id: int = 0):
        self.config = config
        self.generation_id = generation_id
        k, size = config.k, config.segment_size
        self._coef = np.zeros((k, k), dtype=np.uint8)
        self._pay = np.zeros((k, size), dtype=np.uint8)
        self._pivot_row = np.full(k, -1, dtype=np.int64)
        self.rank = 0

    @classmethod
    def for_generation(cls, generation: Generation) -> DecoderState:
        return cls(generation.config, generation.id)

    @property
    def complete(self) -> bool:
        return self.rank == self.config.k

    @property
    def rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Copies of the stored (coefficients, payloads), one row per received innovative packet."""
        return self._coef[: self.rank].copy(), self._pay[: self.rank].copy()

    @property
    def pivots(self) -> np.ndarray:
        """Pivot column of each stored row."""
        order = np.full(self.rank, -1, dtype=np.int64)
        cols = np.flatnonzero(self._pivot_row >= 0)
        order[self._pivot_row[cols]] = cols
        return order

    def receive(self, packet: CodedPacket) -> ReceiveResult:
        if packet.generation_id != self.generation_id:
            raise ProtocolError(f"packet for generation {packet.generation_id} sent to decoder for {self.generation_id}")
        if packet.k != self.config.k or packet.segment_size != self.config.segment_size:
            raise ProtocolError(
                f"packet shape (k={packet.k}, size={packet.segment_size}) does not match "
                f"decoder (k={self.config.k}, size={self.config.segment_size})"
            )
        if self.complete:
            return ReceiveResult.REDUNDANT
        vec = packet.coefficients.astype(np.uint8, copy=True)
        pay = packet.payload.astype(np.uint8, copy=True)
        col = _kernels.reduce_against(self._coef, self._pay, self._pivot_row, vec, pay)
        if col < 0:
            return ReceiveResult.REDUNDANT
        self._coef[self.rank] = vec
        self._pay[self.rank] = pay
        self._pivot_row[col] = self.rank
        self.rank += 1
        return ReceiveResult.COMPLETE if self.complete else ReceiveResult.INNOVATIVE

    def recover(self, original_length: int | None = None) -> bytes:
        if not self.complete:
            raise NotReadyError(f"rank {self.rank} < k = {self.config.k}")
        coef = self._coef.copy()
        pay = self._pay.copy()
        _kernels.back_substitute(coef, pay, self._pivot_row)
        segments = pay[self._pivot_row]
        out = segments.tobytes()
        if original_length is None:
            return out
        if not 0 <= original_length <= len(out):
            raise InvalidInputError(f"original_length {original_length} outside [0, {len(out)}]")
        return out[:original_length]


def receive(state: DecoderState, packet: CodedPacket) -> ReceiveResult:
    return state.receive(packet)


def recover(state: DecoderState, original_length: int) -> bytes:
    return state.recover(original_length)
