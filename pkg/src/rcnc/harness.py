"""Experiment configuration, parameter sweeps, CSV output and the codec benchmark."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .channel import ClientProfile
from .codec import DecoderState, ReceiveResult, make_generation, next_coded_packet
from .errors import ConfigError, InvalidInputError, OutputError
from .policy import Mode, ModeDecision, NegotiationOutcome, PolicyConfig, decide_mode, negotiate_all
from .protocols import (
    DEFAULT_MAX_EVENTS,
    AirtimeModel,
    RunMetrics,
    run_mixed,
    run_plain_multicast,
    run_rcnc,
    run_unicast_conversion,
)

MODES = ("rcnc", "unicast", "plain", "mixed", "auto")

CSV_FIELDS = (
    "mode",
    "n_clients",
    "p",
    "k",
    "run_index",
    "seed",
    "airtime_units",
    "data_tx",
    "ack_count",
    "retransmissions",
    "delivery_ratio",
    "completed",
)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def run_seed(master_seed: int, mode: str, n_clients: int, p: float, run_index: int) -> int:
    """Per-run seed: FNV-1a 64 of ``"{master_seed}|{mode}|{n}|{repr(p)}|{run_index}"``."""
    key = f"{master_seed}|{mode}|{n_clients}|{float(p)!r}|{run_index}"
    return fnv1a_64(key.encode("ascii"))


@dataclass(frozen=True)
class ExperimentConfig:
    modes: tuple[str, ...] = ("rcnc", "unicast")
    n_list: tuple[int, ...] = (2, 5, 10, 20, 40)
    p_list: tuple[float, ...] = (0.5,)
    k: int = 32
    runs: int = 100
    seed: int = 1
    airtime: AirtimeModel = AirtimeModel()
    policy: PolicyConfig = PolicyConfig()
    capability_fraction: float = 1.0
    # (group name, fraction of the roster), assigned to contiguous id blocks from 0
    collocation: tuple[tuple[str, float], ...] = ()
    accept_prob: float = 1.0
    segment_size: int = 1500
    max_events: int = DEFAULT_MAX_EVENTS

    def validate(self) -> ExperimentConfig:
        if not self.modes:
            raise ConfigError("no modes selected")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ConfigError(f"unknown modes {bad}; choose from {', '.join(MODES)}")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ConfigError(f"every client count must be >= 1, got {list(self.n_list)}")
        if not self.p_list or any(not 0.0 < p <= 1.0 for p in self.p_list):
            raise ConfigError(f"every success probability must be in (0, 1], got {list(self.p_list)}")
        if self.k < 1 or self.runs < 1 or self.segment_size < 1 or self.max_events < 1:
            raise ConfigError("k, runs, segment_size and max_events must be >= 1")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if not 0.0 <= self.capability_fraction <= 1.0:
            raise ConfigError(f"capability_fraction must be in [0, 1], got {self.capability_fraction}")
        if "rcnc" in self.modes and self.capability_fraction < 1.0:
            raise ConfigError("mode 'rcnc' needs capability_fraction = 1; use 'mixed' or 'auto'")
        if not 0.0 <= self.accept_prob <= 1.0:
            raise ConfigError(f"accept_prob must be in [0, 1], got {self.accept_prob}")
        if any(f < 0 for _, f in self.collocation) or sum(f for _, f in self.collocation) > 1.0 + 1e-9:
            raise ConfigError("collocation fractions must be non-negative and sum to at most 1")
        return self


# ---------------------------------------------------------------- config I/O

def _ints(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _names(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _collocation(text):
    out = []
    for item in _names(text):
        name, sep, frac = item.partition(":")
        if not sep:
            raise ValueError(f"collocation entry {item!r} is not name:fraction")
        out.append((name.strip(), float(frac)))
    return tuple(out)


# key -> (parser, where it lives)
_TOP = {
    "modes": _names,
    "n_list": _ints,
    "p_list": _floats,
    "k": int,
    "runs": int,
    "seed": int,
    "capability_fraction": float,
    "collocation": _collocation,
    "accept_prob": float,
    "segment_size": int,
    "max_events": int,
}
_AIRTIME = {"t_data": float, "t_ack": float, "t_slot": float, "cw_min": int, "cw_max": int}
_POLICY = {"unicast_threshold": int, "rcnc_sweet_spot": int, "collocation_fraction_limit": float}
CONFIG_KEYS = tuple(_TOP) + tuple(_AIRTIME) + tuple(_POLICY)


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment; list values are comma-separated."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def load_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config_text(text)


def build_config(values: dict[str, str], base: ExperimentConfig = ExperimentConfig()) -> ExperimentConfig:
    """Apply raw string overrides on top of ``base`` and validate the result."""
    top, air, pol = {}, {}, {}
    for key, raw in values.items():
        for table, dest in ((_TOP, top), (_AIRTIME, air), (_POLICY, pol)):
            if key in table:
                try:
                    dest[key] = table[key](raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc
                break
        else:
            raise ConfigError(f"unknown key {key!r}")
    config = dataclasses.replace(
        base,
        airtime=dataclasses.replace(base.airtime, **air),
        policy=dataclasses.replace(base.policy, **pol),
        **top,
    )
    return config.validate()


# ---------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepRow:
    mode: str
    n_clients: int
    p: float
    k: int
    run_index: int
    seed: int
    airtime_units: float
    data_tx: int
    ack_count: int
    retransmissions: int
    delivery_ratio: float
    completed: bool


def build_roster(config: ExperimentConfig, n_clients: int, p: float) -> list[ClientProfile]:
    """Clients 0..n-1; the lowest ids are decode-capable, collocation groups fill id blocks from 0."""
    n_capable = round(config.capability_fraction * n_clients)
    group = [None] * n_clients
    start = 0
    for name, frac in config.collocation:
        size = min(round(frac * n_clients), n_clients - start)
        for i in range(start, start + size):
            group[i] = name
        start += size
    return [ClientProfile(i, p, i < n_capable, group[i]) for i in range(n_clients)]


@dataclass(frozen=True)
class AutoPlan:
    profiles: list
    outcomes: list[NegotiationOutcome]
    decision: ModeDecision


def plan_auto(config: ExperimentConfig, roster: Sequence[ClientProfile], rng) -> AutoPlan:
    accept = True if config.accept_prob >= 1.0 else config.accept_prob
    profiles, outcomes = negotiate_all(roster, accept, rng)
    return AutoPlan(profiles, outcomes, decide_mode(profiles, config.policy))


def _execute(config: ExperimentConfig, mode: str, n_clients: int, p: float, run_index: int) -> RunMetrics:
    seed = run_seed(config.seed, mode, n_clients, p, run_index)
    rng = np.random.default_rng(seed)
    generation = make_generation(rng.bytes(config.k * config.segment_size), config.k, run_index & 0xFFFFFFFF)
    roster = build_roster(config, n_clients, p)
    air, cap = config.airtime, config.max_events
    if mode == "rcnc":
        metrics = run_rcnc(generation, roster, air, rng, max_events=cap)
    elif mode == "unicast":
        metrics = run_unicast_conversion(generation, roster, air, rng, max_events=cap)
    elif mode == "plain":
        metrics = run_plain_multicast(generation, roster, air, rng)
    elif mode == "mixed":
        metrics = run_mixed(generation, roster, air, rng, max_events=cap)
    else:
        plan = plan_auto(config, roster, rng)
        if plan.decision.mode is Mode.RCNC:
            metrics = run_rcnc(generation, plan.profiles, air, rng, max_events=cap)
        elif plan.decision.mode is Mode.UNICAST:
            metrics = run_unicast_conversion(generation, plan.profiles, air, rng, max_events=cap)
        else:
            metrics = run_mixed(generation, plan.profiles, air, rng, plan.decision, max_events=cap)
        metrics = dataclasses.replace(metrics, mode=f"auto:{plan.decision.mode.value}")
    return dataclasses.replace(metrics, seed=seed)


def simulate_point(config: ExperimentConfig, mode: str, n_clients: int, p: float, run_index: int = 0) -> SweepRow:
    m = _execute(config, mode, n_clients, p, run_index)
    return SweepRow(
        mode=m.mode,
        n_clients=n_clients,
        p=p,
        k=config.k,
        run_index=run_index,
        seed=m.seed,
        airtime_units=m.airtime_units,
        data_tx=m.data_tx,
        ack_count=m.ack_count,
        retransmissions=m.retransmissions,
        delivery_ratio=m.delivery_ratio,
        completed=m.completed,
    )


def grid(config: ExperimentConfig) -> list[tuple[str, int, float]]:
    return [(mode, n, p) for mode in config.modes for n in config.n_list for p in config.p_list]


def _run_point(args) -> list[SweepRow]:
    config, (mode, n, p) = args
    return [simulate_point(config, mode, n, p, r) for r in range(config.runs)]


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[SweepRow]:
    """All (mode, N, p) points x run indices, in grid order then run index."""
    config.validate()
    jobs = [(config, point) for point in grid(config)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_point, jobs))
    else:
        chunks = [_run_point(job) for job in jobs]
    return [row for chunk in chunks for row in chunk]


# ---------------------------------------------------------------- CSV

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_csv(rows: Iterable[SweepRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, name)) for name in CSV_FIELDS])


def emit_csv(rows: Iterable[SweepRow], destination) -> None:
    """Write rows to a path or an open text stream."""
    if hasattr(destination, "write"):
        write_csv(rows, destination)
        return
    try:
        with open(destination, "w", newline="") as fh:
            write_csv(rows, fh)
    except OSError as exc:
        raise OutputError(f"cannot write {destination}: {exc.strerror}") from exc


def csv_text(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


_BOOL = {"true": True, "false": False}


def parse_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise InvalidInputError(f"unexpected CSV header {reader.fieldnames}")
    types = {f.name: f.type for f in dataclasses.fields(SweepRow)}
    rows = []
    for rec in reader:
        values = {}
        for name in CSV_FIELDS:
            kind = types[name]
            raw = rec[name]
            if kind == "bool":
                values[name] = _BOOL[raw]
            elif kind == "int":
                values[name] = int(raw)
            elif kind == "float":
                values[name] = float(raw)
            else:
                values[name] = raw
        rows.append(SweepRow(**values))
    return rows


def read_csv(path) -> list[SweepRow]:
    try:
        return parse_csv(Path(path).read_text())
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror}") from exc


def summarize(rows: Sequence[SweepRow]) -> list[dict]:
    """Mean metrics per (mode, N, p) in first-seen order."""
    buckets: dict[tuple, list[SweepRow]] = {}
    for row in rows:
        buckets.setdefault((row.mode, row.n_clients, row.p), []).append(row)
    out = []
    for (mode, n, p), rs in buckets.items():
        out.append(
            {
                "mode": mode,
                "n_clients": n,
                "p": p,
                "runs": len(rs),
                "airtime": float(np.mean([r.airtime_units for r in rs])),
                "data_tx": float(np.mean([r.data_tx for r in rs])),
                "ack_count": float(np.mean([r.ack_count for r in rs])),
                "delivery_ratio": float(np.mean([r.delivery_ratio for r in rs])),
                "completed": sum(r.completed for r in rs) / len(rs),
            }
        )
    return out


def airtime_ratios(rows: Sequence[SweepRow], numerator="unicast", denominator="rcnc") -> dict[tuple[int, float], float]:
    """Mean airtime of one mode over another at each shared (N, p)."""
    means = {(s["mode"], s["n_clients"], s["p"]): s["airtime"] for s in summarize(rows)}
    out = {}
    for (mode, n, p), value in means.items():
        if mode == denominator and (numerator, n, p) in means:
            out[(n, p)] = means[(numerator, n, p)] / value
    return out


# ---------------------------------------------------------------- codec bench

@dataclass
class BenchRow:
    k: int
    segment_size: int
    trials: int
    mean_packets: float
    encode_mbps_mean: float
    encode_mbps_p50: float
    encode_mbps_p95: float
    decode_mbps_mean: float
    decode_mbps_p50: float
    decode_mbps_p95: float
    packets: np.ndarray = field(repr=False, default=None)


def _warm_up():
    gen = make_generation(b"\x01\x02", 2)
    rng = np.random.default_rng(0)
    state = DecoderState.for_generation(gen)
    while state.receive(next_coded_packet(gen, rng)) is not ReceiveResult.COMPLETE:
        pass
    state.recover(gen.original_length)


def codec_bench(k_list: Sequence[int], segment_size: int = 1500, trials: int = 1000, seed: int = 0) -> list[BenchRow]:
    """Encode/decode throughput and packets-to-complete per generation size.

    Throughput is generation bytes over wall time; encode time covers
    drawing and combining packets, decode time covers receive plus recover.
    """
    if segment_size < 1 or trials < 1 or not k_list or any(k < 1 for k in k_list):
        raise InvalidInputError("codec_bench needs positive k values, segment_size and trials")
    _warm_up()
    clock = time.perf_counter
    out = []
    for k in k_list:
        rng = np.random.default_rng([seed, k])
        packets = np.empty(trials, dtype=np.int64)
        enc_rate = np.empty(trials)
        dec_rate = np.empty(trials)
        nbytes = k * segment_size
        for t in range(trials):
            gen = make_generation(rng.bytes(nbytes), k, t & 0xFFFFFFFF)
            state = DecoderState.for_generation(gen)
            enc = dec = 0.0
            used = 0
            done = False
            while not done:
                t0 = clock()
                packet = next_coded_packet(gen, rng)
                t1 = clock()
                done = state.receive(packet) is ReceiveResult.COMPLETE
                dec += clock() - t1
                enc += t1 - t0
                used += 1
            t0 = clock()
            data = state.recover(gen.original_length)
            dec += clock() - t0
            if data != gen.data():
                raise AssertionError(f"codec bench roundtrip failed at k={k}, trial {t}")
            packets[t] = used
            enc_rate[t] = nbytes / enc / 1e6 if enc > 0 else math.inf
            dec_rate[t] = nbytes / dec / 1e6 if dec > 0 else math.inf
        out.append(
            BenchRow(
                k=k,
                segment_size=segment_size,
                trials=trials,
                mean_packets=float(packets.mean()),
                encode_mbps_mean=float(np.mean(enc_rate)),
                encode_mbps_p50=float(np.percentile(enc_rate, 50)),
                encode_mbps_p95=float(np.percentile(enc_rate, 95)),
                decode_mbps_mean=float(np.mean(dec_rate)),
                decode_mbps_p50=float(np.percentile(dec_rate, 50)),
                decode_mbps_p95=float(np.percentile(dec_rate, 95)),
                packets=packets,
            )
        )
    return out


BENCH_FIELDS = tuple(f.name for f in dataclasses.fields(BenchRow) if f.name != "packets")


def write_bench_csv(rows: Sequence[BenchRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(BENCH_FIELDS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, name)) for name in BENCH_FIELDS])

