"""Command-line entry point: ``rcnc simulate | sweep | codec-bench``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import _kernels
from .errors import ConfigError, InvalidInputError, OutputError, SimulationCapError
from .harness import (
    CONFIG_KEYS,
    ExperimentConfig,
    airtime_ratios,
    build_config,
    codec_bench,
    emit_csv,
    load_config_file,
    simulate_point,
    run_sweep,
    summarize,
    write_bench_csv,
    write_csv,
)

log = logging.getLogger("rcnc")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_CAP = 0, 2, 3, 4

# config key -> CLI flag, where they differ from the key with dashes
_FLAG_NAMES = {"n_list": "--n-list", "p_list": "--p-list"}


def _global_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    g = parent.add_argument_group("experiment")
    g.add_argument("--config", metavar="PATH", help="flat key=value config file")
    for key in CONFIG_KEYS:
        flag = _FLAG_NAMES.get(key, "--" + key.replace("_", "-"))
        g.add_argument(flag, dest=key, metavar=key.upper(), default=argparse.SUPPRESS)
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _global_flags()
    parser = argparse.ArgumentParser(prog="rcnc", description="Rateless-coded multicast airtime simulator", parents=[parent])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[parent], help="run one grid point once")
    sim.add_argument("--mode", help="defaults to the first configured mode")
    sim.add_argument("--n", type=int, help="client count, defaults to the first of --n-list")
    sim.add_argument("--p", type=float, help="success probability, defaults to the first of --p-list")
    sim.add_argument("--run-index", type=int, default=0)

    sweep = sub.add_parser("sweep", parents=[parent], help="run the full grid and write CSV")
    sweep.add_argument("--out", help="CSV destination (stdout if omitted)")
    sweep.add_argument("--workers", type=int, default=1)

    bench = sub.add_parser("codec-bench", parents=[parent], help="encoder/decoder throughput")
    bench.add_argument("--k-list", default="1,8,16,32,64,128")
    bench.add_argument("--trials", type=int, default=1000)
    bench.add_argument("--out", help="CSV destination (stdout if omitted)")
    return parser


def _load(args) -> ExperimentConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in CONFIG_KEYS:
        if key in vars(args):
            values[key] = getattr(args, key)
    if args.command == "simulate":
        # a single point only has to be valid on its own
        for flag, key in (("mode", "modes"), ("n", "n_list"), ("p", "p_list")):
            if getattr(args, flag) is not None:
                values[key] = str(getattr(args, flag))
    return build_config(values)


def _cmd_simulate(args, config: ExperimentConfig) -> int:
    mode, n, p = config.modes[0], config.n_list[0], config.p_list[0]
    row = simulate_point(config, mode, n, p, args.run_index)
    write_csv([row], sys.stdout)
    print(
        f"# {row.mode}: N={n} p={p} k={config.k} -> airtime {row.airtime_units:.3f}, "
        f"{row.data_tx} data frames, {row.ack_count} ACKs, {row.retransmissions} retransmissions, "
        f"delivery {row.delivery_ratio:.3f} ({'complete' if row.completed else 'incomplete'})"
    )
    return EXIT_OK


def _cmd_sweep(args, config: ExperimentConfig) -> int:
    rows = run_sweep(config, workers=args.workers)
    emit_csv(rows, args.out if args.out else sys.stdout)
    for s in summarize(rows):
        log.info(
            "%-14s N=%-4d p=%-5g airtime=%10.2f data_tx=%9.1f acks=%7.1f delivery=%.3f",
            s["mode"], s["n_clients"], s["p"], s["airtime"], s["data_tx"], s["ack_count"], s["delivery_ratio"],
        )
    for (n, p), ratio in airtime_ratios(rows).items():
        log.info("unicast/rcnc airtime N=%d p=%g: %.3f", n, p, ratio)
    return EXIT_OK


def _cmd_bench(args, config: ExperimentConfig) -> int:
    try:
        k_list = [int(x) for x in args.k_list.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --k-list {args.k_list!r}") from exc
    log.info("kernel backend: %s", _kernels.BACKEND)
    rows = codec_bench(k_list, config.segment_size, args.trials, config.seed)
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                write_bench_csv(rows, fh)
        except OSError as exc:
            raise OutputError(f"cannot write {args.out}: {exc.strerror}") from exc
    else:
        write_bench_csv(rows, sys.stdout)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) or args.command == "sweep" else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        config = _load(args)
        handler = {"simulate": _cmd_simulate, "sweep": _cmd_sweep, "codec-bench": _cmd_bench}[args.command]
        return handler(args, config)
    except (ConfigError, InvalidInputError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except SimulationCapError as exc:
        log.error("simulation did not terminate: %s", exc)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
