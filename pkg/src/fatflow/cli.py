"""Command-line experiment runner.

Usage:
    fatflow [--config FILE] [--k 4] [--capacity 10e6]
            [--scheduler hybrid --scheduler ecmp ...] [--seed 0 --seed 1 ...]
            [--duration 30] [--pattern random_bisection] [--out DIR] ...

The config file is flat `key = value` text (comma-separated lists, `none`
for optional values, `#` comments); command-line flags override file keys,
and the FATFLOW_OUT environment variable overrides the configured output
directory unless --out is given explicitly.

Exit codes: 0 success, 1 config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from .experiment import ConfigError, ExperimentConfig, run_experiment

ENV_OUT = "FATFLOW_OUT"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; config problems are exit code 1 here
    def error(self, message):
        raise ConfigError(message)


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_optional_float(key: str, raw: str) -> Optional[float]:
    if raw.strip().lower() in ("none", ""):
        return None
    return _parse_float(key, raw)


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_bool(key: str, raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


_FILE_KEYS = {
    "k": lambda c, v: setattr(c, "k", _parse_int("k", v)),
    "capacity": lambda c, v: setattr(c, "capacity", _parse_float("capacity", v)),
    "schedulers": lambda c, v: setattr(
        c, "schedulers", [s.strip() for s in v.split(",") if s.strip()]),
    "seeds": lambda c, v: setattr(
        c, "seeds", [_parse_int("seeds", s) for s in v.split(",") if s.strip()]),
    "duration": lambda c, v: setattr(c, "duration", _parse_float("duration", v)),
    "poll_interval": lambda c, v: setattr(
        c, "poll_interval", _parse_float("poll_interval", v)),
    "detection_threshold": lambda c, v: setattr(
        c, "detection_threshold", _parse_float("detection_threshold", v)),
    "alpha": lambda c, v: setattr(c, "alpha", _parse_float("alpha", v)),
    "elephant_threshold": lambda c, v: setattr(
        c, "elephant_threshold", _parse_float("elephant_threshold", v)),
    "pattern": lambda c, v: setattr(c, "pattern", v.strip()),
    "elephants": lambda c, v: setattr(c, "elephants", _parse_int("elephants", v)),
    "arrival_rate": lambda c, v: setattr(
        c, "arrival_rate", _parse_float("arrival_rate", v)),
    "flow_duration": lambda c, v: setattr(
        c, "flow_duration", _parse_optional_float("flow_duration", v)),
    "demand": lambda c, v: setattr(c, "demand", _parse_optional_float("demand", v)),
    "probe_interval": lambda c, v: setattr(
        c, "probe_interval", _parse_optional_float("probe_interval", v)),
    "base_hop_latency": lambda c, v: setattr(
        c, "base_hop_latency", _parse_float("base_hop_latency", v)),
    "queuing_scale": lambda c, v: setattr(
        c, "queuing_scale", _parse_float("queuing_scale", v)),
    "rho_cap": lambda c, v: setattr(c, "rho_cap", _parse_float("rho_cap", v)),
    "out": lambda c, v: setattr(c, "out_dir", v.strip()),
    "events": lambda c, v: setattr(c, "write_events", _parse_bool("events", v)),
}


def load_config_file(path: str, config: ExperimentConfig) -> None:
    text = Path(path).read_text()
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected `key = value`, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FILE_KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        _FILE_KEYS[key](config, value.strip())


def build_arg_parser() -> _Parser:
    p = _Parser(prog="fatflow",
                description="Run seeded fat-tree scheduling experiments.")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--k", type=str, help="switch port count (even, >= 2)")
    p.add_argument("--capacity", type=str, help="link capacity in bits/s")
    p.add_argument("--scheduler", action="append", dest="schedulers",
                   metavar="NAME",
                   help="scheduler to run; repeatable "
                        "(ecmp|hybrid|hybrid-scalar|hedera|nonblocking)")
    p.add_argument("--seed", action="append", dest="seeds", metavar="N",
                   help="run seed; repeatable")
    p.add_argument("--duration", type=str, help="simulated seconds per run")
    p.add_argument("--alpha", type=str,
                   help="scalarized controller trade-off (Mb/s per elephant)")
    p.add_argument("--elephant-threshold", type=str,
                   help="Hedera demand cutoff as a fraction of capacity")
    p.add_argument("--detection-threshold", type=str,
                   help="elephant classification rate in bits/s")
    p.add_argument("--poll-interval", type=str, help="stats poll period, seconds")
    p.add_argument("--pattern", type=str,
                   help="random_bisection|random_permutation|stride")
    p.add_argument("--elephants", type=str, help="elephant flows per run")
    p.add_argument("--arrival-rate", type=str, help="flow arrivals per second")
    p.add_argument("--flow-duration", type=str,
                   help="per-flow lifetime in seconds, or `none` for open-ended")
    p.add_argument("--probe-interval", type=str,
                   help="mice probe period in seconds, or `none` to disable mice")
    p.add_argument("--out", type=str, help="output bundle directory")
    p.add_argument("--events", action="store_true",
                   help="also write per-run event logs (JSONL)")
    return p


def config_from_args(argv: list[str], env: Optional[dict] = None) -> ExperimentConfig:
    env = os.environ if env is None else env
    args = build_arg_parser().parse_args(argv)
    config = ExperimentConfig()
    if args.config:
        try:
            load_config_file(args.config, config)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config!r}: {exc}") from exc
    if ENV_OUT in env:
        config.out_dir = env[ENV_OUT]

    if args.k is not None:
        config.k = _parse_int("k", args.k)
    if args.capacity is not None:
        config.capacity = _parse_float("capacity", args.capacity)
    if args.schedulers:
        config.schedulers = args.schedulers
    if args.seeds:
        config.seeds = [_parse_int("seed", s) for s in args.seeds]
    if args.duration is not None:
        config.duration = _parse_float("duration", args.duration)
    if args.alpha is not None:
        config.alpha = _parse_float("alpha", args.alpha)
    if args.elephant_threshold is not None:
        config.elephant_threshold = _parse_float(
            "elephant_threshold", args.elephant_threshold)
    if args.detection_threshold is not None:
        config.detection_threshold = _parse_float(
            "detection_threshold", args.detection_threshold)
    if args.poll_interval is not None:
        config.poll_interval = _parse_float("poll_interval", args.poll_interval)
    if args.pattern is not None:
        config.pattern = args.pattern
    if args.elephants is not None:
        config.elephants = _parse_int("elephants", args.elephants)
    if args.arrival_rate is not None:
        config.arrival_rate = _parse_float("arrival_rate", args.arrival_rate)
    if args.flow_duration is not None:
        config.flow_duration = _parse_optional_float(
            "flow_duration", args.flow_duration)
    if args.probe_interval is not None:
        config.probe_interval = _parse_optional_float(
            "probe_interval", args.probe_interval)
    if args.out is not None:
        config.out_dir = args.out
    if args.events:
        config.write_events = True

    config.validate()
    return config


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = config_from_args(argv)
    except ConfigError as exc:
        print(f"fatflow: config error: {exc}", file=sys.stderr)
        return 1
    try:
        out = run_experiment(config)
    except Exception as exc:
        print(f"fatflow: run failed: {exc}", file=sys.stderr)
        return 2
    n = len(config.schedulers) * len(config.seeds)
    print(f"wrote {n} reports, summary, and plot data under {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
