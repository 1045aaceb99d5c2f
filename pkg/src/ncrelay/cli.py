"""Command-line front end for the Monte-Carlo experiment driver.

Config files are flat key=value text; every key can be overridden on the
command line.  Example:

    ncrelay run --config exp.cfg --scenario fourhop-lmmse --snr 0,10,20 \
        --rho 0,0.5 --trials 10000 --seed 7 --out results.csv
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (SCENARIOS, ExperimentConfig, emit_csv, emit_gnuplot,
                          run_experiment)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def read_config_file(path: str) -> dict:
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
    return values


_LIST_FLOAT_KEYS = {"snr_db", "rho"}
_LIST_INT_KEYS = {"n_hops"}
_INT_KEYS = {"trials", "L", "seed", "workers", "rounds"}
_FLOAT_KEYS = {"power_scale", "sigma2", "sigma_n2"}
_STR_KEYS = {"scenario", "out_path"}


def build_config(file_values: dict, overrides: dict) -> ExperimentConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    kwargs = {}
    for key, val in merged.items():
        if key in _LIST_FLOAT_KEYS:
            kwargs[key] = _parse_floats(val) if isinstance(val, str) else tuple(val)
        elif key in _LIST_INT_KEYS:
            kwargs[key] = _parse_ints(val) if isinstance(val, str) else tuple(val)
        elif key in _INT_KEYS:
            kwargs[key] = int(val)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(val)
        elif key in _STR_KEYS:
            kwargs[key] = str(val)
        else:
            raise ValueError(f"unknown config key {key!r}")
    if "scenario" not in kwargs:
        raise ValueError("config must define a scenario")
    return ExperimentConfig(**kwargs)


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--snr", dest="snr_db", help="comma-separated SNR list (dB)")
    p.add_argument("--rho", help="comma-separated pilot correlations in [0,1)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-hops", dest="n_hops", help="comma-separated hop-pair counts")
    p.add_argument("--workers", type=int)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--out", dest="out_path")


def _collect_overrides(args) -> dict:
    keys = ("scenario", "snr_db", "rho", "trials", "seed", "n_hops",
            "workers", "sigma2", "out_path")
    return {k: getattr(args, k, None) for k in keys}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ncrelay",
                                     description="relay-chain Monte-Carlo experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment and write CSV")
    _add_overrides(run_p)
    run_p.add_argument("--emit-gnuplot", metavar="PATH",
                       help="also write a gnuplot script to PATH")

    val_p = sub.add_parser("validate-config", help="check a config file")
    _add_overrides(val_p)

    sub.add_parser("list-scenarios", help="print available scenarios")

    args = parser.parse_args(argv)

    if args.command == "list-scenarios":
        for s in SCENARIOS:
            print(s)
        return 0

    file_values = read_config_file(args.config) if args.config else {}
    try:
        cfg = build_config(file_values, _collect_overrides(args))
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate-config":
        print(f"ok: scenario={cfg.scenario} trials={cfg.trials} seed={cfg.seed}")
        return 0

    table = run_experiment(cfg)
    emit_csv(table, cfg.out_path)
    print(f"wrote {len(table.rows)} rows to {cfg.out_path}")
    if args.emit_gnuplot:
        emit_gnuplot(cfg, args.emit_gnuplot)
        print(f"wrote gnuplot script to {args.emit_gnuplot}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
