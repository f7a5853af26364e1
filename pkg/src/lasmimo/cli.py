"""Command-line front end: scenario subcommands, figure presets, CSV output.

Configuration resolves in layers: preset/subcommand defaults, then a flat
key=value config file, then repeatable --set overrides, then dedicated flags.
The fully resolved configuration is echoed to a sidecar file next to the CSV;
rerunning from the sidecar reproduces the CSV byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .sim import Experiment, ConfigError, run_experiment, write_csv

_LIST_INT = ("nts", "nrs", "stbc_ns", "ks", "ms", "n_chipss")
_LIST_FLOAT = ("snr_dbs",)
_LIST_STR = ("detectors",)
_SCALAR_INT = ("realizations", "min_errors", "max_trials", "block_trials", "master_seed")
_SCALAR_STR = ("scenario", "modulation")

# Desk-scale analogues of the uncoded figures; --full raises the budgets 20x.
PRESETS = {
    "fig2": dict(
        scenario="vblast",
        snr_dbs=(20.0,),
        nts=(1, 2, 4, 8, 15, 25, 40, 60),
        detectors=("mf", "zf", "mf_las", "zf_las", "zf_sic"),
        min_errors=60,
        max_trials=4000,
        block_trials=200,
    ),
    "fig3": dict(
        scenario="vblast",
        snr_dbs=(0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0),
        nts=(200,),
        detectors=("zf", "zf_las", "zf_sic"),
        min_errors=40,
        max_trials=60,
        block_trials=10,
    ),
    "fig4": dict(
        scenario="vblast",
        snr_dbs=(0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0),
        nts=(1, 16, 64, 200),
        detectors=("zf_las",),
        min_errors=50,
        max_trials=800,
        block_trials=50,
    ),
    "fig5": dict(
        scenario="vblast",
        snr_dbs=(4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0),
        nts=(2, 8, 32, 64, 128, 200),
        detectors=("zf_las", "zf_sic"),
        min_errors=40,
        max_trials=300,
        block_trials=25,
    ),
    "fig6": dict(
        scenario="vblast",
        snr_dbs=(5.0, 10.0, 15.0),
        nts=(10, 50, 100, 200),
        detectors=("mf_las", "zf_las", "mmse_las"),
        min_errors=10**9,  # fixed trial count; step statistics want full blocks
        max_trials=30,
        block_trials=30,
    ),
    "fig9": dict(
        scenario="stbc",
        modulation="qam4",
        snr_dbs=(4.0, 6.0, 8.0, 10.0, 12.0),
        stbc_ns=(4, 8, 16),
        detectors=("mmse_las",),
        min_errors=60,
        max_trials=400,
        block_trials=20,
    ),
    "fig11": dict(
        scenario="mccdma",
        snr_dbs=(4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0),
        ks=(200,),
        ms=(1,),
        n_chipss=(300,),
        detectors=("mf", "zf", "mf_las", "zf_las"),
        min_errors=60,
        max_trials=400,
        block_trials=25,
    ),
    "fig12": dict(
        scenario="mccdma",
        snr_dbs=(15.0,),
        ks=(10, 50, 100, 200, 400),
        ms=(1, 1, 1, 1, 1),
        n_chipss=(15, 75, 150, 300, 600),
        detectors=("mf", "zf", "mf_las", "zf_las"),
        min_errors=60,
        max_trials=2000,
        block_trials=100,
    ),
    "fig13": dict(
        scenario="mccdma",
        snr_dbs=(0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0),
        ks=(100, 100, 100),
        ms=(1, 2, 4),
        n_chipss=(100, 50, 25),
        detectors=("mf_las", "zf_las"),
        min_errors=60,
        max_trials=3000,
        block_trials=100,
    ),
    "fig14": dict(
        scenario="mccdma",
        snr_dbs=(8.0,),
        ks=(30,) * 9,
        ms=(4,) * 9,
        n_chipss=(300, 120, 60, 30, 15, 10, 8, 6, 5),
        detectors=("mf", "mf_las", "zf_las"),
        min_errors=60,
        max_trials=4000,
        block_trials=200,
    ),
}

_FULL_SCALE = 20


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _LIST_INT:
            return tuple(int(v) for v in raw.split(",") if v != "")
        if key in _LIST_FLOAT:
            return tuple(float(v) for v in raw.split(",") if v != "")
        if key in _LIST_STR:
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        if key in _SCALAR_INT:
            return int(raw)
        if key in _SCALAR_STR:
            return raw
    except ValueError as exc:
        raise ConfigError([f"{key}: cannot parse {raw!r} ({exc})"]) from exc
    raise ConfigError([f"{key}: unknown configuration key"])


def read_config_file(path) -> dict:
    """Flat key=value lines; blank lines and '#' comments ignored."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError([f"{path}:{lineno}: expected key=value, got {line!r}"])
                key, raw = line.split("=", 1)
                values[key.strip()] = _parse_value(key.strip(), raw)
    except OSError as exc:
        raise ConfigError([f"config: cannot read {path}: {exc}"]) from exc
    return values


def write_sidecar(exp: Experiment, path) -> None:
    lines = []
    for f in fields(Experiment):
        value = getattr(exp, f.name)
        if isinstance(value, tuple):
            if not value:
                continue
            rendered = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}\n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.writelines(lines)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lasmimo",
        description="Monte Carlo BER and capacity experiments for LAS detection",
    )
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="flat key=value config file (e.g. a sidecar)")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override any experiment field (repeatable)",
        )
        p.add_argument("--out", default="results.csv", help="output CSV path")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--full", action="store_true", help="raise trial budgets 20x")

    for name in ("vblast", "stbc", "mccdma", "capacity"):
        p = sub.add_parser(name, help=f"run a {name} experiment")
        common(p)
        p.add_argument("--snr-db", dest="snr_dbs", help="comma list of SNRs in dB")
        p.add_argument("--detectors", help="comma list of detectors")
        if name in ("vblast", "capacity"):
            p.add_argument("--nt", dest="nts", help="comma list of transmit antenna counts")
            p.add_argument("--nr", dest="nrs", help="comma list of receive antenna counts")
        if name == "vblast":
            p.add_argument("--modulation", choices=("bpsk", "qam4"))
        if name == "stbc":
            p.add_argument("--n", dest="stbc_ns", help="comma list of code sizes")
        if name == "mccdma":
            p.add_argument("--k", dest="ks", help="comma list of user counts")
            p.add_argument("--m", dest="ms", help="comma list of subcarrier counts")
            p.add_argument("--n-chips", dest="n_chipss", help="comma list of chips per bit")
        if name == "capacity":
            p.add_argument("--realizations", type=int, default=None)
        p.add_argument("--min-errors", type=int, default=None)
        p.add_argument("--max-trials", type=int, default=None)

    p = sub.add_parser("preset", help="run a figure preset")
    p.add_argument("figure", choices=sorted(PRESETS))
    common(p)
    return parser


_DEFAULTS = {
    "vblast": dict(scenario="vblast", snr_dbs=(10.0,), nts=(4,), detectors=("mf_las",)),
    "stbc": dict(
        scenario="stbc",
        modulation="qam4",
        snr_dbs=(8.0,),
        stbc_ns=(4,),
        detectors=("mmse_las",),
    ),
    "mccdma": dict(
        scenario="mccdma",
        snr_dbs=(8.0,),
        ks=(20,),
        ms=(1,),
        n_chipss=(30,),
        detectors=("mf_las",),
    ),
    "capacity": dict(scenario="capacity", snr_dbs=(10.0,), nts=(1,), realizations=1000),
}


def _resolve(args) -> Experiment:
    if args.command == "preset":
        values = dict(PRESETS[args.figure])
    else:
        values = dict(_DEFAULTS[args.command])
    if args.config:
        file_values = read_config_file(args.config)
        scen = file_values.get("scenario")
        if scen and args.command != "preset" and scen != args.command:
            raise ConfigError(
                [f"scenario: config file says {scen!r} but subcommand is {args.command!r}"]
            )
        values.update(file_values)
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError([f"--set: expected KEY=VALUE, got {item!r}"])
        key, raw = item.split("=", 1)
        values[key.strip()] = _parse_value(key.strip(), raw)
    # dedicated flags win over file and --set
    for key in ("snr_dbs", "detectors", "nts", "nrs", "stbc_ns", "ks", "ms", "n_chipss"):
        raw = getattr(args, key, None)
        if raw is not None:
            values[key] = _parse_value(key, raw)
    for key in ("realizations", "min_errors", "max_trials"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "modulation", None) is not None:
        values["modulation"] = args.modulation
    if args.seed is not None:
        values["master_seed"] = args.seed
    if args.full:
        values["min_errors"] = values.get("min_errors", 100) * _FULL_SCALE
        values["max_trials"] = values.get("max_trials", 10000) * _FULL_SCALE
    known = {f.name for f in fields(Experiment)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError([f"{k}: unknown configuration key" for k in unknown])
    try:
        exp = Experiment(**values)
    except TypeError as exc:
        raise ConfigError([f"config: {exc}"]) from exc
    errors = exp.validate()
    if errors:
        raise ConfigError(errors)
    return exp


def main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        exp = _resolve(args)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 2
    try:
        rows = run_experiment(exp, workers=args.workers)
        write_csv(rows, args.out)
        write_sidecar(exp, str(args.out) + ".meta")
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(rows)} rows to {args.out} (config sidecar: {args.out}.meta)")
    return 0


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
