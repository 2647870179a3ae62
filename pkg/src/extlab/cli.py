"""Command line interface.

    extlab sweep --model halfline --eps 1e-1:1e-4:7 --probes 5 --out sweep.csv
    extlab example1
    extlab example2 --alpha -2,-1,0,1,3
    extlab selftest

Exit codes: 0 all checks pass, 2 configuration error, 3 check failure.
A JSON config file (--config) supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import sweep as sw
from .errors import ExtlabError

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 2, 3


def _parse_eps(spec: str):
    try:
        start, stop, count = spec.split(":")
        return float(start), float(stop), int(count)
    except ValueError as exc:
        raise ValueError(f"--eps expects start:stop:count, got {spec!r}") from exc


def _load_config(path):
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    allowed = {"model", "extension", "eps", "probes", "seed", "out"}
    unknown = set(cfg) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def build_parser():
    ap = argparse.ArgumentParser(prog="extlab")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("sweep", help="convergence sweep with bound checks")
    sp.add_argument("--model", choices=["halfline", "twohalflines"])
    sp.add_argument("--extension", help="friedrichs or salpha:<alpha>")
    sp.add_argument("--eps", help="geometric grid start:stop:count")
    sp.add_argument("--probes", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="CSV output path")
    sp.add_argument("--config", help="JSON config file")
    sp.add_argument("--json", action="store_true", dest="json_mode")

    e1 = sub.add_parser("example1", help="half-line worked example")
    e1.add_argument("--json", action="store_true", dest="json_mode")

    e2 = sub.add_parser("example2", help="two-half-line worked example")
    e2.add_argument("--alpha", default="-2,-1,0,1,3",
                    help="comma-separated interaction strengths")
    e2.add_argument("--json", action="store_true", dest="json_mode")

    st = sub.add_parser("selftest", help="oracle and fixture suite")
    st.add_argument("--json", action="store_true", dest="json_mode")
    return ap


def _sweep_config(args) -> sw.SweepConfig:
    cfg = sw.SweepConfig()
    if args.config:
        file_cfg = _load_config(args.config)
        cfg.model = file_cfg.get("model", cfg.model)
        cfg.extension = file_cfg.get("extension", cfg.extension)
        cfg.probes = int(file_cfg.get("probes", cfg.probes))
        cfg.seed = int(file_cfg.get("seed", cfg.seed))
        cfg.out = file_cfg.get("out", cfg.out)
        if "eps" in file_cfg:
            e = file_cfg["eps"]
            cfg.eps_start = float(e["start"])
            cfg.eps_stop = float(e["stop"])
            cfg.eps_count = int(e["count"])
    if args.model:
        cfg.model = args.model
    if args.extension is not None:
        cfg.extension = args.extension
    if args.eps:
        cfg.eps_start, cfg.eps_stop, cfg.eps_count = _parse_eps(args.eps)
    if args.probes is not None:
        cfg.probes = args.probes
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out = args.out
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "sweep":
            config = _sweep_config(args)
            report = sw.run_sweep(config)
        elif args.cmd == "example1":
            report = sw.run_example1()
        elif args.cmd == "example2":
            alphas = tuple(float(a) for a in args.alpha.split(","))
            report = sw.run_example2(alphas=alphas)
        else:
            report = sw.run_selftest()
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExtlabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report.print_summary(json_mode=args.json_mode)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
