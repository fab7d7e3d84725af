"""Command line entry point: ``polyflow <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import sys

from . import studies
from .config import RunConfig, load_config
from .exceptions import PolyflowError


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat 'key = value' config file")
    common.add_argument("--m", type=int, help="derivative order m")
    common.add_argument("--flow", choices=["polyharmonic", "gradient"], help="flow kind")
    common.add_argument("--modes", type=int, help="number of cosine modes N")
    common.add_argument("--dt", type=float, help="time step")
    common.add_argument("--t-end", type=float, dest="t_end", help="final time")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, help="random seed")

    p = argparse.ArgumentParser(prog="polyflow",
                                description="Spectral simulator for high-order curvature flows "
                                            "of curves between parallel lines.")
    sub = p.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", parents=[common], help="run one trajectory")
    sim.add_argument("--resume", metavar="PATH", help="continue from a checkpoint file")
    sub.add_parser("check-parity", parents=[common], help="boundary parity claims")
    psw = sub.add_parser("check-psw", parents=[common], help="randomised PSW inequality checks")
    psw.add_argument("--trials", type=int, default=1000)
    var = sub.add_parser("check-variation", parents=[common], help="first-variation identity")
    var.add_argument("--states", type=int, default=5)
    sub.add_parser("convergence-study", parents=[common], help="N and dt error study")
    sub.add_parser("sweep", parents=[common], help="amplitude grid of runs")
    return p


def build_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {"m": args.m, "kind": args.flow, "N": args.modes, "dt": args.dt,
                 "t_end": args.t_end, "out_dir": args.out, "seed": args.seed}
    return cfg.replace(**{k: v for k, v in overrides.items() if v is not None})


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "simulate":
            code, summary = studies.run_simulate(cfg, resume=args.resume)
            print(summary, end="")
            return code
        if args.command == "check-parity":
            rep = studies.parity_report(seed=cfg.seed)
        elif args.command == "check-psw":
            rep = studies.psw_report(args.trials, cfg.seed)
        elif args.command == "check-variation":
            rep = studies.variation_report(cfg.m, args.states, cfg.seed)
        elif args.command == "convergence-study":
            rep = studies.convergence_report(cfg.m)
        else:
            rep = studies.run_sweep(cfg)
        print(rep.text, end="")
        return 0 if rep.ok else 1
    except (PolyflowError, ValueError, OSError) as exc:
        print(f"polyflow: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
