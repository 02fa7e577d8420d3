"""Command-line entry point: ``slqp {generate,solve,bench,sweep,plot,verify}``.

Exit codes: 0 success, 1 invalid input or configuration, 2 a verification suite failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_INVALID, EXIT_SUITE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _network_config(args):
    from .bench import load_config
    from .network import NetworkConfig

    net = load_config(args.config).network if args.config else NetworkConfig()
    over = {k: v for k, v in (("users_per_cell", args.users_per_cell), ("pmax_dbm", args.pmax_dbm),
                              ("seed", args.seed)) if v is not None}
    return replace(net, **over)


def cmd_generate(args):
    from .network import generate_cellular

    inst = generate_cellular(_network_config(args))
    text = inst.to_json(args.output)
    if args.output is None:
        print(text)
    else:
        print(f"wrote {args.output} (K={inst.K}, digest {inst.digest()})", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args):
    from .fractional import run_algorithm
    from .network import NetworkInstance
    from .percentile import percentile_number
    from .solver import SolverOptions

    inst = NetworkInstance.from_json(Path(args.instance))
    Kq = args.kq if args.kq is not None else percentile_number(inst.K, args.q)
    opts = SolverOptions(max_iters=args.inner_iters)
    res, trace = run_algorithm(args.algo.upper(), inst, Kq, opts, seed=args.seed,
                               max_outer=args.max_outer, outer_tol=args.tol)
    scale = 1.0 / math.log(2) if args.bits else 1.0
    out = {
        "algorithm": args.algo.upper(),
        "K": inst.K,
        "Kq": Kq,
        "instance": inst.digest(),
        "units": "bits" if args.bits else "nats",
        "slqp": res.value * scale,
        "outer_iters": res.iterations,
        "converged": res.converged,
        "powers": np.asarray(res.p_star).tolist(),
    }
    if args.trace:
        if trace is None:
            raise ValueError(f"{args.algo} does not produce an outer trace")
        trace.to_csv(args.trace)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _load(args):
    from .bench import load_config

    cfg = load_config(args.config)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    return cfg


def cmd_bench(args):
    from .bench import run_experiment

    print(run_experiment(_load(args), args.output_dir))
    return EXIT_OK


def cmd_sweep(args):
    from .bench import sweep_pmax

    print(sweep_pmax(_load(args), args.output_dir))
    return EXIT_OK


def cmd_plot(args):
    from .bench import emit_plot_data

    for p in emit_plot_data(args.csv, args.kind, args.output_dir):
        print(p)
    return EXIT_OK


def cmd_verify(args):
    from .verify import SUITES, format_report, run_suite

    names = args.suites or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    ok = True
    for name in names:
        checks = run_suite(name)
        print(format_report(name, checks))
        ok &= all(c.passed for c in checks)
    return EXIT_OK if ok else EXIT_SUITE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="slqp", description="SLqP rate maximization by power control.")
    p.add_argument("-v", "--verbose", action="store_true", help="log per-cell progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="draw a cellular instance and write it as JSON")
    g.add_argument("--config", help="experiment config supplying the network parameters")
    g.add_argument("--users-per-cell", type=int)
    g.add_argument("--pmax-dbm", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output", help="output path (default: stdout)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run one algorithm on an instance JSON")
    s.add_argument("instance")
    s.add_argument("--q", type=float, default=10.0, help="percentile in (0, 100]")
    s.add_argument("--kq", type=int, help="percentile number; overrides --q")
    s.add_argument("--algo", default="QFT", type=str.upper,
                   choices=["QFT", "LFT", "SGA", "CWSR", "RANDOM", "SUMRATE"])
    s.add_argument("--seed", type=int, default=0, help="seed for the random initial powers")
    s.add_argument("--max-outer", type=int, default=100)
    s.add_argument("--tol", type=float, default=1e-6, help="relative outer stopping tolerance")
    s.add_argument("--inner-iters", type=int, default=20000)
    s.add_argument("--trace", help="write the outer-iteration trace CSV here")
    s.add_argument("--bits", action="store_true", help="report the objective in bits")
    s.set_defaults(func=cmd_solve)

    for name, fn, text in (("bench", cmd_bench, "paired Monte-Carlo benchmark -> results.csv"),
                           ("sweep", cmd_sweep, "mean SLqP versus pmax -> sweep.csv")):
        b = sub.add_parser(name, help=text)
        b.add_argument("config")
        b.add_argument("-o", "--output-dir")
        b.add_argument("--workers", type=int)
        b.set_defaults(func=fn)

    pl = sub.add_parser("plot", help="emit plot-ready series and an SVG chart")
    pl.add_argument("csv")
    pl.add_argument("--kind", choices=["convergence", "sweep"], required=True)
    pl.add_argument("-o", "--output-dir")
    pl.set_defaults(func=cmd_plot)

    v = sub.add_parser("verify", help="run invariant suites (exit 2 on failure)")
    v.add_argument("suites", nargs="*", metavar="SUITE",
                   help="properties, oracles, hardness, diagnostics (default: all)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"slqp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
