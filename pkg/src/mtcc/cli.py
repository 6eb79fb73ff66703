"""Command-line front end.

Examples
--------
  mtcc simulate --k 4 --l 2 --n 8 --m-cache 4 --file-size 1000 --trials 20
  mtcc sweep --k 10 --n 10 --m-cache 4 --file-size 100 --sweep-param L --sweep-values 1,2,3,4,5,6
  mtcc figure 4 --trials 50 --out fig4.csv
  mtcc analytic --k 3 --l 2 --n 3 --m-cache 1
  mtcc fit-gamma --k 10 --n 10 --m-cache 5 --file-size 100000 --alpha 3 --trials 3
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analytics
from .content import SystemConfig
from .delivery import dump_schedule
from .experiments import DELIVERIES, PLACEMENTS, ExperimentSpec, collect_piece_lengths, emit_results, run_monte_carlo, run_trial, sweep_figure
from .gf import DEFAULT_BITS

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _system_flags(p: argparse.ArgumentParser, file_size: int = 1000) -> None:
    p.add_argument("--k", type=int, default=4, help="number of users K")
    p.add_argument("--l", type=int, default=1, help="number of transmitters L")
    p.add_argument("--n", type=int, default=None, help="number of files N (default: K)")
    p.add_argument("--m-cache", type=float, default=0.0, help="cache size M in files")
    p.add_argument("--file-size", type=int, default=file_size, help="file size F in symbols")
    p.add_argument("--field-bits", type=int, default=DEFAULT_BITS, choices=(8, 16))


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--placement", choices=PLACEMENTS, default="decentralized")
    p.add_argument("--kc", type=int, default=0, help="group A (centralized) size for hybrid placement")
    p.add_argument("--delivery", choices=DELIVERIES, default="joint")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--demands", default=None, help="comma-separated file id per user (default: user k wants file k)")
    _output_flags(p)


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mtcc", description="Multi-transmitter decentralized coded caching simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Monte Carlo at one parameter point")
    _system_flags(p)
    _run_flags(p)
    p.add_argument("--no-verify", dest="verify", action="store_false",
                   help="skip transmission and decoding; count slots only")
    p.add_argument("--dump-schedule", default=None, help="write the first trial's blocks as JSON lines")

    p = sub.add_parser("sweep", help="Monte Carlo over one swept parameter")
    _system_flags(p)
    _run_flags(p)
    p.add_argument("--sweep-param", required=True, choices=("K", "L", "N", "M", "F", "field_bits", "K_c"))
    p.add_argument("--sweep-values", required=True, help="comma-separated values")
    p.add_argument("--verify", action="store_true", help="also transmit and decode every trial")

    p = sub.add_parser("figure", help="canned grid for one reference figure")
    p.add_argument("figure_id", type=int, choices=(2, 3, 4, 5, 6))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--verify", action="store_true")
    _output_flags(p)

    p = sub.add_parser("analytic", help="closed-form delays for one parameter point")
    _system_flags(p)
    p.add_argument("--kc", type=int, default=0)

    p = sub.add_parser("fit-gamma", help="fit a Gamma law to realized piece lengths")
    _system_flags(p, file_size=100)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mle", action="store_true", help="refine the moment fit by maximum likelihood")
    return parser


def _config(args) -> SystemConfig:
    n = args.n if args.n is not None else args.k
    try:
        return SystemConfig(K=args.k, L=args.l, N=n, M=args.m_cache, F=args.file_size, field_bits=args.field_bits)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _spec(args, **extra) -> ExperimentSpec:
    if args.demands is not None:
        try:
            extra["demands"] = tuple(int(v) for v in args.demands.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --demands {args.demands!r}") from exc
    try:
        return ExperimentSpec(_config(args), placement=args.placement, K_c=args.kc, delivery=args.delivery,
                              trials=args.trials, root_seed=args.seed, workers=args.workers, **extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write(rows, args) -> None:
    if args.out == "-":
        import tempfile
        from pathlib import Path

        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / f"out.{args.format}"
            emit_results(rows, args.format, path)
            sys.stdout.write(path.read_text())
    else:
        emit_results(rows, args.format, args.out)


def _parse_values(text: str, param: str) -> tuple:
    try:
        conv = float if param == "M" else int
        return tuple(conv(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"bad --sweep-values {text!r}: {exc}") from exc


def _analytic(args) -> dict:
    cfg = _config(args)
    K, L, p = cfg.K, cfg.L, cfg.p
    if not 0 <= args.kc <= K:
        raise UsageError(f"--kc {args.kc} outside [0, {K}]")
    K_d = K - args.kc
    hyb, cen, dec = analytics.taylor_delays(K, args.kc, K_d, p)
    return {
        "K": K, "L": L, "p": p, "K_c": args.kc,
        "delay_infinite": analytics.delay_infinite(K, L, p),
        "delay_tdma": analytics.delay_tdma(args.kc, K_d, L, p),
        "delay_hybrid_L1": analytics.delay_hybrid_L1(args.kc, K_d, p),
        "delta_tc": analytics.delta_tc(K, L, p),
        "lower_bound": analytics.lower_bound(K, L, p),
        "taylor": {"hybrid": hyb, "centralized": cen, "decentralized": dec},
        "hybrid_superior": analytics.hybrid_superior(K, args.kc),
    }


def _fit(args) -> dict:
    cfg = _config(args)
    if not 1 <= args.alpha <= cfg.K:
        raise UsageError(f"--alpha must lie in [1, {cfg.K}]")
    samples = collect_piece_lengths(cfg, args.alpha, args.trials, args.seed)
    fit = analytics.fit_gamma(samples, mle=args.mle)
    positive = [x for x in samples if x > 0]
    return {
        "shape": fit.params.shape, "scale": fit.params.scale, "method": fit.method,
        "n_used": fit.n_used, "n_dropped_zero": fit.n_dropped_zero,
        "ks": analytics.ks_statistic(positive, fit.params),
        "sample_mean": sum(samples) / len(samples) if samples else 0.0,
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            spec = _spec(args, verify=args.verify)
            rows = run_monte_carlo(spec)
            if args.dump_schedule:
                outcome = run_trial(spec, 0, keep_schedule=True)
                with open(args.dump_schedule, "w") as fh:
                    dump_schedule(outcome.schedule, fh)
            _write(rows, args)
        elif args.command == "sweep":
            values = _parse_values(args.sweep_values, args.sweep_param)
            rows = run_monte_carlo(_spec(args, sweep_param=args.sweep_param, sweep_values=values, verify=args.verify))
            _write(rows, args)
        elif args.command == "figure":
            _write(sweep_figure(args.figure_id, args.trials, args.seed, args.verify, args.workers), args)
        elif args.command == "analytic":
            print(json.dumps(_analytic(args), indent=2))
        elif args.command == "fit-gamma":
            print(json.dumps(_fit(args), indent=2))
    except UsageError as exc:
        print(f"mtcc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - any runtime failure maps to exit code 2
        print(f"mtcc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
