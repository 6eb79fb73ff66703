"""Seeded Monte Carlo trials, parameter sweeps and result files."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import analytics
from .channel import DegenerateChannel, sample_network, transmit
from .content import SystemConfig, build_piece_table, distinct_demands, piece_length_distribution, random_library
from .decoder import decode_user, verify_all
from .delivery import TransmissionSchedule, coding_delay_of_schedule, schedule_delivery, schedule_tdma
from .placement import centralized_t, place_centralized, place_decentralized, place_hybrid

__all__ = [
    "PLACEMENTS",
    "DELIVERIES",
    "CSV_FIELDS",
    "ExperimentSpec",
    "TrialOutcome",
    "ResultRow",
    "run_trial",
    "run_monte_carlo",
    "sweep_figure",
    "emit_results",
    "load_results",
    "collect_piece_lengths",
]

PLACEMENTS = ("decentralized", "centralized", "hybrid")
DELIVERIES = ("joint", "tdma")
SWEEPABLE = ("K", "L", "N", "M", "F", "field_bits", "K_c")
CSV_FIELDS = (
    "sweep_param", "sweep_value", "mean_delay_norm", "std_delay_norm",
    "analytic_infinite", "analytic_tdma", "decode_failures", "trials", "seed",
)
MAX_RESAMPLES = 100

# independent random streams within one trial
_PLACE, _LIBRARY, _NETWORK, _COEFF = range(4)


@dataclass(frozen=True)
class ExperimentSpec:
    cfg: SystemConfig
    placement: str = "decentralized"
    K_c: int = 0
    delivery: str = "joint"
    trials: int = 100
    root_seed: int = 0
    sweep_param: str | None = None
    sweep_values: tuple = ()
    verify: bool = False
    label: str | None = None  # overrides sweep_param in the output column
    workers: int = 1
    demands: tuple[int, ...] | None = None  # default: user k requests file k

    def __post_init__(self):
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}, got {self.placement!r}")
        if self.delivery not in DELIVERIES:
            raise ValueError(f"delivery must be one of {DELIVERIES}, got {self.delivery!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.root_seed < 0:
            raise ValueError("seed must be non-negative")
        if self.sweep_param is not None:
            if self.sweep_param not in SWEEPABLE:
                raise ValueError(f"cannot sweep {self.sweep_param!r}; choose from {SWEEPABLE}")
            if not self.sweep_values:
                raise ValueError("sweep needs at least one value")
            for v in self.sweep_values:
                self.at(self.sweep_param, v).check()
        else:
            self.check()

    @property
    def group_a_size(self) -> int:
        return {"decentralized": 0, "centralized": self.cfg.K}.get(self.placement, self.K_c)

    def check(self) -> None:
        if not 0 <= self.K_c <= self.cfg.K:
            raise ValueError(f"K_c={self.K_c} outside [0, K={self.cfg.K}]")
        if self.placement != "decentralized":
            centralized_t(self.group_a_size, self.cfg)
        if self.demands is not None:
            if len(self.demands) != self.cfg.K or not all(0 <= d < self.cfg.N for d in self.demands):
                raise ValueError(f"demands must list K={self.cfg.K} file ids in [0, {self.cfg.N})")

    def at(self, param: str, value) -> "ExperimentSpec":
        """This spec with one parameter replaced and the sweep removed."""
        base = replace(self, sweep_param=None, sweep_values=())
        if param == "K_c":
            return replace(base, K_c=int(value))
        value = float(value) if param == "M" else int(value)
        return replace(base, cfg=replace(self.cfg, **{param: value}))


@dataclass
class TrialOutcome:
    trial: int
    delay_slots: int
    resamples: int = 0
    decode_failures: int | None = None
    systems: int | None = None
    all_ok: bool | None = None
    schedule: TransmissionSchedule | None = field(default=None, repr=False)


def _rng_seed(spec: ExperimentSpec, trial: int, stream: int, *extra: int) -> list[int]:
    return [spec.root_seed, trial, stream, *extra]


def _place(spec: ExperimentSpec, seed):
    if spec.placement == "decentralized":
        return place_decentralized(spec.cfg, seed)
    if spec.placement == "centralized":
        return place_centralized(spec.cfg)
    return place_hybrid(spec.cfg, spec.K_c, seed)


def _schedule(spec, tables, net, library, coeff_seed):
    L = spec.cfg.L
    if len(tables) == 2:
        return schedule_tdma(tables[0], tables[1], net, library, coeff_seed, L)
    return schedule_delivery(tables[0], net, library, coeff_seed, L)


def run_trial(spec: ExperimentSpec, trial: int, keep_schedule: bool = False) -> TrialOutcome:
    """One placement + delivery realization.

    Seeds derive from ``(root_seed, trial)`` only.  Without ``spec.verify``
    only the block structure is built (the delay does not depend on the
    channel or the file contents); with it, the channel is sampled
    (resampled while degenerate), every slot is transmitted and each user
    decodes its file.
    """
    cfg = spec.cfg
    cache = _place(spec, _rng_seed(spec, trial, _PLACE))
    demands = spec.demands if spec.demands is not None else distinct_demands(cfg.K)
    if spec.delivery == "tdma":
        K_a = spec.group_a_size
        tables = [build_piece_table(cache, demands, range(K_a)),
                  build_piece_table(cache, demands, range(K_a, cfg.K))]
    else:
        tables = [build_piece_table(cache, demands)]
    coeff_seed = int(np.random.SeedSequence(_rng_seed(spec, trial, _COEFF)).generate_state(1)[0])

    if not spec.verify:
        schedule = _schedule(spec, tables, None, None, coeff_seed)
        return TrialOutcome(trial, schedule.total_slots, schedule=schedule if keep_schedule else None)

    library = random_library(cfg, _rng_seed(spec, trial, _LIBRARY))
    F = cfg.field()
    for attempt in range(MAX_RESAMPLES):
        net = sample_network(cfg.K, cfg.L, F, _rng_seed(spec, trial, _NETWORK, attempt))
        try:
            schedule = _schedule(spec, tables, net, library, coeff_seed)
            break
        except DegenerateChannel:
            continue
    else:
        raise RuntimeError(f"no generic channel found in {MAX_RESAMPLES} draws")
    report = coding_delay_of_schedule(schedule, resample_events=attempt)
    received = transmit(net, schedule.slots)
    decoded, failures, systems = {}, 0, 0
    for k in range(cfg.K):
        res = decode_user(k, received[k], cache, library, schedule, net)
        decoded[k] = res.symbols
        failures += len(res.failed_blocks)
        systems += res.systems
    ok = verify_all(library, demands, decoded).all_ok
    return TrialOutcome(trial, report.coding_delay_slots, attempt, failures, systems, ok,
                        schedule if keep_schedule else None)


def _run_trial_args(args):
    return run_trial(*args)


def run_trials(spec: ExperimentSpec) -> list[TrialOutcome]:
    jobs = [(spec, t) for t in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            out = list(pool.map(_run_trial_args, jobs, chunksize=max(1, spec.trials // (4 * spec.workers))))
    else:
        out = [run_trial(*job) for job in jobs]
    return sorted(out, key=lambda o: o.trial)


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


@dataclass(frozen=True)
class ResultRow:
    sweep_param: str
    sweep_value: object
    mean_delay_norm: float
    std_delay_norm: float
    analytic_infinite: float
    analytic_tdma: float
    decode_failures: int | None
    trials: int
    seed: int


def _point(spec: ExperimentSpec, param: str, value) -> ResultRow:
    outcomes = run_trials(spec)
    cfg = spec.cfg
    norm = np.array([o.delay_slots for o in outcomes], dtype=float) / cfg.F
    std = float(norm.std(ddof=1)) if norm.size > 1 else 0.0
    failures = None if not spec.verify else sum(o.decode_failures for o in outcomes)
    K_a = spec.group_a_size
    return ResultRow(
        param, value,
        _sig6(float(norm.mean())), _sig6(std),
        _sig6(analytics.delay_infinite(cfg.K, cfg.L, cfg.p)),
        _sig6(analytics.delay_tdma(K_a, cfg.K - K_a, cfg.L, cfg.p)),
        failures, spec.trials, spec.root_seed,
    )


def run_monte_carlo(spec: ExperimentSpec) -> list[ResultRow]:
    """Mean and spread of the normalized coding delay at every sweep point."""
    label = spec.label or spec.sweep_param or ""
    if spec.sweep_param is None:
        return [_point(spec, label, "")]
    return [_point(spec.at(spec.sweep_param, v), label, v) for v in spec.sweep_values]


def _figure_specs(figure_id: int, trials: int, root_seed: int, verify: bool) -> list[ExperimentSpec]:
    common = dict(trials=trials, root_seed=root_seed, verify=verify)
    if figure_id == 2:
        return [ExperimentSpec(SystemConfig(K=10, L=1, N=10, M=M, F=100), sweep_param="L",
                               sweep_values=tuple(range(1, 7)), label=f"L|M={M}", **common)
                for M in (2, 4, 6)]
    if figure_id == 3:
        return [ExperimentSpec(SystemConfig(K=4, L=L, N=4, M=2, F=100), sweep_param="F",
                               sweep_values=(100, 1000, 10_000, 100_000), label=f"F|L={L}", **common)
                for L in (1, 2, 3, 4)]
    if figure_id in (4, 5):
        K_c = 4 if figure_id == 4 else 6
        cfg = SystemConfig(K=8, L=1, N=8, M=0, F=1000)
        hybrid_M = tuple(M for M in range(9) if (K_c * M) % 8 == 0)
        return [
            ExperimentSpec(cfg, placement="centralized", sweep_param="M", sweep_values=tuple(range(9)),
                           label="M|centralized", **common),
            ExperimentSpec(cfg, placement="decentralized", sweep_param="M", sweep_values=tuple(range(9)),
                           label="M|decentralized", **common),
            ExperimentSpec(cfg, placement="hybrid", K_c=K_c, delivery="tdma", sweep_param="M",
                           sweep_values=hybrid_M, label=f"M|hybrid-tdma(K_c={K_c})", **common),
        ]
    if figure_id == 6:
        cfg = SystemConfig(K=10, L=1, N=10, M=5, F=1000)
        values = tuple(range(0, 11, 2))  # K_c*M/N must be an integer
        return [ExperimentSpec(cfg, placement="hybrid", delivery=d, sweep_param="K_c", sweep_values=values,
                               label=f"K_c|{d}", **common)
                for d in DELIVERIES]
    raise ValueError(f"unknown figure id {figure_id}; choose from 2-6")


def sweep_figure(figure_id: int, trials: int = 100, root_seed: int = 0, verify: bool = False,
                 workers: int = 1) -> list[ResultRow]:
    """Canned parameter grid for one of the reference figures (curves labelled in ``sweep_param``)."""
    rows = []
    for spec in _figure_specs(figure_id, trials, root_seed, verify):
        rows.extend(run_monte_carlo(replace(spec, workers=workers)))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _parse(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def emit_results(rows: list[ResultRow], fmt: str, path) -> None:
    """Write rows as CSV (fixed header order) or as a JSON list of objects."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            if fmt == "csv":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(CSV_FIELDS)
                for r in rows:
                    w.writerow([_fmt(getattr(r, f)) for f in CSV_FIELDS])
            elif fmt == "json":
                json.dump([asdict(r) for r in rows], fh, indent=2)
                fh.write("\n")
            else:
                raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def load_results(path, fmt: str | None = None) -> list[ResultRow]:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".")
    with path.open() as fh:
        if fmt == "json":
            return [ResultRow(**d) for d in json.load(fh)]
        reader = csv.DictReader(fh)
        rows = []
        for d in reader:
            vals = {f.name: _parse(d[f.name]) for f in fields(ResultRow)}
            vals["sweep_param"] = d["sweep_param"]
            vals["sweep_value"] = "" if vals["sweep_value"] is None else vals["sweep_value"]
            rows.append(ResultRow(**vals))
        return rows


def collect_piece_lengths(cfg: SystemConfig, alpha: int, trials: int, root_seed: int = 0) -> list[int]:
    """Realized piece lengths at level ``alpha`` pooled over independent decentralized placements."""
    out: list[int] = []
    demands = distinct_demands(cfg.K)
    for t in range(trials):
        cache = place_decentralized(cfg, [root_seed, t, _PLACE])
        out.extend(piece_length_distribution(build_piece_table(cache, demands), alpha))
    return out
