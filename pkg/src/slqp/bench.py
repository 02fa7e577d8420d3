"""Seeded Monte-Carlo experiments on cellular drops.

Configuration files are flat ``key = value`` text (an optional ``[experiment]``
header is accepted). Every realization ``r`` uses seed ``seed + r`` for both
the drop and the random initial powers, and all algorithms in a cell share
that instance and starting point.
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .fractional import MAX_OUTER, OUTER_TOL, AlgorithmKind, OuterTrace, run_algorithm
from .network import NetworkConfig, dbm_to_watts, generate_cellular
from .percentile import percentile_number
from .solver import SolverOptions

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "load_config",
    "parse_config",
    "run_cells",
    "run_experiment",
    "sweep_pmax",
    "emit_plot_data",
    "RESULT_HEADER",
]

log = logging.getLogger(__name__)

RESULT_HEADER = ("seed", "algorithm", "pmax_dbm", "final_slqp_nats", "outer_iters", "wall_ms")
TIMING_HEADER = ("seed", "algorithm", "pmax_dbm", "wall_ms", "instance")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    q: float = 10.0
    algorithms: tuple = ("QFT", "LFT", "SGA", "CWSR", "RANDOM")
    realizations: int = 50
    seed: int = 0
    pmax_sweep_dbm: tuple | None = None
    output_dir: Path = Path("results")
    max_outer: int = MAX_OUTER
    outer_tol: float = OUTER_TOL
    inner_max_iters: int = 20000
    inner_tol: float = 1e-8
    workers: int = 1
    record_wall_time: bool = False

    @property
    def K(self) -> int:
        return self.network.K

    @property
    def Kq(self) -> int:
        return percentile_number(self.K, self.q)

    @property
    def inner_opts(self) -> SolverOptions:
        return SolverOptions(max_iters=self.inner_max_iters, tol=self.inner_tol)


@dataclass(frozen=True)
class ResultRow:
    seed: int
    algorithm: str
    pmax_dbm: float
    final_slqp_nats: float
    outer_iters: int
    wall_ms: float
    instance: str = ""

    def csv_fields(self, with_time: bool) -> list:
        return [
            self.seed,
            self.algorithm,
            repr(float(self.pmax_dbm)),
            repr(float(self.final_slqp_nats)),
            self.outer_iters,
            f"{self.wall_ms:.3f}" if with_time else "",
        ]


_NETWORK_KEYS = {f.name: f.type for f in fields(NetworkConfig) if f.name != "seed"}
_SCALARS = {
    "q": float,
    "realizations": int,
    "seed": int,
    "max_outer": int,
    "outer_tol": float,
    "inner_max_iters": int,
    "inner_tol": float,
    "workers": int,
}
_CASTS = {"int": int, "float": float}


def _as_bool(key, raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _as_list(raw):
    return [t.strip() for t in raw.replace(";", ",").split(",") if t.strip()]


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text; unset keys keep their defaults."""
    if not any(line.strip().startswith("[") for line in text.splitlines()):
        text = "[experiment]\n" + text
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    extra = [s for s in cp.sections() if s != "experiment"]
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(extra)}")
    items = dict(cp.items("experiment")) if cp.has_section("experiment") else {}

    net, top = {}, {}
    for key, raw in items.items():
        try:
            if key in _NETWORK_KEYS:
                net[key] = _CASTS.get(_NETWORK_KEYS[key], float)(raw)
            elif key in _SCALARS:
                top[key] = _SCALARS[key](raw)
            elif key == "algorithms":
                algs = tuple(a.upper() for a in _as_list(raw))
                for a in algs:
                    AlgorithmKind(a)
                if not algs:
                    raise ConfigError("algorithms: empty list")
                top[key] = algs
            elif key == "pmax_sweep_dbm":
                top[key] = tuple(float(v) for v in _as_list(raw)) or None
            elif key == "output_dir":
                top[key] = Path(raw.strip())
            elif key == "record_wall_time":
                top[key] = _as_bool(key, raw)
            else:
                raise ConfigError(f"unknown key: {key}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{key}: invalid value {raw!r} ({exc})") from exc

    q = top.get("q", ExperimentConfig.q)
    if not (0 < q <= 100) or math.isnan(q):
        raise ConfigError(f"q: must lie in (0, 100], got {q}")
    if top.get("realizations", 1) < 1:
        raise ConfigError("realizations: must be >= 1")
    if top.get("workers", 1) < 1:
        raise ConfigError("workers: must be >= 1")
    if top.get("max_outer", 1) < 1:
        raise ConfigError("max_outer: must be >= 1")
    for key in ("outer_tol", "inner_tol"):
        if key in top and not top[key] > 0:
            raise ConfigError(f"{key}: must be positive")
    if top.get("inner_max_iters", 1) < 1:
        raise ConfigError("inner_max_iters: must be >= 1")
    try:
        network = NetworkConfig(**net, seed=top.get("seed", 0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not dbm_to_watts(network.noise_psd_dbm_hz) > 0:
        raise ConfigError("noise_psd_dbm_hz: noise power underflows to zero")
    return ExperimentConfig(network=network, **top)


def load_config(path) -> ExperimentConfig:
    """Read and validate a configuration file; an empty file gives the defaults."""
    return parse_config(Path(path).read_text())


def _solve_seed(config: ExperimentConfig, r: int, pmax_levels) -> list:
    seed = config.seed + r
    base = generate_cellular(replace(config.network, seed=seed))
    rows = []
    for pmax_dbm in pmax_levels:
        inst = base.with_pmax(float(dbm_to_watts(pmax_dbm)))
        digest = inst.digest()
        for alg in config.algorithms:
            t0 = time.perf_counter()
            try:
                res, _ = run_algorithm(
                    alg, inst, config.Kq, config.inner_opts, seed=seed,
                    max_outer=config.max_outer, outer_tol=config.outer_tol,
                )
                value, iters = res.value, res.iterations
            except Exception as exc:  # one failing cell must not abort the run
                log.warning("seed=%d alg=%s pmax=%s failed: %s", seed, alg, pmax_dbm, exc)
                value, iters = float("nan"), 0
            ms = 1e3 * (time.perf_counter() - t0)
            rows.append(ResultRow(seed, alg, float(pmax_dbm), float(value), int(iters), ms, digest))
            log.debug("seed=%d alg=%s pmax=%s instance=%s value=%r", seed, alg, pmax_dbm, digest, value)
    return rows


def run_cells(config: ExperimentConfig, pmax_levels=None) -> list:
    """Run every (seed, pmax, algorithm) cell; rows come back in a fixed order."""
    levels = tuple(pmax_levels) if pmax_levels is not None else (config.network.pmax_dbm,)
    seeds = range(config.realizations)
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(_solve_seed, [config] * len(seeds), seeds, [levels] * len(seeds)))
    else:
        chunks = [_solve_seed(config, r, levels) for r in seeds]
    return [row for chunk in chunks for row in chunk]


def _write_rows(rows, path: Path, with_time: bool):
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for row in rows:
        w.writerow(row.csv_fields(with_time))
    path.write_text(buf.getvalue())
    tbuf = io.StringIO()
    tw = csv.writer(tbuf, lineterminator="\n")
    tw.writerow(TIMING_HEADER)
    for row in rows:
        tw.writerow([row.seed, row.algorithm, repr(row.pmax_dbm), f"{row.wall_ms:.3f}", row.instance])
    path.with_suffix(".timing.csv").write_text(tbuf.getvalue())


def run_experiment(config: ExperimentConfig, output_dir=None) -> Path:
    """Run the benchmark at the configured ``pmax`` and write ``results.csv``.

    Timings and instance digests go to the sidecar ``results.timing.csv`` so
    that the main CSV is byte-identical across repeated runs (its ``wall_ms``
    column stays empty unless ``record_wall_time`` is set).
    """
    out = Path(output_dir or config.output_dir)
    rows = run_cells(config)
    path = out / "results.csv"
    _write_rows(rows, path, config.record_wall_time)
    return path


def _sweep_table(rows, algorithms, levels) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm"] + [repr(float(v)) for v in levels])
    for alg in algorithms:
        means = []
        for lv in levels:
            vals = [r.final_slqp_nats for r in rows if r.algorithm == alg and r.pmax_dbm == float(lv)]
            means.append(repr(float(np.nanmean(vals))) if vals else "")
        w.writerow([alg] + means)
    return buf.getvalue()


def sweep_pmax(config: ExperimentConfig, output_dir=None) -> Path:
    """Mean final SLqP per algorithm at each ``pmax_sweep_dbm`` level.

    Writes the per-cell rows to ``sweep_results.csv`` and the table of means
    (one row per algorithm, one column per power level) to ``sweep.csv``.
    """
    if not config.pmax_sweep_dbm:
        raise ConfigError("pmax_sweep_dbm: required for a sweep")
    out = Path(output_dir or config.output_dir)
    rows = run_cells(config, config.pmax_sweep_dbm)
    _write_rows(rows, out / "sweep_results.csv", config.record_wall_time)
    path = out / "sweep.csv"
    path.write_text(_sweep_table(rows, config.algorithms, config.pmax_sweep_dbm))
    return path


def _svg_chart(series: dict, xlabel: str, ylabel: str, path: Path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, (x, y) in series.items():
        ax.plot(x, y, marker="o", ms=3, label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _write_series(path: Path, x, y):
    path.write_text("".join(f"{a!r} {b!r}\n" for a, b in zip(x, y)))


def emit_plot_data(results_csv, kind: str, output_dir=None) -> list:
    """Turn a trace CSV (``kind="convergence"``) or a results CSV (``kind="sweep"``)
    into two-column ``.dat`` series plus an SVG line chart. Returns the written paths.
    """
    src = Path(results_csv)
    out = Path(output_dir) if output_dir else src.parent
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if kind == "convergence":
        trace = OuterTrace.from_csv(src)
        recs = [r for r in trace.records if r.iter >= 1]
        it = [r.iter for r in recs]
        series = {
            "objective": (it, [r.objective_nats for r in recs]),
            "auxiliary": (it, [r.aux_objective_nats for r in recs]),
        }
        xlabel, ylabel = "outer iteration", "SLqP rate (nats)"
    elif kind == "sweep":
        with open(src, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"algorithm", "pmax_dbm", "final_slqp_nats"} - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{src} lacks columns: {sorted(missing)}")
            data = {}
            for row in reader:
                data.setdefault(row["algorithm"], {}).setdefault(float(row["pmax_dbm"]), []).append(
                    float(row["final_slqp_nats"]))
        series = {}
        for alg, by_level in data.items():
            levels = sorted(by_level)
            series[alg] = (levels, [float(np.nanmean(by_level[lv])) for lv in levels])
        xlabel, ylabel = "Pmax (dBm)", "mean SLqP rate (nats)"
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    for name, (x, y) in series.items():
        p = out / f"{src.stem}_{name}.dat"
        _write_series(p, x, y)
        written.append(p)
    svg = out / f"{src.stem}_{kind}.svg"
    _svg_chart(series, xlabel, ylabel, svg)
    written.append(svg)
    return written
