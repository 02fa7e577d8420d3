"""Sum-least-q-percentile (SLqP) rate maximization by power control."""

from .bench import ExperimentConfig, emit_plot_data, load_config, run_experiment, sweep_pmax
from .diagnostics import minorant_tangency_check, stationarity_check
from .fractional import (
    AlgorithmKind,
    OuterTrace,
    run_algorithm,
    run_cwsr_baseline,
    run_lft,
    run_qft,
    run_random_baseline,
    run_sga_baseline,
    run_sumrate,
    solve_parallel_lqp,
    solve_parallel_slqp,
)
from .hardness import ComponentGraph, brute_force_binary_optimum, build_instance, expected_optimum
from .network import (
    NetworkConfig,
    NetworkInstance,
    ParallelChannelInstance,
    generate_cellular,
    rates,
    signal_interference,
)
from .percentile import PercentileSpec, percentile_number, sgqp, slqp, slqp_supergradient
from .solver import FeasibleSet, SolveResult, SolverOptions, maximize_concave, water_fill

__version__ = "0.1.0"

__all__ = [
    "AlgorithmKind", "ComponentGraph", "ExperimentConfig", "FeasibleSet", "NetworkConfig",
    "NetworkInstance", "OuterTrace", "ParallelChannelInstance", "PercentileSpec", "SolveResult",
    "SolverOptions", "brute_force_binary_optimum", "build_instance", "emit_plot_data",
    "expected_optimum", "generate_cellular", "load_config", "maximize_concave",
    "minorant_tangency_check", "percentile_number", "rates", "run_algorithm", "run_cwsr_baseline",
    "run_experiment", "run_lft", "run_qft", "run_random_baseline", "run_sga_baseline", "run_sumrate",
    "sgqp", "signal_interference", "slqp", "slqp_supergradient", "solve_parallel_lqp",
    "solve_parallel_slqp", "stationarity_check", "sweep_pmax", "water_fill",
]
