"""xorbench: planted 3-regular 3-XORSAT generation, Ising mapping,
heuristic solvers (coupled-laser dynamics, simulated annealing, tabu,
parallel tempering), TTS benchmarking, and scaling-law analysis."""

from .analysis import (
    ModelComparison,
    ScalingFit,
    bootstrap_ci,
    compare_models,
    emit_plot_data,
    fit_exponential,
    fit_power_law,
)
from .bench import (
    ExperimentPlan,
    SummaryRow,
    TtsCurve,
    default_cutoff_grid,
    estimate_success,
    load_plan,
    load_records,
    optimal_tts,
    parse_plan,
    run_experiment,
    summarize,
    tts_single,
    write_summary,
)
from .errors import XorbenchError
from .ising import (
    IsingModel,
    SpinState,
    VariableMap,
    decode,
    encode,
    encode_ground,
    energy,
    energy_delta,
    load_ising,
    optimal_ancilla,
    parse_ising,
    save_ising,
    serialize_ising,
    xorsat_to_ising,
)
from .solvers import (
    LaserConfig,
    ParTempConfig,
    RunRecord,
    SimAnnealConfig,
    TabuConfig,
    config_for,
    solve,
    trajectory_seed,
)
from .xorsat import (
    SolutionSpace,
    XorSatInstance,
    count_solutions,
    evaluate,
    generate_3r3x,
    gf2_solve,
    load,
    parse,
    save,
    serialize,
)

__version__ = "0.1.0"

__all__ = [
    "ExperimentPlan", "IsingModel", "LaserConfig", "ModelComparison",
    "ParTempConfig", "RunRecord", "ScalingFit", "SimAnnealConfig",
    "SolutionSpace", "SpinState", "SummaryRow", "TabuConfig", "TtsCurve",
    "VariableMap", "XorSatInstance", "XorbenchError", "bootstrap_ci",
    "compare_models", "config_for", "count_solutions", "decode",
    "default_cutoff_grid", "emit_plot_data", "encode", "encode_ground",
    "energy", "energy_delta", "estimate_success", "evaluate",
    "fit_exponential", "fit_power_law", "generate_3r3x", "gf2_solve",
    "load", "load_ising", "load_plan", "load_records", "optimal_ancilla",
    "optimal_tts", "parse", "parse_ising", "parse_plan", "run_experiment",
    "save", "save_ising", "serialize", "serialize_ising", "solve",
    "summarize", "trajectory_seed", "tts_single", "write_summary",
    "xorsat_to_ising",
]
