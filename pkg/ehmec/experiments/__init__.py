"""Instance generation, sweeps and result export."""

from .export import export, means_from_rows, read_csv, to_csv
from .generation import GenParams, generate_instance, pathloss, trial_seed
from .sweep import (
    SweepConfig,
    SweepParameter,
    SweepResult,
    SweepSpec,
    load_sweep_config,
    run_sweep,
    sweep_options,
)

__all__ = [
    "export",
    "means_from_rows",
    "read_csv",
    "to_csv",
    "GenParams",
    "generate_instance",
    "pathloss",
    "trial_seed",
    "SweepConfig",
    "SweepParameter",
    "SweepResult",
    "SweepSpec",
    "load_sweep_config",
    "run_sweep",
    "sweep_options",
]
