"""Runtime configuration for the EH-MEC rate maximizer."""

from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

StepRuleName = Literal["diminishing", "constant", "polyak"]


class Settings(BaseSettings):
    """Settings for the rate maximizer.

    Every field can be overridden with an ``EHMEC_``-prefixed environment
    variable (``EHMEC_MAX_ITERS=5000``) or a ``.env`` file. Explicit CLI
    flags and keyword arguments take precedence over both.
    """

    model_config = SettingsConfigDict(env_prefix="EHMEC_", extra="ignore")

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None

    # Dual subgradient solver
    eps: float = 1e-6
    max_iters: int = 100_000
    step_rule: StepRuleName = "diminishing"
    eta0: float = 1.0
    scale_steps: bool = True
    floor_scale: float = 1e-3
    check_every: int = 10
    gap_exit: float = 1e-4
    gap_tol: float = 1e-3
    polish: bool = True
    feasibility_tol: float = 1e-9

    # Oracles
    grid_points: int = 25
    grid_rounds: int = 3
    grid_refine: int = 4
    pg_max_iters: int = 2000

    # Experiments
    workers: int = 1
    seed: int = 0

    @field_validator("log_level")
    @classmethod
    def check_log_level(cls, v: str) -> str:
        """Normalize and validate the log level name."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of {valid_levels}")
        return v.upper()

    @field_validator("eps", "eta0", "floor_scale", "gap_exit", "gap_tol", "feasibility_tol")
    @classmethod
    def check_positive(cls, v: float) -> float:
        """Tolerances and step scales must be strictly positive."""
        if not v > 0:
            raise ValueError("must be strictly positive")
        return v

    @field_validator("max_iters", "check_every", "grid_rounds", "pg_max_iters", "workers")
    @classmethod
    def check_count(cls, v: int) -> int:
        """Iteration budgets and worker counts must be at least one."""
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("grid_points")
    @classmethod
    def check_grid_points(cls, v: int) -> int:
        """A grid axis needs both of its end points."""
        if v < 2:
            raise ValueError("grid needs at least 2 points per axis")
        return v

    @field_validator("grid_refine")
    @classmethod
    def check_grid_refine(cls, v: int) -> int:
        """Refinement must shrink the search box."""
        if v < 2:
            raise ValueError("grid refinement factor must be at least 2")
        return v
