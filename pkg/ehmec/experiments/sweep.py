"""Seeded parameter sweeps comparing allocation schemes."""

import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Dict, Iterator, List, Literal, Optional, Tuple

import attr
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ehmec.core.baselines import SchemeId, run_scheme
from ehmec.core.dual_solver import SolveOptions
from ehmec.errors import ConfigError
from ehmec.io.errors import handle_input_errors
from ehmec.io.files import load_json
from ehmec.experiments.generation import GenParams, generate_instance, trial_seed
from ehmec.utils.fields import dict_deep_update
from ehmec.version import __title__, __version__

logger = logging.getLogger(__name__)


class SweepParameter(str, Enum):
    """Quantity varied along a sweep."""

    NUM_SLOTS = "N"
    SLOT_SECONDS = "tau"
    NUM_USERS = "K"

    @property
    def integer(self) -> bool:
        """Whether the swept values are counts."""
        return self is not SweepParameter.SLOT_SECONDS


class SweepSpec(BaseModel):
    """What to sweep, how often, and with which schemes.

    ``horizon_mode`` only matters when sweeping ``N``: ``fixed_tau`` keeps the
    slot length, ``fixed_T`` keeps the generator's horizon and shortens slots.
    ``solver`` holds :class:`SolveOptions` overrides for this sweep.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    parameter: SweepParameter
    values: List[float] = Field(min_length=1)
    trials: int = Field(ge=1)
    schemes: List[SchemeId] = Field(default_factory=lambda: list(SchemeId), min_length=1)
    num_users: int = Field(10, ge=1)
    num_slots: int = Field(20, ge=1)
    slot_seconds: float = Field(0.02, gt=0)
    horizon_mode: Literal["fixed_tau", "fixed_T"] = "fixed_tau"
    exclude_nonconverged: bool = False
    solver: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("values")
    @classmethod
    def check_values(cls, v: List[float]) -> List[float]:
        """Swept values must be strictly positive."""
        if any(not x > 0 for x in v):
            raise ValueError("swept values must be strictly positive")
        return v

    @model_validator(mode="after")
    def check_counts(self) -> "SweepSpec":
        """Counts must be whole numbers."""
        if self.parameter.integer and any(float(x) != int(x) for x in self.values):
            raise ValueError(f"values of {self.parameter.value} must be integers")
        return self

    def point(self, value: float, horizon: float) -> Tuple[int, int, float]:
        """``(K, N, tau)`` of the sweep point at ``value``."""
        k, n, tau = self.num_users, self.num_slots, self.slot_seconds
        if self.parameter is SweepParameter.NUM_SLOTS:
            n = int(value)
            if self.horizon_mode == "fixed_T":
                tau = horizon / n
        elif self.parameter is SweepParameter.NUM_USERS:
            k = int(value)
        else:
            tau = float(value)
        return k, n, tau


class SweepConfig(BaseModel):
    """Layout of a sweep configuration file."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sweep: SweepSpec
    generator: GenParams = Field(default_factory=GenParams)


@attr.s(frozen=True, eq=False)
class SweepResult:
    """Objectives of every scheme, value and trial of a sweep.

    ``objectives`` and ``converged`` have shape (values, schemes, trials).
    """

    spec: SweepSpec = attr.ib()
    generator: GenParams = attr.ib()
    objectives: np.ndarray = attr.ib()
    converged: np.ndarray = attr.ib()
    build: str = attr.ib(default=f"{__title__} {__version__}")

    @property
    def values(self) -> List[float]:
        """Swept values."""
        return list(self.spec.values)

    @property
    def schemes(self) -> List[SchemeId]:
        """Schemes in column order."""
        return list(self.spec.schemes)

    def _mask(self) -> np.ndarray:
        if self.spec.exclude_nonconverged:
            return self.converged
        return np.ones_like(self.converged, dtype=bool)

    def means(self) -> np.ndarray:
        """Mean objective per (value, scheme); NaN when every trial is excluded."""
        mask = self._mask()
        counts = mask.sum(axis=2)
        totals = np.where(mask, self.objectives, 0.0).sum(axis=2)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(counts > 0, totals / counts, np.nan)

    def stds(self) -> np.ndarray:
        """Population standard deviation per (value, scheme)."""
        mask = self._mask()
        counts = mask.sum(axis=2)
        means = self.means()
        squares = np.where(mask, (self.objectives - means[:, :, None]) ** 2, 0.0).sum(axis=2)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(counts > 0, np.sqrt(squares / counts), np.nan)

    def nonconverged_counts(self) -> np.ndarray:
        """Number of trials per (value, scheme) whose solver did not converge."""
        return (~self.converged).sum(axis=2)

    def mean_of(self, scheme: SchemeId) -> np.ndarray:
        """Mean objective of ``scheme`` along the sweep."""
        return self.means()[:, self.schemes.index(SchemeId(scheme))]

    def crossover(self, first: SchemeId, second: SchemeId) -> Optional[float]:
        """First swept value where ``first`` beats ``second`` on average, if any."""
        if SchemeId(first) not in self.schemes or SchemeId(second) not in self.schemes:
            return None
        a, b = self.mean_of(first), self.mean_of(second)
        for value, x, y in zip(self.values, a, b):
            if x > y:
                return float(value)
        return None

    def rows(self) -> Iterator[Tuple[float, SchemeId, int, float, bool]]:
        """``(value, scheme, trial, objective, converged)`` in file order."""
        for vi, value in enumerate(self.values):
            for trial in range(self.spec.trials):
                for si, scheme in enumerate(self.schemes):
                    yield value, scheme, trial, float(self.objectives[vi, si, trial]), bool(self.converged[vi, si, trial])

    def to_dict(self) -> Dict[str, Any]:
        """Summary with metadata, per-scheme statistics and raw objectives."""
        means, stds, missing = self.means(), self.stds(), self.nonconverged_counts()
        return {
            "metadata": {
                "build": self.build,
                "seed": self.generator.seed,
                "sweep": self.spec.model_dump(mode="json"),
                "generator": self.generator.model_dump(mode="json"),
            },
            "parameter": self.spec.parameter.value,
            "values": self.values,
            "schemes": {
                scheme.value: {
                    "mean": means[:, si].tolist(),
                    "std": stds[:, si].tolist(),
                    "nonconverged": missing[:, si].tolist(),
                    "objectives": self.objectives[:, si, :].tolist(),
                }
                for si, scheme in enumerate(self.schemes)
            },
            "crossover": {
                "full_offload_over_local_only": self.crossover(SchemeId.FULL_OFFLOAD, SchemeId.LOCAL_ONLY),
            },
        }


def sweep_options(spec: SweepSpec, base: Optional[SolveOptions] = None) -> SolveOptions:
    """Solver options for ``spec``: ``base`` updated with ``spec.solver``.

    Raises:
        ConfigError: If the overrides do not validate.
    """
    merged = dict_deep_update((base or SolveOptions()).model_dump(), spec.solver, inplace=False)
    try:
        return SolveOptions(**merged)
    except ValidationError as e:
        raise ConfigError(f"Invalid solver overrides in sweep: {e}") from e


def run_sweep(
    spec: SweepSpec,
    generator: GenParams,
    options: Optional[SolveOptions] = None,
    workers: int = 1,
) -> SweepResult:
    """Run every scheme on every trial of every sweep value.

    Trial seeds depend only on ``generator.seed`` and the trial coordinates,
    so results are identical for any ``workers``.
    """
    solver = sweep_options(spec, options)
    if workers > 1:
        solver = solver.model_copy(update={"workers": 1})
    schemes = spec.schemes
    shape = (len(spec.values), len(schemes), spec.trials)
    objectives = np.zeros(shape)
    converged = np.ones(shape, dtype=bool)

    def run_trial(task: Tuple[int, int]) -> Tuple[int, int, List[Tuple[float, bool]]]:
        vi, trial = task
        k, n, tau = spec.point(spec.values[vi], generator.horizon)
        params = generator.model_copy(update={"seed": trial_seed(generator.seed, vi, trial)})
        instance = generate_instance(params, k, n, tau)
        outcomes = [run_scheme(instance, scheme, solver) for scheme in schemes]
        return vi, trial, [(o.objective, o.converged) for o in outcomes]

    tasks = [(vi, t) for vi in range(len(spec.values)) for t in range(spec.trials)]
    logger.info(
        "Sweeping %s over %s with %d trials and schemes %s",
        spec.parameter.value, spec.values, spec.trials, [s.value for s in schemes],
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, tasks))
    else:
        results = [run_trial(task) for task in tasks]

    for vi, trial, values in results:
        for si, (objective, ok) in enumerate(values):
            objectives[vi, si, trial] = objective
            converged[vi, si, trial] = ok

    result = SweepResult(spec=spec, generator=generator, objectives=objectives, converged=converged)
    missing = int(result.nonconverged_counts().sum())
    if missing:
        logger.warning("%d scheme runs did not converge", missing)
    return result


def load_sweep_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> SweepConfig:
    """Load a sweep configuration, merging ``overrides`` over the file contents.

    Raises:
        InputError: If the file is missing, malformed or fails validation.
    """
    data = load_json(path)
    if overrides:
        data = dict_deep_update(data, overrides, inplace=False)
    with handle_input_errors(str(path)):
        return SweepConfig.model_validate(data)
