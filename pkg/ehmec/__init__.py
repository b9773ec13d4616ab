"""Offline weighted computation-rate maximization for energy-harvesting MEC."""
from typing import Any, Dict, Iterable, Optional, Tuple

from ehmec.config import Settings
from ehmec.core import SolverClient
from ehmec.core.baselines import SchemeId, SchemeOutcome
from ehmec.core.dual_solver import SolveReport
from ehmec.core.model import Instance
from ehmec.core.oracle import OracleMethod, ValidationOutcome
from ehmec.experiments.generation import GenParams, generate_instance
from ehmec.experiments.sweep import SweepResult, SweepSpec, run_sweep
from ehmec.version import __version__


class RateMaximizer:
    """Library entry point bundling settings, the solver and the experiments."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings()
        self.client = SolverClient.create(self.settings)

    def solve(self, instance: Instance, **overrides: Any) -> SolveReport:
        return self.client.solve(instance, **overrides)

    def run_scheme(self, instance: Instance, scheme: SchemeId, **overrides: Any) -> SchemeOutcome:
        return self.client.run_scheme(instance, scheme, **overrides)

    def compare(
        self,
        instance: Instance,
        schemes: Optional[Iterable[SchemeId]] = None,
        **overrides: Any,
    ) -> Dict[SchemeId, SchemeOutcome]:
        return self.client.compare(instance, schemes, **overrides)

    def validate(
        self,
        instance: Instance,
        method: Optional[OracleMethod] = None,
        tol: float = 5e-3,
        scheme: SchemeId = SchemeId.PROPOSED,
        grid_points: Optional[int] = None,
        **overrides: Any,
    ) -> Tuple[SchemeOutcome, ValidationOutcome]:
        return self.client.validate(
            instance, method=method, tol=tol, scheme=scheme, grid_points=grid_points, **overrides
        )

    def generate(
        self,
        num_users: int,
        num_slots: int,
        slot_seconds: Optional[float] = None,
        params: Optional[GenParams] = None,
    ) -> Instance:
        params = params or GenParams(seed=self.settings.seed)
        return generate_instance(params, num_users, num_slots, slot_seconds)

    def sweep(self, spec: SweepSpec, generator: Optional[GenParams] = None) -> SweepResult:
        generator = generator or GenParams(seed=self.settings.seed)
        return run_sweep(spec, generator, self.client.options(), workers=self.settings.workers)


__all__ = ["RateMaximizer", "Settings", "__version__"]
