"""Core solver, oracles and benchmark schemes."""
from typing import Any, Dict, Iterable, Optional, Tuple

import attr

from ehmec.config import Settings
from ehmec.core.baselines import SCHEME_MODES, SchemeId, SchemeOutcome, run_scheme
from ehmec.core.dual_solver import SolveOptions, SolveReport, solve
from ehmec.core.model import Instance
from ehmec.core.oracle import OracleMethod, ValidationOutcome, validate


@attr.s
class SolverClient:
    """Solver entry points bound to one set of :class:`Settings`.

    Keyword overrides given to each method win over the settings; ``None``
    values are ignored so CLI options can be passed through unchanged.
    """

    settings: Settings = attr.ib(factory=Settings)

    def options(self, **overrides: Any) -> SolveOptions:
        """Solver options from the settings plus ``overrides``."""
        return SolveOptions.from_settings(self.settings, **overrides)

    def solve(self, instance: Instance, **overrides: Any) -> SolveReport:
        """Run the proposed scheme."""
        return solve(instance, self.options(**overrides))

    def run_scheme(self, instance: Instance, scheme: SchemeId, **overrides: Any) -> SchemeOutcome:
        """Run any scheme with this client's solver options."""
        return run_scheme(instance, scheme, self.options(**overrides))

    def compare(
        self,
        instance: Instance,
        schemes: Optional[Iterable[SchemeId]] = None,
        **overrides: Any,
    ) -> Dict[SchemeId, SchemeOutcome]:
        """Run several schemes on the same instance."""
        chosen = list(schemes) if schemes is not None else list(SchemeId)
        options = self.options(**overrides)
        return {scheme: run_scheme(instance, scheme, options) for scheme in chosen}

    def validate(
        self,
        instance: Instance,
        method: Optional[OracleMethod] = None,
        tol: float = 5e-3,
        scheme: SchemeId = SchemeId.PROPOSED,
        grid_points: Optional[int] = None,
        **overrides: Any,
    ) -> Tuple[SchemeOutcome, ValidationOutcome]:
        """Solve ``instance`` and check the result against an oracle.

        ``grid_points`` overrides the grid oracle resolution from the settings.
        """
        outcome = self.run_scheme(instance, scheme, **overrides)
        if outcome.report is None:
            raise ValueError(f"scheme {scheme.value} has no dual certificate to validate")
        modes = SCHEME_MODES[scheme]
        check = validate(
            instance,
            outcome.allocation,
            outcome.report.dual.multipliers,
            solver_objective=outcome.objective,
            gap=outcome.report.relative_gap,
            converged=outcome.converged,
            method=method,
            tol=tol,
            modes=modes,
            grid_points=grid_points or self.settings.grid_points,
            grid_rounds=self.settings.grid_rounds,
            grid_refine=self.settings.grid_refine,
            pg_max_iters=self.settings.pg_max_iters,
        )
        return outcome, check

    @classmethod
    def create(cls, settings: Optional[Settings] = None) -> "SolverClient":
        """Factory mirroring the CLI's construction path."""
        return cls(settings=settings or Settings())


__all__ = ["SolverClient"]
