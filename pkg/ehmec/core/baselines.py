"""Benchmark schemes compared against the proposed allocation."""

import logging
from enum import Enum
from typing import Any, Dict, Optional

import attr

from ehmec.core.dual_solver import SolveOptions, SolveReport, solve
from ehmec.core.model import (
    Allocation,
    Instance,
    Modes,
    local_bits_from_energy,
    offload_bits_from_energy,
    weighted_rate,
)

logger = logging.getLogger(__name__)


class SchemeId(str, Enum):
    """Allocation schemes known to the experiments and the CLI."""

    PROPOSED = "proposed"
    EQUAL_ENERGY = "equal_energy"
    LOCAL_ONLY = "local_only"
    FULL_OFFLOAD = "full_offload"


def equal_energy(instance: Instance) -> Allocation:
    """Spend what arrives at each slot in that slot, half locally and half offloaded.

    Energy arriving at slot ``n`` is ``E_k0`` for the first slot and the
    harvest ``E_k(n-1)`` afterwards, so causality holds by construction.
    """
    cfg = instance.config
    half = instance.arrivals() / 2.0
    local = local_bits_from_energy(
        half, cfg.capacitance_array[:, None], cfg.cycles_array[:, None], cfg.slot_seconds
    )
    offload = offload_bits_from_energy(
        half, instance.channel_gain, cfg.slot_seconds, cfg.bandwidth, cfg.noise_power
    )
    return Allocation(local, offload)


def _restricted(instance: Instance, options: Optional[SolveOptions], modes: Modes) -> SolveReport:
    base = options or SolveOptions()
    return solve(instance, base.model_copy(update={"modes": modes}))


def local_only(instance: Instance, options: Optional[SolveOptions] = None) -> SolveReport:
    """Optimal allocation when offloading is disabled.

    Returns the restricted solver report so its convergence flag travels with
    the allocation.
    """
    return _restricted(instance, options, Modes.LOCAL)


def full_offload(instance: Instance, options: Optional[SolveOptions] = None) -> SolveReport:
    """Optimal allocation when local computing is disabled."""
    return _restricted(instance, options, Modes.OFFLOAD)


@attr.s(frozen=True, eq=False)
class SchemeOutcome:
    """Objective and allocation produced by one scheme on one instance."""

    scheme: SchemeId = attr.ib()
    allocation: Allocation = attr.ib()
    objective: float = attr.ib()
    converged: bool = attr.ib()
    report: Optional[SolveReport] = attr.ib(default=None)

    def to_dict(self, verbose: bool = False) -> Dict[str, Any]:
        """JSON-friendly outcome; solver schemes embed their report."""
        if self.report is not None:
            out = self.report.to_dict(verbose=verbose)
        else:
            out = {"objective": self.objective, "allocation": self.allocation.to_dict()}
        out["scheme"] = self.scheme.value
        out["converged"] = self.converged
        return out


SCHEME_MODES = {
    SchemeId.PROPOSED: Modes.BOTH,
    SchemeId.LOCAL_ONLY: Modes.LOCAL,
    SchemeId.FULL_OFFLOAD: Modes.OFFLOAD,
}


def run_scheme(instance: Instance, scheme: SchemeId, options: Optional[SolveOptions] = None) -> SchemeOutcome:
    """Run ``scheme`` on ``instance``."""
    scheme = SchemeId(scheme)
    if scheme is SchemeId.EQUAL_ENERGY:
        allocation = equal_energy(instance)
        return SchemeOutcome(
            scheme=scheme,
            allocation=allocation,
            objective=weighted_rate(allocation, instance.config.weights),
            converged=True,
        )
    report = _restricted(instance, options, SCHEME_MODES[scheme])
    if not report.converged:
        logger.warning("%s did not converge within %d iterations", scheme.value, report.iterations)
    return SchemeOutcome(
        scheme=scheme,
        allocation=report.allocation,
        objective=report.primal_value,
        converged=report.converged,
        report=report,
    )
