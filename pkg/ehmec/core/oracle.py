"""Reference solvers and optimality checks that do not share code with the dual solver.

Everything here is built on :mod:`ehmec.core.model` alone: the grid search
enumerates allocations directly, the projected-gradient oracle works on
cumulative energy spending, and the KKT check evaluates derivatives of the
energy functions from scratch.
"""

import logging
from enum import Enum
from typing import List, Optional, Tuple

import attr
import numpy as np

from ehmec.core.model import (
    DEFAULT_FEASIBILITY_TOL,
    LN2,
    Allocation,
    Instance,
    Modes,
    UserProblem,
    causality_slack,
    weighted_rate,
)
from ehmec.errors import DimensionTooLargeError, InvalidDualError, ShapeMismatchError

logger = logging.getLogger(__name__)

MAX_GRID_PAIRS = 4
MAX_GRID_EVALUATIONS = 2_000_000
_BISECTION_STEPS = 60
_ARMIJO = 1e-4


class OracleMethod(str, Enum):
    """Reference methods available to :func:`validate`."""

    GRID = "grid"
    PROJECTED_GRADIENT = "projected_gradient"


@attr.s(frozen=True, eq=False)
class OracleResult:
    """Best allocation found by a reference method."""

    allocation: Allocation = attr.ib()
    objective: float = attr.ib()
    method: OracleMethod = attr.ib()
    evaluations: int = attr.ib(default=0)
    iterations: int = attr.ib(default=0)


# Grid search


def _grid_axes(user: UserProblem, modes: Modes) -> List[Tuple[int, str, float]]:
    available = user.available
    axes = []
    for n in range(user.num_slots):
        if modes.uses_local:
            axes.append((n, "local", float(user.local_bits(available[n]))))
        if modes.uses_offload:
            axes.append((n, "offload", float(user.slot_offload_bits(n, available[n]))))
    return axes


def _best_grid_point(
    user: UserProblem,
    axes: List[Tuple[int, str, float]],
    values: List[np.ndarray],
    tol: float,
) -> Tuple[Tuple[int, ...], float]:
    dims = len(axes)
    grids = []
    for i, v in enumerate(values):
        shape = [1] * dims
        shape[i] = -1
        grids.append(v.reshape(shape))

    available = user.available
    spent: np.ndarray = np.zeros([1] * dims)
    feasible = np.ones([1] * dims, dtype=bool)
    for n in range(user.num_slots):
        for i, (slot, kind, _) in enumerate(axes):
            if slot != n:
                continue
            if kind == "local":
                spent = spent + user.local_energy(grids[i])
            else:
                spent = spent + user.slot_offload_energy(n, grids[i])
        feasible = feasible & (spent <= available[n] + tol)

    total = sum(grids)
    objective = np.where(feasible, total, -np.inf)
    flat = int(np.argmax(objective))
    index = tuple(int(i) for i in np.unravel_index(flat, objective.shape))
    return index, float(objective.flat[flat])


def _grid_user(
    user: UserProblem,
    points_per_axis: int,
    rounds: int,
    refine_factor: int,
    modes: Modes,
    tol: float,
) -> Tuple[np.ndarray, np.ndarray, int]:
    n = user.num_slots
    loc, off = np.zeros(n), np.zeros(n)
    if user.total_energy <= 0.0:
        return loc, off, 0

    axes = _grid_axes(user, modes)
    dims = len(axes)
    points = max(2, min(points_per_axis, int(MAX_GRID_EVALUATIONS ** (1.0 / dims))))
    upper = np.array([cap for _, _, cap in axes])
    lo, hi = np.zeros(dims), upper.copy()
    best = np.zeros(dims)
    evaluations = 0
    for _ in range(rounds):
        values = [np.linspace(lo[i], hi[i], points) for i in range(dims)]
        index, _ = _best_grid_point(user, axes, values, tol)
        evaluations += points**dims
        best = np.array([values[i][index[i]] for i in range(dims)])
        half = (hi - lo) / (2.0 * refine_factor)
        lo = np.maximum(best - half, 0.0)
        hi = np.minimum(best + half, upper)

    for (slot, kind, _), bits in zip(axes, best):
        if kind == "local":
            loc[slot] = bits
        else:
            off[slot] = bits
    return loc, off, evaluations


def grid_search(
    instance: Instance,
    points_per_axis: int = 25,
    rounds: int = 3,
    refine_factor: int = 4,
    modes: Modes = Modes.BOTH,
    tol: float = DEFAULT_FEASIBILITY_TOL,
    max_pairs: int = MAX_GRID_PAIRS,
) -> OracleResult:
    """Exhaustive grid search with successive refinement around the incumbent.

    Each user is searched on its own. Axis ``n`` of a mode spans the bits that
    all energy available by slot ``n`` could buy in that mode. After every
    round the box shrinks by ``refine_factor`` around the best feasible point.
    Axes shrink below ``points_per_axis`` when the full grid would exceed
    ``MAX_GRID_EVALUATIONS`` points.

    Raises:
        DimensionTooLargeError: When ``K * N`` exceeds ``max_pairs``.
    """
    k, n = instance.shape
    if k * n > max_pairs:
        raise DimensionTooLargeError(f"grid search supports at most {max_pairs} user-slot pairs, got {k * n}")

    rows = []
    evaluations = 0
    for user in instance.users():
        loc, off, evals = _grid_user(user, points_per_axis, rounds, refine_factor, modes, tol)
        rows.append((loc, off))
        evaluations += evals
    allocation = Allocation.stack(rows)
    return OracleResult(
        allocation=allocation,
        objective=weighted_rate(allocation, instance.config.weights),
        method=OracleMethod.GRID,
        evaluations=evaluations,
        iterations=rounds,
    )


# Projected gradient on cumulative spending


class _SlotSplitter:
    """Best local/offload split of a given slot energy, vectorized over slots."""

    def __init__(self, user: UserProblem, modes: Modes):
        self.user = user
        self.modes = modes
        tau = user.slot_seconds
        self._loc_scale = (tau**2 / (user.capacitance * user.cycles_per_bit**3)) ** (1.0 / 3.0) / 3.0
        self._off_scale = tau * user.bandwidth / LN2
        self._noise_tau = user.noise_power * tau

    def local_marginal(self, energy: np.ndarray) -> np.ndarray:
        """d(local bits)/d(energy)."""
        return self._loc_scale * energy ** (-2.0 / 3.0)

    def offload_marginal(self, energy: np.ndarray) -> np.ndarray:
        """d(offloaded bits)/d(energy)."""
        h = self.user.gain
        return self._off_scale * h / (self._noise_tau + energy * h)

    def split(self, energy: np.ndarray, floor: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return local bits, offloaded bits and the marginal rate per slot."""
        user = self.user
        x = np.maximum(energy, 0.0)
        xf = np.maximum(x, floor)
        if not self.modes.uses_offload:
            return user.local_bits(x), np.zeros_like(x), self.local_marginal(xf)
        if not self.modes.uses_local:
            return np.zeros_like(x), user.offload_bits(x), self.offload_marginal(xf)

        all_local = self.local_marginal(xf) >= self.offload_marginal(np.zeros_like(xf))
        lo, hi = np.zeros_like(xf), np.ones_like(xf)
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            more_local = self.local_marginal(mid * xf) > self.offload_marginal((1.0 - mid) * xf)
            lo = np.where(more_local, mid, lo)
            hi = np.where(more_local, hi, mid)
        theta = np.where(all_local, 1.0, 0.5 * (lo + hi))
        marginal = self.local_marginal(theta * xf)
        return user.local_bits(theta * x), user.offload_bits((1.0 - theta) * x), marginal


def _capped_isotonic(z: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``z`` onto ``0 <= S_1 <= ... <= S_N``, ``S_n <= upper_n``.

    ``upper`` must be non-decreasing. Adjacent violators are pooled and each
    pool takes its mean clipped to ``[0, upper[start]]``, the tightest cap of
    the pool.
    """
    starts: List[int] = []
    sums: List[float] = []
    counts: List[int] = []
    values: List[float] = []
    for n, zn in enumerate(z):
        start, total, count = n, float(zn), 1
        value = min(max(total, 0.0), float(upper[n]))
        while values and values[-1] > value:
            values.pop()
            start = starts.pop()
            total += sums.pop()
            count += counts.pop()
            value = min(max(total / count, 0.0), float(upper[start]))
        starts.append(start)
        sums.append(total)
        counts.append(count)
        values.append(value)
    return np.repeat(values, counts)


def _pg_user(user: UserProblem, max_iters: int, tol: float, modes: Modes) -> Tuple[np.ndarray, np.ndarray, int]:
    n = user.num_slots
    available = user.available
    total = user.total_energy
    if total <= 0.0:
        return np.zeros(n), np.zeros(n), 0

    splitter = _SlotSplitter(user, modes)
    floor = 1e-12 * total

    def project(z: np.ndarray) -> np.ndarray:
        return _capped_isotonic(z, available)

    def evaluate(spend: np.ndarray) -> Tuple[float, np.ndarray]:
        loc, off, marginal = splitter.split(np.diff(spend, prepend=0.0), floor)
        nxt = np.append(marginal[1:], 0.0)
        return user.weight * float(np.sum(loc) + np.sum(off)), user.weight * (marginal - nxt)

    spend = available.copy()
    value, grad = evaluate(spend)
    step = 0.1 * total / max(float(np.max(np.abs(grad))), 1e-300)
    quiet = 0
    iterations = 0
    for iterations in range(1, max_iters + 1):
        trial = 2.0 * step
        for _ in range(60):
            candidate = project(spend + trial * grad)
            candidate_value, candidate_grad = evaluate(candidate)
            if candidate_value >= value + _ARMIJO * float(grad @ (candidate - spend)):
                break
            trial *= 0.5
        else:
            break
        improvement = candidate_value - value
        spend, value, grad, step = candidate, candidate_value, candidate_grad, trial
        quiet = quiet + 1 if improvement <= tol * abs(value) else 0
        if quiet >= 5:
            break

    loc, off, _ = splitter.split(np.diff(spend, prepend=0.0), floor)
    return loc, off, iterations


def projected_gradient(
    instance: Instance,
    max_iters: int = 2000,
    tol: float = 1e-12,
    modes: Modes = Modes.BOTH,
) -> OracleResult:
    """Maximize the objective over cumulative spending ``S_1 <= ... <= S_N``.

    ``S`` is projected onto monotone sequences bounded by the available
    energy (pooled adjacent violators with capped pool values), steps use Armijo
    backtracking, and every slot's energy is split between local computing
    and offloading where their marginal rates meet.
    """
    rows = []
    total_iterations = 0
    for user in instance.users():
        loc, off, iterations = _pg_user(user, max_iters, tol, modes)
        rows.append((loc, off))
        total_iterations = max(total_iterations, iterations)
    allocation = Allocation.stack(rows)
    return OracleResult(
        allocation=allocation,
        objective=weighted_rate(allocation, instance.config.weights),
        method=OracleMethod.PROJECTED_GRADIENT,
        iterations=total_iterations,
    )


# Optimality certificates


def _check_multipliers(instance: Instance, multipliers: np.ndarray) -> np.ndarray:
    mu = np.asarray(multipliers, dtype=float)
    if mu.shape != instance.shape:
        raise ShapeMismatchError(f"multipliers shape {mu.shape} does not match instance {instance.shape}")
    if np.any(np.isnan(mu)) or np.any(mu < 0):
        raise InvalidDualError("multipliers must be non-negative numbers")
    return mu


def lagrangian_direct(instance: Instance, allocation: Allocation, multipliers: np.ndarray) -> float:
    """Lagrangian value evaluated term by term.

    ``sum_k w_k sum_n bits - sum_k sum_n mu_kn * (energy spent by n - energy available by n)``.

    Raises:
        InvalidDualError: If a multiplier is infinite, NaN or negative.
    """
    mu = _check_multipliers(instance, multipliers)
    if not np.all(np.isfinite(mu)):
        raise InvalidDualError("direct evaluation needs finite multipliers")
    spent = np.cumsum(allocation.slot_energy(instance), axis=1)
    overspend = spent - instance.available_energy()
    return weighted_rate(allocation, instance.config.weights) - float(np.sum(mu * overspend))


def _stationarity(marginal_cost: np.ndarray, bits: np.ndarray, prices: np.ndarray, weights: np.ndarray) -> np.ndarray:
    finite = np.isfinite(prices)
    with np.errstate(invalid="ignore", over="ignore"):
        ratio = np.where(finite, prices * marginal_cost / weights, 0.0)
    interior = np.abs(1.0 - ratio)
    boundary = np.maximum(0.0, 1.0 - ratio)
    residual = np.where(bits > 0, interior, boundary)
    return np.where(finite, residual, np.where(bits > 0, 1.0, 0.0))


def kkt_residual(
    instance: Instance,
    allocation: Allocation,
    multipliers: np.ndarray,
    modes: Modes = Modes.BOTH,
    tol: float = DEFAULT_FEASIBILITY_TOL,
) -> float:
    """Largest violation of the optimality conditions at ``(allocation, mu)``.

    Stationarity is measured relative to the weight, complementary slackness
    relative to ``max(1, objective)`` and primal infeasibility relative to the
    user's total energy. Zero means every condition holds exactly. Modes the
    scheme does not use are left out of the stationarity check.
    """
    allocation.check_shape(instance)
    mu = _check_multipliers(instance, multipliers)
    prices = np.flip(np.cumsum(np.flip(mu, axis=1), axis=1), axis=1)

    cfg = instance.config
    tau = cfg.slot_seconds
    weights = cfg.weight_array[:, None]
    residuals = [0.0]

    if modes.uses_local:
        coef = (cfg.capacitance_array * cfg.cycles_array**3)[:, None]
        ell = allocation.local_bits
        cost = 3.0 * coef * ell**2 / tau**2
        residuals.append(float(np.max(_stationarity(cost, ell, prices, weights))))
    if modes.uses_offload:
        ell = allocation.offload_bits
        h = instance.channel_gain
        cost = cfg.noise_power * LN2 / (h * cfg.bandwidth) * np.exp2(ell / (tau * cfg.bandwidth))
        residuals.append(float(np.max(_stationarity(cost, ell, prices, weights))))

    slack = causality_slack(instance, allocation, tol).slack
    scale = max(1.0, weighted_rate(allocation, cfg.weights))
    finite = np.isfinite(mu)
    with np.errstate(invalid="ignore"):
        complementary = np.where(finite, np.abs(mu * slack) / scale, np.where(np.abs(slack) > tol, 1.0, 0.0))
    residuals.append(float(np.max(complementary)))

    totals = np.maximum(instance.available_energy()[:, -1:], 1e-300)
    residuals.append(float(np.max(np.maximum(0.0, -slack - tol) / totals)))
    return max(residuals)


@attr.s(frozen=True, eq=False)
class ValidationOutcome:
    """Agreement between a solver report and an oracle."""

    method: OracleMethod = attr.ib()
    solver_objective: float = attr.ib()
    oracle_objective: float = attr.ib()
    agreement: float = attr.ib()
    kkt: float = attr.ib()
    gap: float = attr.ib()
    converged: bool = attr.ib()
    tolerance: float = attr.ib()
    kkt_tolerance: float = attr.ib(default=1e-3)
    gap_tolerance: float = attr.ib(default=1e-3)

    @property
    def passed(self) -> bool:
        """True when the solver converged and every check is within tolerance."""
        return (
            self.converged
            and self.agreement <= self.tolerance
            and self.kkt <= self.kkt_tolerance
            and self.gap <= self.gap_tolerance
        )

    def to_dict(self) -> dict:
        """JSON-friendly summary."""
        return {
            "method": self.method.value,
            "solver_objective": self.solver_objective,
            "oracle_objective": self.oracle_objective,
            "agreement": self.agreement,
            "kkt_residual": self.kkt,
            "relative_gap": self.gap,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def choose_method(instance: Instance, max_pairs: int = MAX_GRID_PAIRS) -> OracleMethod:
    """Grid search for tiny instances, projected gradient otherwise."""
    k, n = instance.shape
    if k * n <= max_pairs:
        return OracleMethod.GRID
    logger.info("K*N=%d exceeds the grid limit of %d, using projected gradient", k * n, max_pairs)
    return OracleMethod.PROJECTED_GRADIENT


def run_oracle(
    instance: Instance,
    method: OracleMethod,
    modes: Modes = Modes.BOTH,
    grid_points: int = 25,
    grid_rounds: int = 3,
    grid_refine: int = 4,
    pg_max_iters: int = 2000,
) -> OracleResult:
    """Dispatch to :func:`grid_search` or :func:`projected_gradient`."""
    if method is OracleMethod.GRID:
        return grid_search(instance, grid_points, grid_rounds, grid_refine, modes=modes)
    return projected_gradient(instance, max_iters=pg_max_iters, modes=modes)


def compare(
    solver_objective: float,
    oracle: OracleResult,
) -> float:
    """Relative disagreement ``|solver - oracle| / max(1, |solver|)``."""
    return abs(solver_objective - oracle.objective) / max(1.0, abs(solver_objective))


def validate(
    instance: Instance,
    allocation: Allocation,
    multipliers: np.ndarray,
    solver_objective: float,
    gap: float,
    converged: bool,
    method: Optional[OracleMethod] = None,
    tol: float = 5e-3,
    modes: Modes = Modes.BOTH,
    **oracle_options: int,
) -> ValidationOutcome:
    """Check a solver result against an oracle and the optimality conditions."""
    chosen = method or choose_method(instance)
    oracle = run_oracle(instance, chosen, modes=modes, **oracle_options)
    outcome = ValidationOutcome(
        method=chosen,
        solver_objective=solver_objective,
        oracle_objective=oracle.objective,
        agreement=compare(solver_objective, oracle),
        kkt=kkt_residual(instance, allocation, multipliers, modes=modes),
        gap=gap,
        converged=converged,
        tolerance=tol,
    )
    logger.info(
        "Validation with %s: solver=%.6g oracle=%.6g agreement=%.3g kkt=%.3g passed=%s",
        chosen.value,
        outcome.solver_objective,
        outcome.oracle_objective,
        outcome.agreement,
        outcome.kkt,
        outcome.passed,
    )
    return outcome
