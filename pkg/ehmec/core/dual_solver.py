"""Lagrangian dual solver for offline weighted computation-rate maximization.

The causality constraints of different users never interact, so every user
is solved on its own. Per user the dual is written over the tail sums
``M_n = mu_n + ... + mu_N`` of the multipliers: for a fixed price ``M_n`` the
best local and offloaded bits of slot ``n`` have a closed form, and the dual
value splits into one convex term per slot plus ``M_n`` times the energy that
arrives at slot ``n``.

The solver runs a projected subgradient method on the multipliers and then
polishes the best dual point exactly by pooling adjacent slots whose prices
violate the required ordering ``M_1 >= M_2 >= ... >= M_N``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence

import attr
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from scipy.optimize import brentq

from ehmec.config import Settings
from ehmec.core.model import (
    DEFAULT_FEASIBILITY_TOL,
    LN2,
    Allocation,
    FeasibilityReport,
    Instance,
    Modes,
    UserProblem,
    _local_energy,
    _offload_energy,
    causality_slack,
    weighted_rate,
)
from ehmec.errors import ConfigError, InvalidDualError, ShapeMismatchError

logger = logging.getLogger(__name__)

_EPS = float(np.finfo(float).eps)
_EXPAND = math.log(4.0)
_MAX_EXPANSIONS = 2000


class StepRule(str, Enum):
    """Step-size schedules for the multiplier update."""

    DIMINISHING = "diminishing"
    CONSTANT = "constant"
    POLYAK = "polyak"


class SolveOptions(BaseModel):
    """Tunable parameters of :func:`solve`.

    ``eta0`` multiplies a per-user price scale (the uniform price that spends
    all of the user's energy divided by that energy) unless ``scale_steps`` is
    off. ``user_eta0`` replaces ``eta0`` user by user.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    eps: float = Field(1e-6, gt=0)
    max_iters: int = Field(100_000, ge=1)
    step_rule: StepRule = StepRule.DIMINISHING
    eta0: float = Field(1.0, gt=0)
    user_eta0: Optional[List[float]] = None
    scale_steps: bool = True
    floor_scale: float = Field(1e-3, gt=0)
    check_every: int = Field(10, ge=1)
    gap_exit: float = Field(1e-4, gt=0)
    gap_tol: float = Field(1e-3, gt=0)
    stall_tol: float = Field(1e-3, gt=0)
    polish: bool = True
    feasibility_tol: float = Field(DEFAULT_FEASIBILITY_TOL, gt=0)
    modes: Modes = Modes.BOTH
    workers: int = Field(1, ge=1)

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None, **overrides: Any) -> "SolveOptions":
        """Build options from :class:`Settings`, then apply non-None overrides.

        Raises:
            ConfigError: If the merged options do not validate.
        """
        s = settings or Settings()
        values: Dict[str, Any] = {
            "eps": s.eps,
            "max_iters": s.max_iters,
            "step_rule": s.step_rule,
            "eta0": s.eta0,
            "scale_steps": s.scale_steps,
            "floor_scale": s.floor_scale,
            "check_every": s.check_every,
            "gap_exit": s.gap_exit,
            "gap_tol": s.gap_tol,
            "polish": s.polish,
            "feasibility_tol": s.feasibility_tol,
            "workers": s.workers,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigError(f"Invalid solver options: {e}") from e


def _tail_sums(mu: np.ndarray) -> np.ndarray:
    return np.flip(np.cumsum(np.flip(mu, axis=-1), axis=-1), axis=-1)


def _multipliers(tail: np.ndarray) -> np.ndarray:
    nxt = np.zeros_like(tail)
    nxt[..., :-1] = tail[..., 1:]
    with np.errstate(invalid="ignore"):
        mu = tail - nxt
    mu[np.isinf(tail) & np.isinf(nxt)] = 0.0
    return mu


@attr.s(frozen=True, eq=False)
class DualState:
    """Multipliers of the causality constraints and their tail sums.

    An infinite multiplier prices a slot whose energy is exhausted before any
    arrives; the allocation it induces is zero.
    """

    multipliers: np.ndarray = attr.ib()
    tail_sums: np.ndarray = attr.ib()

    @classmethod
    def from_multipliers(cls, multipliers: Any) -> "DualState":
        """Build a dual point from ``mu``; tail sums are recomputed.

        Raises:
            InvalidDualError: On NaN or negative multipliers.
        """
        mu = np.array(multipliers, dtype=float)
        if mu.ndim != 2:
            raise ShapeMismatchError("multipliers must be 2-D (users x slots)")
        if np.any(np.isnan(mu)):
            raise InvalidDualError("multipliers contain NaN")
        if np.any(mu < 0):
            raise InvalidDualError("multipliers must be non-negative")
        return cls(multipliers=mu, tail_sums=_tail_sums(mu))

    @classmethod
    def from_tail_sums(cls, tail_sums: Any) -> "DualState":
        """Build a dual point from non-increasing tail sums.

        Raises:
            InvalidDualError: On NaN, negative or increasing tail sums.
        """
        tail = np.array(tail_sums, dtype=float)
        if tail.ndim != 2:
            raise ShapeMismatchError("tail sums must be 2-D (users x slots)")
        if np.any(np.isnan(tail)) or np.any(tail < 0):
            raise InvalidDualError("tail sums must be non-negative numbers")
        if np.any(tail[:, :-1] < tail[:, 1:]):
            raise InvalidDualError("tail sums must be non-increasing over slots")
        return cls(multipliers=_multipliers(tail), tail_sums=tail)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly form; infinite prices become ``None``."""
        return {
            "multipliers": _finite_or_none(self.multipliers),
            "tail_sums": _finite_or_none(self.tail_sums),
        }


def _finite_or_none(arr: np.ndarray) -> List[List[Optional[float]]]:
    return [[float(x) if math.isfinite(x) else None for x in row] for row in arr]


@attr.s(frozen=True, eq=False)
class SlotResponse:
    """Best per-slot reply to a vector of prices."""

    local_bits: np.ndarray = attr.ib()
    offload_bits: np.ndarray = attr.ib()
    energy: np.ndarray = attr.ib()
    value: np.ndarray = attr.ib()


def respond(user: UserProblem, prices: np.ndarray, modes: Modes = Modes.BOTH, gain: Optional[np.ndarray] = None) -> SlotResponse:
    """Maximize ``w * bits - M * energy`` slot by slot.

    ``value`` holds the maximized per-slot Lagrangian terms. Infinite prices
    yield zero bits, zero energy and a zero term.
    """
    h = user.gain if gain is None else gain
    w, tau = user.weight, user.slot_seconds
    coef = user.capacitance * user.cycles_per_bit**3
    zeros = np.zeros(np.broadcast(prices, h).shape)
    if modes.uses_local:
        ell_loc = np.sqrt(w * tau**2 / (3.0 * prices * coef))
        e_loc = _local_energy(ell_loc, user.capacitance, user.cycles_per_bit, tau)
        term_loc = (2.0 / 3.0) * w * ell_loc
    else:
        ell_loc, e_loc, term_loc = zeros, zeros, zeros
    if modes.uses_offload:
        bandwidth, noise = user.bandwidth, user.noise_power
        growth = np.maximum(w * bandwidth * h / (prices * noise * LN2), 1.0)
        ell_off = tau * bandwidth * np.log2(growth)
        e_off = noise * tau / h * (growth - 1.0)
        # M * e_off rewritten so an infinite price never multiplies a zero energy
        term_off = w * ell_off - np.maximum(0.0, w * bandwidth * tau / LN2 - prices * noise * tau / h)
    else:
        ell_off, e_off, term_off = zeros, zeros, zeros
    return SlotResponse(
        local_bits=ell_loc + zeros,
        offload_bits=ell_off + zeros,
        energy=e_loc + e_off,
        value=term_loc + term_off,
    )


def _price_weighted_arrivals(prices: np.ndarray, arrivals: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(prices, arrivals).shape)
    np.multiply(prices, arrivals, out=out, where=arrivals > 0)
    return out


def _user_dual_value(user: UserProblem, prices: np.ndarray, response: SlotResponse) -> float:
    return float(np.sum(response.value) + np.sum(_price_weighted_arrivals(prices, user.arrivals)))


def _check_dual(instance: Instance, dual: DualState) -> None:
    if dual.tail_sums.shape != instance.shape:
        raise ShapeMismatchError(f"dual shape {dual.tail_sums.shape} does not match instance {instance.shape}")
    if np.any(np.isnan(dual.tail_sums)) or np.any(np.isnan(dual.multipliers)):
        raise InvalidDualError("dual point contains NaN")
    if np.any(dual.multipliers < 0):
        raise InvalidDualError("multipliers must be non-negative")
    if np.any(dual.tail_sums <= 0):
        raise InvalidDualError("tail sums must be strictly positive")


def primal_from_dual(instance: Instance, dual: DualState, modes: Modes = Modes.BOTH) -> Allocation:
    """Allocation maximizing the Lagrangian at ``dual``.

    Raises:
        InvalidDualError: If a tail sum is zero, negative or NaN.
    """
    _check_dual(instance, dual)
    rows = []
    for user in instance.users():
        resp = respond(user, dual.tail_sums[user.index], modes)
        rows.append((resp.local_bits, resp.offload_bits))
    return Allocation.stack(rows)


def dual_function(instance: Instance, dual: DualState, modes: Modes = Modes.BOTH) -> float:
    """Dual value: the maximized Lagrangian at ``dual``."""
    _check_dual(instance, dual)
    total = 0.0
    for user in instance.users():
        prices = dual.tail_sums[user.index]
        total += _user_dual_value(user, prices, respond(user, prices, modes))
    return total


def dual_gradient(instance: Instance, dual: DualState, modes: Modes = Modes.BOTH) -> np.ndarray:
    """Subgradient of the dual: causality slack of the Lagrangian maximizer."""
    _check_dual(instance, dual)
    grads = []
    for user in instance.users():
        resp = respond(user, dual.tail_sums[user.index], modes)
        grads.append(user.available - np.cumsum(resp.energy))
    return np.vstack(grads)


def _largest_scale(energy_at: Callable[[float], float], budget: float) -> float:
    """Largest factor in [0, 1] whose scaled slot energy fits in ``budget``."""
    if budget <= 0.0:
        return 0.0
    theta = float(brentq(lambda t: energy_at(t) - budget, 0.0, 1.0, xtol=1e-15, rtol=4 * _EPS))
    for _ in range(64):
        if energy_at(theta) <= budget:
            return theta
        theta *= 1.0 - 1e-12
    return 0.0


def _repair_row(user: UserProblem, local_bits: np.ndarray, offload_bits: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    loc = np.array(local_bits, dtype=float)
    off = np.array(offload_bits, dtype=float)
    available = user.available
    tau = user.slot_seconds

    def slot_energy(n: int, theta: float) -> float:
        e_loc = _local_energy(theta * loc[n], user.capacitance, user.cycles_per_bit, tau)
        e_off = _offload_energy(theta * off[n], user.gain[n], tau, user.bandwidth, user.noise_power)
        return float(e_loc + e_off)

    spent = 0.0
    for n in range(user.num_slots):
        energy = slot_energy(n, 1.0)
        if spent + energy - available[n] > tol:
            theta = _largest_scale(lambda t, n=n: slot_energy(n, t), available[n] - spent)
            loc[n] *= theta
            off[n] *= theta
            energy = slot_energy(n, 1.0)
        spent += energy
    return loc, off


def feasibility_repair(instance: Instance, allocation: Allocation, tol: float = DEFAULT_FEASIBILITY_TOL) -> Allocation:
    """Scale down overspending slots, earliest first, until causality holds.

    Each violating slot keeps its local/offload proportion and is scaled by
    the largest common factor that fits its remaining budget. Feasible input
    is returned unchanged.
    """
    allocation.check_shape(instance)
    rows = [
        _repair_row(user, allocation.local_bits[user.index], allocation.offload_bits[user.index], tol)
        for user in instance.users()
    ]
    return Allocation.stack(rows)


@attr.s(frozen=True, eq=False)
class UserSolution:
    """Outcome of solving one user's sub-problem."""

    local_bits: np.ndarray = attr.ib()
    offload_bits: np.ndarray = attr.ib()
    tail_sums: np.ndarray = attr.ib()
    dual_value: float = attr.ib()
    trace: List[float] = attr.ib()
    iterations: int = attr.ib()
    converged: bool = attr.ib()
    polished: bool = attr.ib()


class UserSolver:
    """Dual subgradient method plus exact price polishing for one user."""

    def __init__(self, user: UserProblem, options: SolveOptions, eta0: float):
        self.user = user
        self.options = options
        self.eta0 = eta0
        self.modes = options.modes

    def respond(self, prices: np.ndarray, gain: Optional[np.ndarray] = None) -> SlotResponse:
        """Per-slot reply of this user."""
        return respond(self.user, prices, self.modes, gain)

    def dual_value(self, prices: np.ndarray, response: Optional[SlotResponse] = None) -> float:
        """Dual function of this user at tail sums ``prices``."""
        resp = response if response is not None else self.respond(prices)
        return _user_dual_value(self.user, prices, resp)

    def _price_guess(self, share: float, gain: np.ndarray) -> float:
        u = self.user
        tau = u.slot_seconds
        if self.modes.uses_local:
            coef = u.capacitance * u.cycles_per_bit**3
            ell = math.cbrt(share * tau**2 / coef)
            return u.weight * tau**2 / (3.0 * coef * ell**2)
        h = float(np.mean(gain))
        return u.weight * u.bandwidth * h / (u.noise_power * LN2 * (1.0 + share * h / (u.noise_power * tau)))

    def price_for_energy(self, target: float, gain: np.ndarray, offsets: Optional[np.ndarray] = None) -> float:
        """Price ``M`` at which slots with ``gain`` spend ``target`` joules in total.

        ``offsets`` are added to ``M`` slot by slot. The search brackets the
        root in log-price and refines it with Brent's method.
        """
        shift = np.zeros_like(gain) if offsets is None else offsets

        def excess(log_price: float) -> float:
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                spent = float(np.sum(self.respond(math.exp(log_price) + shift, gain).energy))
            return spent / target - 1.0

        u0 = math.log(self._price_guess(target / gain.shape[0], gain))
        f0 = excess(u0)
        if f0 == 0.0:
            return math.exp(u0)
        lo, hi = u0, u0
        for _ in range(_MAX_EXPANSIONS):
            if f0 > 0.0:
                lo, hi = hi, hi + _EXPAND
                if excess(hi) <= 0.0:
                    break
            else:
                lo, hi = lo - _EXPAND, lo
                if excess(lo) >= 0.0:
                    break
        else:
            raise RuntimeError("could not bracket the price for the requested energy")
        return math.exp(brentq(excess, lo, hi, xtol=1e-15, rtol=4 * _EPS))

    def pool_price(self, start: int, stop: int) -> float:
        """Price at which slots ``start:stop`` spend exactly what arrives in them."""
        target = float(np.sum(self.user.arrivals[start:stop]))
        if target <= 0.0:
            return math.inf
        return self.price_for_energy(target, self.user.gain[start:stop])

    def pooled_prices(self) -> np.ndarray:
        """Exact dual minimizer by pooling adjacent violators.

        Each pool spends exactly the energy that arrives within it and prices
        are non-increasing across pools.
        """
        pools: List[tuple[int, int, float]] = []
        for n in range(self.user.num_slots):
            start, stop, price = n, n + 1, self.pool_price(n, n + 1)
            while pools and pools[-1][2] < price:
                start = pools.pop()[0]
                price = self.pool_price(start, stop)
            pools.append((start, stop, price))
        tail = np.empty(self.user.num_slots)
        for start, stop, price in pools:
            tail[start:stop] = price
        return tail

    def _step_size(self, q: int, value: float, best_primal: float, grad: np.ndarray, scale: float) -> float:
        rule = self.options.step_rule
        if rule is StepRule.POLYAK:
            norm2 = float(grad @ grad)
            if norm2 == 0.0:
                return 0.0
            return max(value - best_primal, 0.0) / norm2
        eta = self.eta0 * scale
        if rule is StepRule.DIMINISHING:
            return eta / q
        return eta

    def _initial_multipliers(self) -> tuple[np.ndarray, float, float]:
        user, n = self.user, self.user.num_slots
        total = user.total_energy
        uniform = self.price_for_energy(total, user.gain)
        spread = 1e-3 * uniform / n
        offsets = spread * np.arange(n - 1, -1, -1, dtype=float)
        mu = np.full(n, spread)
        mu[-1] = self.price_for_energy(total, user.gain, offsets)
        floor = self.options.floor_scale * self.price_for_energy(total, user.gain[-1:])
        mu[-1] = max(mu[-1], floor)
        return mu, floor, uniform / total

    def _idle(self) -> UserSolution:
        n = self.user.num_slots
        return UserSolution(
            local_bits=np.zeros(n),
            offload_bits=np.zeros(n),
            tail_sums=np.full(n, math.inf),
            dual_value=0.0,
            trace=[0.0],
            iterations=0,
            converged=True,
            polished=False,
        )

    def solve(self) -> UserSolution:
        """Run the subgradient loop, polish the best point and repair the primal.

        The loop stops when the dual value stalls near its best value or when
        a checkpoint finds the gap below ``gap_exit``. Without polishing a
        stall only stops the loop once the gap is within ``gap_tol``. The
        result is converged only if the loop stopped on its own and the gap of
        the returned point is within ``gap_tol``.
        """
        user, opts = self.user, self.options
        if user.total_energy <= 0.0:
            return self._idle()

        mu, floor, scale = self._initial_multipliers()
        if not opts.scale_steps:
            scale = 1.0
        available = user.available
        best_value, best_mu = math.inf, mu.copy()
        best_primal, best_row = 0.0, (np.zeros(user.num_slots), np.zeros(user.num_slots))
        trace: List[float] = []
        previous: Optional[float] = None
        stopped = False
        q = 0
        for q in range(1, opts.max_iters + 1):
            prices = _tail_sums(mu)
            resp = self.respond(prices)
            value = self.dual_value(prices, resp)
            trace.append(value)
            if value < best_value:
                best_value, best_mu = value, mu.copy()
            settled = (
                previous is not None
                and abs(value - previous) < opts.eps * abs(value)
                and value - best_value <= opts.stall_tol * best_value
            )
            if settled and opts.polish:
                stopped = True
                break
            checkpoint = q % opts.check_every == 0
            if checkpoint or opts.step_rule is StepRule.POLYAK:
                row = _repair_row(user, resp.local_bits, resp.offload_bits, opts.feasibility_tol)
                primal = user.weight * float(np.sum(row[0]) + np.sum(row[1]))
                if primal > best_primal:
                    best_primal, best_row = primal, row
                gap = (best_value - best_primal) / max(1.0, best_value)
                if checkpoint and q >= 2 and (gap <= opts.gap_exit or (settled and gap <= opts.gap_tol)):
                    stopped = True
                    break
            grad = available - np.cumsum(resp.energy)
            step = self._step_size(q, value, best_primal, grad, scale)
            mu = np.maximum(mu - step * grad, 0.0)
            mu[-1] = max(mu[-1], floor)
            previous = value

        prices = _tail_sums(best_mu)
        resp = self.respond(prices)
        value = best_value
        polished = False
        if opts.polish:
            exact = self.pooled_prices()
            exact_resp = self.respond(exact)
            exact_value = self.dual_value(exact, exact_resp)
            if exact_value <= best_value * (1.0 + 1e-12):
                prices, resp, value, polished = exact, exact_resp, exact_value, True

        loc, off = _repair_row(user, resp.local_bits, resp.offload_bits, opts.feasibility_tol)
        primal = user.weight * float(np.sum(loc) + np.sum(off))
        if not polished and primal < best_primal:
            (loc, off), primal = best_row, best_primal
        gap = (value - primal) / max(1.0, value)
        converged = stopped and gap <= opts.gap_tol
        logger.debug(
            "user %d: %d iterations, converged=%s, polished=%s, dual=%.6g, gap=%.3g",
            user.index, q, converged, polished, value, gap,
        )
        return UserSolution(
            local_bits=loc,
            offload_bits=off,
            tail_sums=prices,
            dual_value=value,
            trace=trace,
            iterations=q,
            converged=converged,
            polished=polished,
        )


def _combine_traces(traces: Sequence[List[float]]) -> np.ndarray:
    length = max(len(t) for t in traces)
    total = np.zeros(length)
    for t in traces:
        padded = np.full(length, t[-1])
        padded[: len(t)] = t
        total += padded
    return total


@attr.s(frozen=True, eq=False)
class SolveReport:
    """Everything :func:`solve` learned about an instance."""

    allocation: Allocation = attr.ib()
    primal_value: float = attr.ib()
    dual_value: float = attr.ib()
    iterations: int = attr.ib()
    converged: bool = attr.ib()
    dual: DualState = attr.ib()
    feasibility: FeasibilityReport = attr.ib()
    dual_trace: np.ndarray = attr.ib()
    user_iterations: List[int] = attr.ib(factory=list)
    user_converged: List[bool] = attr.ib(factory=list)
    polished: bool = attr.ib(default=False)

    @property
    def relative_gap(self) -> float:
        """``(dual - primal) / max(1, dual)``."""
        return duality_gap(self)

    def to_dict(self, verbose: bool = False) -> Dict[str, Any]:
        """JSON-friendly report; ``verbose`` adds the dual trace."""
        out: Dict[str, Any] = {
            "objective": self.primal_value,
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "relative_gap": self.relative_gap,
            "iterations": self.iterations,
            "converged": self.converged,
            "polished": self.polished,
            "allocation": self.allocation.to_dict(),
            "dual": self.dual.to_dict(),
            "feasibility": self.feasibility.to_dict(),
            "users": [
                {"iterations": it, "converged": ok}
                for it, ok in zip(self.user_iterations, self.user_converged)
            ],
        }
        if verbose:
            out["dual_trace"] = self.dual_trace.tolist()
        return out


def duality_gap(report: SolveReport) -> float:
    """Relative duality gap ``(dual - primal) / max(1, dual)``."""
    return (report.dual_value - report.primal_value) / max(1.0, report.dual_value)


def _user_step_scales(instance: Instance, options: SolveOptions) -> List[float]:
    k = instance.config.num_users
    if options.user_eta0 is None:
        return [options.eta0] * k
    if len(options.user_eta0) != k:
        raise ConfigError(f"user_eta0 needs {k} entries, got {len(options.user_eta0)}")
    if any(not e > 0 for e in options.user_eta0):
        raise ConfigError("user_eta0 entries must be strictly positive")
    return list(options.user_eta0)


def solve(instance: Instance, options: Optional[SolveOptions] = None) -> SolveReport:
    """Maximize the weighted computation rate of ``instance``.

    Users are solved independently, on ``options.workers`` threads when more
    than one is requested. A user converges when the subgradient loop stops
    on its own and the returned point is within ``gap_tol`` of its dual value;
    the polished point is accepted whenever it does not raise the dual value.
    """
    opts = options or SolveOptions()
    scales = _user_step_scales(instance, opts)
    users = instance.users()

    def run(user: UserProblem) -> UserSolution:
        return UserSolver(user, opts, scales[user.index]).solve()

    if opts.workers > 1 and len(users) > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            solutions = list(pool.map(run, users))
    else:
        solutions = [run(u) for u in users]

    allocation = Allocation.stack([(s.local_bits, s.offload_bits) for s in solutions])
    dual = DualState.from_tail_sums(np.vstack([s.tail_sums for s in solutions]))
    report = SolveReport(
        allocation=allocation,
        primal_value=weighted_rate(allocation, instance.config.weights),
        dual_value=float(sum(s.dual_value for s in solutions)),
        iterations=max(s.iterations for s in solutions),
        converged=all(s.converged for s in solutions),
        dual=dual,
        feasibility=causality_slack(instance, allocation, opts.feasibility_tol),
        dual_trace=_combine_traces([s.trace for s in solutions]),
        user_iterations=[s.iterations for s in solutions],
        user_converged=[s.converged for s in solutions],
        polished=all(s.polished for s in solutions if s.iterations > 0),
    )
    logger.info(
        "Solved K=%d N=%d (modes=%s): objective=%.6g gap=%.3g iterations=%d converged=%s",
        instance.config.num_users,
        instance.config.num_slots,
        opts.modes.value,
        report.primal_value,
        report.relative_gap,
        report.iterations,
        report.converged,
    )
    return report
