"""System model: energy functions, instances, allocations and causality checks.

All quantities use SI units: bits, joules, seconds, hertz and watts. Arrays
indexed by user and slot have shape ``(K, N)``; harvested energy arrays have
shape ``(K, N - 1)`` because the last harvest arrives after the horizon.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Any, Dict, List, Sequence, Union

import attr
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ehmec.errors import DomainError, ShapeMismatchError

ArrayLike = Union[float, Sequence[float], np.ndarray]

LN2 = math.log(2.0)
DEFAULT_FEASIBILITY_TOL = 1e-9


class Modes(str, Enum):
    """Computation modes a scheme may use."""

    BOTH = "both"
    LOCAL = "local"
    OFFLOAD = "offload"

    @property
    def uses_local(self) -> bool:
        """Whether local computing is enabled."""
        return self is not Modes.OFFLOAD

    @property
    def uses_offload(self) -> bool:
        """Whether offloading is enabled."""
        return self is not Modes.LOCAL


def _check_positive(**params: Any) -> None:
    for name, value in params.items():
        arr = np.asarray(value, dtype=float)
        if arr.size and not np.all(arr > 0):
            raise DomainError(f"{name} must be strictly positive")


def _as_array(name: str, value: ArrayLike) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError(f"{name} contains NaN")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative")
    return arr


def _unwrap(arr: np.ndarray) -> Union[float, np.ndarray]:
    return float(arr) if arr.ndim == 0 else arr


def local_energy(
    bits: ArrayLike,
    capacitance: ArrayLike,
    cycles_per_bit: ArrayLike,
    slot_seconds: float,
) -> Union[float, np.ndarray]:
    """CPU energy to compute ``bits`` locally within one slot.

    Uses the optimal constant clock over the slot, ``gamma * C^3 * l^3 / tau^2``.

    Raises:
        DomainError: On negative bits or non-positive parameters.
    """
    ell = _as_array("bits", bits)
    _check_positive(capacitance=capacitance, cycles_per_bit=cycles_per_bit, slot_seconds=slot_seconds)
    return _unwrap(_local_energy(ell, capacitance, cycles_per_bit, slot_seconds))


def offload_energy(
    bits: ArrayLike,
    gain: ArrayLike,
    slot_seconds: float,
    bandwidth: float,
    noise_power: float,
) -> Union[float, np.ndarray]:
    """Transmit energy to offload ``bits`` within one slot at constant power.

    Raises:
        DomainError: On negative bits or non-positive parameters.
    """
    ell = _as_array("bits", bits)
    _check_positive(gain=gain, slot_seconds=slot_seconds, bandwidth=bandwidth, noise_power=noise_power)
    return _unwrap(_offload_energy(ell, gain, slot_seconds, bandwidth, noise_power))


def local_bits_from_energy(
    energy: ArrayLike,
    capacitance: ArrayLike,
    cycles_per_bit: ArrayLike,
    slot_seconds: float,
) -> Union[float, np.ndarray]:
    """Inverse of :func:`local_energy`."""
    e = _as_array("energy", energy)
    _check_positive(capacitance=capacitance, cycles_per_bit=cycles_per_bit, slot_seconds=slot_seconds)
    return _unwrap(_local_bits(e, capacitance, cycles_per_bit, slot_seconds))


def offload_bits_from_energy(
    energy: ArrayLike,
    gain: ArrayLike,
    slot_seconds: float,
    bandwidth: float,
    noise_power: float,
) -> Union[float, np.ndarray]:
    """Inverse of :func:`offload_energy`."""
    e = _as_array("energy", energy)
    _check_positive(gain=gain, slot_seconds=slot_seconds, bandwidth=bandwidth, noise_power=noise_power)
    return _unwrap(_offload_bits(e, gain, slot_seconds, bandwidth, noise_power))


# Unchecked kernels shared with the solver and the oracles. Parameters broadcast
# against ``bits``/``energy``, so per-user columns work for (K, N) arrays.


def _cpu_coefficient(capacitance: ArrayLike, cycles_per_bit: ArrayLike) -> np.ndarray:
    return np.asarray(capacitance, dtype=float) * np.asarray(cycles_per_bit, dtype=float) ** 3


def _local_energy(bits: np.ndarray, capacitance: ArrayLike, cycles_per_bit: ArrayLike, tau: float) -> np.ndarray:
    return _cpu_coefficient(capacitance, cycles_per_bit) * bits**3 / tau**2


def _local_bits(energy: np.ndarray, capacitance: ArrayLike, cycles_per_bit: ArrayLike, tau: float) -> np.ndarray:
    return np.cbrt(energy * tau**2 / _cpu_coefficient(capacitance, cycles_per_bit))


def _offload_energy(bits: np.ndarray, gain: ArrayLike, tau: float, bandwidth: float, noise: float) -> np.ndarray:
    return noise * tau / np.asarray(gain, dtype=float) * np.expm1(bits * LN2 / (tau * bandwidth))


def _offload_bits(energy: np.ndarray, gain: ArrayLike, tau: float, bandwidth: float, noise: float) -> np.ndarray:
    return tau * bandwidth * np.log1p(energy * np.asarray(gain, dtype=float) / (noise * tau)) / LN2


class SystemConfig(BaseModel):
    """Static system parameters shared by every slot of an instance."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_users: int = Field(ge=1)
    num_slots: int = Field(ge=1)
    slot_seconds: float = Field(gt=0)
    bandwidth: float = Field(gt=0)
    noise_power: float = Field(gt=0)
    weights: List[float]
    capacitance: List[float]
    cycles_per_bit: List[int]
    initial_energy: List[float]

    @field_validator("weights", "capacitance", "cycles_per_bit")
    @classmethod
    def check_positive_entries(cls, v: List[Any]) -> List[Any]:
        """Weights and CPU parameters are strictly positive."""
        if any(not x > 0 for x in v):
            raise ValueError("entries must be strictly positive")
        return v

    @field_validator("initial_energy")
    @classmethod
    def check_initial_energy(cls, v: List[float]) -> List[float]:
        """Initial battery levels are non-negative."""
        if any(not x >= 0 for x in v):
            raise ValueError("initial energy must be non-negative")
        return v

    @model_validator(mode="after")
    def check_lengths(self) -> "SystemConfig":
        """Per-user lists must have one entry per user."""
        for name in ("weights", "capacitance", "cycles_per_bit", "initial_energy"):
            if len(getattr(self, name)) != self.num_users:
                raise ValueError(f"{name} must have num_users={self.num_users} entries")
        return self

    @classmethod
    def uniform(
        cls,
        num_users: int,
        num_slots: int,
        slot_seconds: float,
        bandwidth: float,
        noise_power: float,
        weight: float = 1.0,
        capacitance: float = 1e-28,
        cycles_per_bit: int = 500,
        initial_energy: float = 0.0,
    ) -> "SystemConfig":
        """Config in which every user has the same weight and CPU constants."""
        return cls(
            num_users=num_users,
            num_slots=num_slots,
            slot_seconds=slot_seconds,
            bandwidth=bandwidth,
            noise_power=noise_power,
            weights=[weight] * num_users,
            capacitance=[capacitance] * num_users,
            cycles_per_bit=[cycles_per_bit] * num_users,
            initial_energy=[initial_energy] * num_users,
        )

    @property
    def weight_array(self) -> np.ndarray:
        """Weights as a float array of shape (K,)."""
        return np.asarray(self.weights, dtype=float)

    @property
    def capacitance_array(self) -> np.ndarray:
        """Effective switched capacitances, shape (K,)."""
        return np.asarray(self.capacitance, dtype=float)

    @property
    def cycles_array(self) -> np.ndarray:
        """CPU cycles per bit as floats, shape (K,)."""
        return np.asarray(self.cycles_per_bit, dtype=float)

    @property
    def horizon(self) -> float:
        """Total horizon ``N * tau`` in seconds."""
        return self.num_slots * self.slot_seconds


def _read_only(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class ProfilesPayload(BaseModel):
    """Channel and harvest profiles as they appear in instance files."""

    model_config = ConfigDict(extra="forbid")

    h: List[List[float]]
    harvest: List[List[float]]


class InstancePayload(BaseModel):
    """Validated shape of an instance file."""

    model_config = ConfigDict(extra="forbid")

    config: SystemConfig
    profiles: ProfilesPayload


@attr.s(frozen=True, eq=False)
class UserProblem:
    """Scalars and per-slot arrays of a single user.

    Users share no constraint, so the solver and the oracles work on one
    ``UserProblem`` at a time.
    """

    index: int = attr.ib()
    weight: float = attr.ib()
    capacitance: float = attr.ib()
    cycles_per_bit: float = attr.ib()
    slot_seconds: float = attr.ib()
    bandwidth: float = attr.ib()
    noise_power: float = attr.ib()
    gain: np.ndarray = attr.ib()
    arrivals: np.ndarray = attr.ib()

    @property
    def num_slots(self) -> int:
        """Number of slots N."""
        return int(self.gain.shape[0])

    @property
    def available(self) -> np.ndarray:
        """Cumulative energy available by the end of each slot."""
        return np.cumsum(self.arrivals)

    @property
    def total_energy(self) -> float:
        """Energy available over the whole horizon."""
        return float(self.available[-1])

    def local_energy(self, bits: np.ndarray) -> np.ndarray:
        """Per-slot local energy for this user."""
        return _local_energy(bits, self.capacitance, self.cycles_per_bit, self.slot_seconds)

    def offload_energy(self, bits: np.ndarray) -> np.ndarray:
        """Per-slot offloading energy for this user."""
        return _offload_energy(bits, self.gain, self.slot_seconds, self.bandwidth, self.noise_power)

    def slot_offload_energy(self, n: int, bits: Any) -> Any:
        """Offloading energy in slot ``n``; broadcasts over ``bits``."""
        return _offload_energy(bits, self.gain[n], self.slot_seconds, self.bandwidth, self.noise_power)

    def slot_offload_bits(self, n: int, energy: Any) -> Any:
        """Bits offloadable in slot ``n``; broadcasts over ``energy``."""
        return _offload_bits(energy, self.gain[n], self.slot_seconds, self.bandwidth, self.noise_power)

    def local_bits(self, energy: np.ndarray) -> np.ndarray:
        """Bits computable locally with ``energy`` in each slot."""
        return _local_bits(energy, self.capacitance, self.cycles_per_bit, self.slot_seconds)

    def offload_bits(self, energy: np.ndarray) -> np.ndarray:
        """Bits offloadable with ``energy`` in each slot."""
        return _offload_bits(energy, self.gain, self.slot_seconds, self.bandwidth, self.noise_power)


class Instance(BaseModel):
    """A full offline problem: system configuration plus channel and harvest profiles.

    Arrays are converted to read-only float arrays on construction.
    ``channel_gain`` has shape (K, N) and ``harvest`` has shape (K, N - 1):
    ``harvest[k, j]`` becomes usable from slot ``j + 2`` onwards.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    config: SystemConfig
    channel_gain: np.ndarray
    harvest: np.ndarray

    @field_validator("channel_gain", "harvest", mode="before")
    @classmethod
    def to_array(cls, v: Any) -> np.ndarray:
        """Coerce nested sequences to a 2-D float array."""
        arr = np.array(v, dtype=float)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array indexed by [user][slot]")
        return _read_only(arr)

    @model_validator(mode="after")
    def check_profiles(self) -> "Instance":
        """Profiles must match (K, N) and hold physical values."""
        k, n = self.config.num_users, self.config.num_slots
        if self.channel_gain.shape != (k, n):
            raise ValueError(f"h must have shape ({k}, {n}), got {self.channel_gain.shape}")
        if self.harvest.shape != (k, n - 1):
            raise ValueError(f"harvest must have shape ({k}, {n - 1}), got {self.harvest.shape}")
        if not np.all(np.isfinite(self.channel_gain)) or not np.all(self.channel_gain > 0):
            raise ValueError("channel gains must be finite and strictly positive")
        if not np.all(np.isfinite(self.harvest)) or np.any(self.harvest < 0):
            raise ValueError("harvested energy must be finite and non-negative")
        return self

    @classmethod
    def from_file_dict(cls, data: Dict[str, Any]) -> "Instance":
        """Build an instance from the parsed JSON file layout."""
        payload = InstancePayload.model_validate(data)
        return cls(
            config=payload.config,
            channel_gain=payload.profiles.h,
            harvest=payload.profiles.harvest,
        )

    def to_file_dict(self) -> Dict[str, Any]:
        """Inverse of :meth:`from_file_dict`."""
        return {
            "config": self.config.model_dump(),
            "profiles": {
                "h": self.channel_gain.tolist(),
                "harvest": self.harvest.tolist(),
            },
        }

    @property
    def shape(self) -> tuple[int, int]:
        """(K, N)."""
        return self.config.num_users, self.config.num_slots

    def arrivals(self) -> np.ndarray:
        """Energy that becomes usable at the start of each slot, shape (K, N)."""
        initial = np.asarray(self.config.initial_energy, dtype=float)[:, None]
        return np.concatenate([initial, self.harvest], axis=1)

    def available_energy(self) -> np.ndarray:
        """Cumulative usable energy ``E_k0 + ... + E_k(n-1)`` per slot, shape (K, N)."""
        return np.cumsum(self.arrivals(), axis=1)

    def user(self, k: int) -> UserProblem:
        """The independent sub-problem of user ``k``."""
        cfg = self.config
        return UserProblem(
            index=k,
            weight=float(cfg.weights[k]),
            capacitance=float(cfg.capacitance[k]),
            cycles_per_bit=float(cfg.cycles_per_bit[k]),
            slot_seconds=cfg.slot_seconds,
            bandwidth=cfg.bandwidth,
            noise_power=cfg.noise_power,
            gain=np.array(self.channel_gain[k], dtype=float),
            arrivals=self.arrivals()[k].copy(),
        )

    def users(self) -> List[UserProblem]:
        """All user sub-problems in index order."""
        return [self.user(k) for k in range(self.config.num_users)]

    def select_users(self, indices: Sequence[int]) -> "Instance":
        """A new instance restricted to ``indices``, in the given order."""
        idx = list(indices)
        if not idx:
            raise ShapeMismatchError("at least one user must be selected")
        cfg = self.config
        config = cfg.model_copy(
            update={
                "num_users": len(idx),
                "weights": [cfg.weights[i] for i in idx],
                "capacitance": [cfg.capacitance[i] for i in idx],
                "cycles_per_bit": [cfg.cycles_per_bit[i] for i in idx],
                "initial_energy": [cfg.initial_energy[i] for i in idx],
            }
        )
        return Instance(
            config=config,
            channel_gain=self.channel_gain[idx],
            harvest=self.harvest[idx],
        )


def _check_allocation_array(value: np.ndarray) -> None:
    if value.ndim != 2:
        raise ShapeMismatchError("allocation arrays must be 2-D (users x slots)")
    if not np.all(np.isfinite(value)):
        raise DomainError("allocation entries must be finite")
    if np.any(value < 0):
        raise DomainError("allocation entries must be non-negative")


@attr.s(frozen=True, eq=False)
class Allocation:
    """Bits computed locally and offloaded by each user in each slot."""

    local_bits: np.ndarray = attr.ib(converter=lambda a: _read_only(np.array(a, dtype=float)))
    offload_bits: np.ndarray = attr.ib(converter=lambda a: _read_only(np.array(a, dtype=float)))

    @local_bits.validator
    def _check_local(self, attribute: attr.Attribute, value: np.ndarray) -> None:
        _check_allocation_array(value)

    @offload_bits.validator
    def _check_offload(self, attribute: attr.Attribute, value: np.ndarray) -> None:
        _check_allocation_array(value)
        if value.shape != self.local_bits.shape:
            raise ShapeMismatchError("local and offloaded bits must have the same shape")

    @classmethod
    def zeros(cls, num_users: int, num_slots: int) -> "Allocation":
        """The all-idle allocation."""
        return cls(np.zeros((num_users, num_slots)), np.zeros((num_users, num_slots)))

    @classmethod
    def stack(cls, rows: Sequence[tuple[np.ndarray, np.ndarray]]) -> "Allocation":
        """Build a (K, N) allocation from per-user ``(local, offload)`` rows."""
        return cls(np.vstack([r[0] for r in rows]), np.vstack([r[1] for r in rows]))

    @property
    def shape(self) -> tuple[int, int]:
        """(K, N)."""
        return self.local_bits.shape  # type: ignore[return-value]

    @property
    def total_bits(self) -> np.ndarray:
        """``local + offload`` per user and slot."""
        return self.local_bits + self.offload_bits

    def check_shape(self, instance: Instance) -> None:
        """Raise :class:`ShapeMismatchError` unless the shape is (K, N)."""
        if self.shape != instance.shape:
            raise ShapeMismatchError(f"allocation shape {self.shape} does not match instance {instance.shape}")

    def slot_energy(self, instance: Instance) -> np.ndarray:
        """Energy spent in each slot, shape (K, N)."""
        self.check_shape(instance)
        cfg = instance.config
        tau = cfg.slot_seconds
        e_loc = _local_energy(self.local_bits, cfg.capacitance_array[:, None], cfg.cycles_array[:, None], tau)
        e_off = _offload_energy(self.offload_bits, instance.channel_gain, tau, cfg.bandwidth, cfg.noise_power)
        return e_loc + e_off

    def transmit_power(self, instance: Instance) -> np.ndarray:
        """Constant transmit power used in each slot, in watts."""
        self.check_shape(instance)
        cfg = instance.config
        tau = cfg.slot_seconds
        energy = _offload_energy(self.offload_bits, instance.channel_gain, tau, cfg.bandwidth, cfg.noise_power)
        return energy / tau

    def cpu_frequency(self, instance: Instance) -> np.ndarray:
        """Constant CPU frequency in cycles per second used in each slot."""
        self.check_shape(instance)
        return self.local_bits * instance.config.cycles_array[:, None] / instance.config.slot_seconds

    def offload_rate(self, instance: Instance) -> np.ndarray:
        """Uplink rate in bit/s used in each slot."""
        self.check_shape(instance)
        return self.offload_bits / instance.config.slot_seconds

    def to_dict(self) -> Dict[str, Any]:
        """Plain lists for JSON export."""
        return {"local_bits": self.local_bits.tolist(), "offload_bits": self.offload_bits.tolist()}


@attr.s(frozen=True, eq=False)
class FeasibilityReport:
    """Slack of every causality constraint of an allocation.

    ``slack[k, n]`` is the energy still unspent by user ``k`` after slot ``n``.
    """

    slack: np.ndarray = attr.ib()
    tolerance: float = attr.ib()

    @property
    def feasible(self) -> bool:
        """True when no slack is below ``-tolerance``."""
        return bool(self.slack.size == 0 or self.slack.min() >= -self.tolerance)

    @property
    def worst_violation(self) -> float:
        """Largest overspend in joules, 0 when feasible."""
        if self.slack.size == 0:
            return 0.0
        return float(max(0.0, -self.slack.min()))

    def to_dict(self) -> Dict[str, Any]:
        """JSON-friendly summary."""
        return {
            "feasible": self.feasible,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
        }


def causality_slack(
    instance: Instance,
    allocation: Allocation,
    tol: float = DEFAULT_FEASIBILITY_TOL,
) -> FeasibilityReport:
    """Check the energy causality constraints of ``allocation``.

    Raises:
        ShapeMismatchError: If the allocation shape differs from (K, N).
    """
    spent = np.cumsum(allocation.slot_energy(instance), axis=1)
    return FeasibilityReport(slack=instance.available_energy() - spent, tolerance=tol)


def weighted_rate(allocation: Allocation, weights: ArrayLike) -> float:
    """Objective value: weighted sum of all bits computed over the horizon."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (allocation.shape[0],):
        raise ShapeMismatchError(f"expected {allocation.shape[0]} weights, got shape {w.shape}")
    return float(np.sum(w * allocation.total_bits.sum(axis=1)))
