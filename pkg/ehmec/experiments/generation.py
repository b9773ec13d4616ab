"""Random instance generation with Rayleigh fading and uniform harvesting."""

import logging
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ehmec.core.model import Instance, SystemConfig

logger = logging.getLogger(__name__)


class GenParams(BaseModel):
    """Parameters of the random instance generator.

    Defaults follow the reference simulation setup: 2 MHz bandwidth,
    1e-9 W noise, ``gamma = 1e-28``, 500 cycles per bit, unit weights, a
    0.2 s horizon, users 20 m from the access point with a -50 dB reference
    gain and path-loss exponent 3.5, and harvests uniform on ``[0, 1]`` J.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(0, ge=0)
    harvest_max: float = Field(1.0, gt=0)
    initial_energy: float = Field(0.3, ge=0)
    reference_gain_db: float = -50.0
    pathloss_exponent: float = Field(3.5, gt=0)
    distance: Union[float, List[float]] = 20.0
    bandwidth: float = Field(2e6, gt=0)
    noise_power: float = Field(1e-9, gt=0)
    capacitance: float = Field(1e-28, gt=0)
    cycles_per_bit: int = Field(500, ge=1)
    weight: float = Field(1.0, gt=0)
    horizon: float = Field(0.2, gt=0)

    @field_validator("distance")
    @classmethod
    def check_distance(cls, v: Union[float, List[float]]) -> Union[float, List[float]]:
        """Distances are strictly positive."""
        values = v if isinstance(v, list) else [v]
        if not values or any(not d > 0 for d in values):
            raise ValueError("distances must be strictly positive")
        return v

    def distances(self, num_users: int) -> np.ndarray:
        """Per-user distances, broadcasting a scalar."""
        if isinstance(self.distance, list):
            if len(self.distance) != num_users:
                raise ValueError(f"distance list needs {num_users} entries, got {len(self.distance)}")
            return np.asarray(self.distance, dtype=float)
        return np.full(num_users, float(self.distance))


def pathloss(reference_gain_db: float, distance: Union[float, np.ndarray], exponent: float) -> Union[float, np.ndarray]:
    """Average channel power gain ``10^(g0/10) * d^-alpha``."""
    return 10.0 ** (reference_gain_db / 10.0) * np.power(distance, -exponent)


def trial_seed(base_seed: int, value_index: int, trial: int) -> int:
    """Seed of one trial, derived from the sweep seed and the trial coordinates.

    Independent of the order in which trials run.
    """
    sequence = np.random.SeedSequence(entropy=base_seed, spawn_key=(value_index, trial))
    return int(sequence.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


def generate_instance(
    params: GenParams,
    num_users: int,
    num_slots: int,
    slot_seconds: Optional[float] = None,
) -> Instance:
    """Draw one instance.

    Harvests are drawn first, then the exponential fading of every user and
    slot, both from ``params.seed``. ``slot_seconds`` defaults to
    ``horizon / num_slots``.
    """
    tau = slot_seconds if slot_seconds is not None else params.horizon / num_slots
    rng = np.random.default_rng(params.seed)
    harvest = rng.uniform(0.0, params.harvest_max, size=(num_users, num_slots - 1))
    fading = rng.exponential(1.0, size=(num_users, num_slots))
    average = pathloss(params.reference_gain_db, params.distances(num_users), params.pathloss_exponent)
    gain = np.asarray(average)[:, None] * fading
    config = SystemConfig.uniform(
        num_users=num_users,
        num_slots=num_slots,
        slot_seconds=tau,
        bandwidth=params.bandwidth,
        noise_power=params.noise_power,
        weight=params.weight,
        capacitance=params.capacitance,
        cycles_per_bit=params.cycles_per_bit,
        initial_energy=params.initial_energy,
    )
    logger.debug("Generated K=%d N=%d tau=%.4g seed=%d", num_users, num_slots, tau, params.seed)
    return Instance(config=config, channel_gain=gain, harvest=harvest)
