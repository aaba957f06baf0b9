"""Linear cost models for a kernel running on one hardware configuration.

A model predicts execution time (ms) and energy (mJ) from a step's feature
vector and is refined online with normalized least-mean-squares steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatchError, InvalidArgumentError

#: Prediction floor in milliseconds (and millijoules for energy).
EPSILON = 1e-6


@dataclass(frozen=True)
class CostModel:
    """Intercept-first coefficient vectors for time and energy."""

    time_params: tuple[float, ...]
    energy_params: tuple[float, ...]
    update_count: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "time_params", tuple(float(v) for v in self.time_params))
        object.__setattr__(self, "energy_params", tuple(float(v) for v in self.energy_params))
        if len(self.time_params) < 1 or len(self.time_params) != len(self.energy_params):
            raise DimensionMismatchError(
                f"time/energy parameter vectors must be non-empty and equal length, "
                f"got {len(self.time_params)} and {len(self.energy_params)}"
            )
        if self.update_count < 0:
            raise InvalidArgumentError("update_count must be non-negative")

    @property
    def n_features(self) -> int:
        return len(self.time_params) - 1

    @classmethod
    def constant(cls, time_ms: float, energy_mj: float = 0.0, n_features: int = 3) -> "CostModel":
        """Model that ignores metadata and predicts fixed values."""
        zeros = (0.0,) * n_features
        return cls((time_ms, *zeros), (energy_mj, *zeros))


@dataclass(frozen=True)
class Observation:
    metadata: tuple[float, ...]
    observed_time: float
    observed_energy: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "metadata", tuple(float(v) for v in self.metadata))
        if not self.observed_time > 0:
            raise InvalidArgumentError(f"observed_time must be > 0, got {self.observed_time}")
        if not self.observed_energy >= 0:
            raise InvalidArgumentError(f"observed_energy must be >= 0, got {self.observed_energy}")


def _linear(params: tuple[float, ...], metadata: Sequence[float]) -> float:
    acc = params[0]
    for c, x in zip(params[1:], metadata):
        acc += c * x
    return acc


def _check_dim(model: CostModel, metadata: Sequence[float]) -> None:
    if len(metadata) != len(model.time_params) - 1:
        raise DimensionMismatchError(
            f"metadata has {len(metadata)} features, model expects {len(model.time_params) - 1}"
        )


def predict(model: CostModel, metadata: Sequence[float]) -> tuple[float, float]:
    """Return ``(time_ms, energy_mj)``, each floored at :data:`EPSILON`."""
    _check_dim(model, metadata)
    time = _linear(model.time_params, metadata)
    energy = _linear(model.energy_params, metadata)
    return (time if time > EPSILON else EPSILON, energy if energy > EPSILON else EPSILON)


def update(model: CostModel, obs: Observation, rate: float = 0.5) -> CostModel:
    """One normalized-LMS step toward ``obs``; returns a new model."""
    if not 0.0 < rate <= 1.0:
        raise InvalidArgumentError(f"rate must be in (0, 1], got {rate}")
    _check_dim(model, obs.metadata)
    time_pred, energy_pred = predict(model, obs.metadata)
    x = (1.0, *obs.metadata)
    norm = 1.0 + sum(v * v for v in obs.metadata)
    gain_t = rate * (obs.observed_time - time_pred) / norm
    gain_e = rate * (obs.observed_energy - energy_pred) / norm
    return CostModel(
        tuple(p + gain_t * xi for p, xi in zip(model.time_params, x)),
        tuple(p + gain_e * xi for p, xi in zip(model.energy_params, x)),
        model.update_count + 1,
    )
