import math
import numpy as np
from dataclasses import dataclass

from src.core.exceptions import InvalidFrame


@dataclass(frozen=True)
class SpacetimeEvent:
    """A point (t, z) in 1+1D Minkowski spacetime, in units where c = 1."""
    t: float  # seconds
    z: float  # light-seconds

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.z)):
            raise ValueError(f"Event coordinates must be finite, got ({self.t}, {self.z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.z], dtype=float)


@dataclass(frozen=True)
class InertialFrame:
    """Inertial frame moving along z with velocity ``beta`` (fraction of c)
    relative to the laboratory."""
    beta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.beta) or abs(self.beta) >= 1.0:
            raise InvalidFrame(f"|beta| must be < 1, got {self.beta}")

    @property
    def gamma(self) -> float:
        """Lorentz factor 1/sqrt(1 - beta^2)."""
        return 1.0 / math.sqrt(1.0 - self.beta**2)


def boost(event: SpacetimeEvent, frame: InertialFrame) -> SpacetimeEvent:
    """Express a laboratory event in the coordinates of ``frame``.

    Args:
        event (SpacetimeEvent): Event in laboratory coordinates
        frame (InertialFrame): Target frame

    Returns:
        SpacetimeEvent: (gamma*(t - beta*z), gamma*(z - beta*t))
    """
    t, z = boost_coordinates(event.t, event.z, frame.beta)
    return SpacetimeEvent(float(t), float(z))


def boost_coordinates(t, z, beta: float):
    """Vectorised Lorentz boost on raw coordinates (scalars or arrays)."""
    if not math.isfinite(beta) or abs(beta) >= 1.0:
        raise InvalidFrame(f"|beta| must be < 1, got {beta}")
    gamma = 1.0 / np.sqrt(1.0 - beta**2)
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    return gamma * (t - beta * z), gamma * (z - beta * t)


def interval_squared(e1: SpacetimeEvent, e2: SpacetimeEvent) -> float:
    """Invariant interval dt^2 - dz^2.

    Negative for spacelike, zero for lightlike, positive for timelike separation.
    """
    dt = e2.t - e1.t
    dz = e2.z - e1.z
    return dt * dt - dz * dz
