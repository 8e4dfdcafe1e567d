import math
from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Tuple

from src.core.exceptions import InvalidGeometry, NotSpacelike, TimingDegenerate
from src.core.spacetime import SpacetimeEvent, boost_coordinates, interval_squared

DEFAULT_EPSILON = 1e-9  # seconds


class TimingClass(str, Enum):
    """Which measurement comes first in each apparatus's own rest frame."""
    ALICE_FIRST = "AliceFirstConsistent"
    BOB_FIRST = "BobFirstConsistent"
    BEFORE_BEFORE = "BeforeBefore"
    AFTER_AFTER = "AfterAfter"

    def swapped(self) -> "TimingClass":
        """Timing class seen after exchanging the roles of Alice and Bob."""
        if self is TimingClass.ALICE_FIRST:
            return TimingClass.BOB_FIRST
        if self is TimingClass.BOB_FIRST:
            return TimingClass.ALICE_FIRST
        return self


@dataclass(frozen=True)
class ExperimentGeometry:
    """Collinear source/apparatus arrangement in the laboratory frame.

    Positions are in light-seconds, times in seconds. ``alice_beta`` and
    ``bob_beta`` are the rest-frame velocities of the two measuring devices.
    """
    source_z: float
    alice_z: float
    bob_z: float
    alice_beta: float = 0.0
    bob_beta: float = 0.0
    emission_t: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise InvalidGeometry(f.name, f"must be finite, got {value}")
        if self.alice_z == self.source_z:
            raise InvalidGeometry("alice_z", "apparatus coincides with the source")
        if self.bob_z == self.source_z:
            raise InvalidGeometry("bob_z", "apparatus coincides with the source")
        if self.alice_z == self.bob_z:
            raise InvalidGeometry("bob_z", "apparatuses coincide")
        for name in ("alice_beta", "bob_beta"):
            if abs(getattr(self, name)) >= 1.0:
                raise InvalidGeometry(name, f"|beta| must be < 1, got {getattr(self, name)}")

    def mirrored(self) -> "ExperimentGeometry":
        """Exchange Alice's and Bob's positions and velocities."""
        return replace(self, alice_z=self.bob_z, bob_z=self.alice_z,
                       alice_beta=self.bob_beta, bob_beta=self.alice_beta)

    def receding(self, speed: float) -> "ExperimentGeometry":
        """Same arms with both devices moving away from the source at ``speed``."""
        return replace(
            self,
            alice_beta=math.copysign(speed, self.alice_z - self.source_z),
            bob_beta=math.copysign(speed, self.bob_z - self.source_z))


def measurement_events(g: ExperimentGeometry) -> Tuple[SpacetimeEvent, SpacetimeEvent]:
    """Photon arrival events at Alice's and Bob's apparatus (photons travel at c)."""
    alice = SpacetimeEvent(g.emission_t + abs(g.alice_z - g.source_z), g.alice_z)
    bob = SpacetimeEvent(g.emission_t + abs(g.bob_z - g.source_z), g.bob_z)
    return alice, bob


def _require_spacelike(alice: SpacetimeEvent, bob: SpacetimeEvent) -> None:
    s2 = interval_squared(alice, bob)
    if s2 >= 0.0:
        raise NotSpacelike(f"measurement events are not spacelike separated "
                           f"(interval^2 = {s2:.6g})")


def frame_time_gaps(g: ExperimentGeometry) -> Tuple[float, float]:
    """Time gaps seen by each apparatus in its own rest frame.

    Returns:
        (t'_bob - t'_alice in Alice's frame, t'_alice - t'_bob in Bob's frame).
        A positive entry means that apparatus measures first in its own frame.
    """
    alice, bob = measurement_events(g)
    _require_spacelike(alice, bob)

    ts = [alice.t, bob.t]
    zs = [alice.z, bob.z]
    t_in_alice, _ = boost_coordinates(ts, zs, g.alice_beta)
    t_in_bob, _ = boost_coordinates(ts, zs, g.bob_beta)
    return (float(t_in_alice[1] - t_in_alice[0]),
            float(t_in_bob[0] - t_in_bob[1]))


def classify_timing(g: ExperimentGeometry,
                    epsilon: float = DEFAULT_EPSILON) -> TimingClass:
    """Classify the time order of the two measurements in each apparatus frame.

    Raises:
        NotSpacelike: if the events are lightlike or timelike separated
        TimingDegenerate: if either frame sees the events within ``epsilon``
    """
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    gap_alice, gap_bob = frame_time_gaps(g)
    if abs(gap_alice) < epsilon or abs(gap_bob) < epsilon:
        raise TimingDegenerate(
            f"events simultaneous within {epsilon:g} s "
            f"(gaps: Alice frame {gap_alice:.3g}, Bob frame {gap_bob:.3g}); "
            "perturb the geometry")

    alice_first = gap_alice > 0.0
    bob_first = gap_bob > 0.0
    if alice_first and bob_first:
        return TimingClass.BEFORE_BEFORE
    if alice_first:
        return TimingClass.ALICE_FIRST
    if bob_first:
        return TimingClass.BOB_FIRST
    return TimingClass.AFTER_AFTER


def critical_beta(g: ExperimentGeometry) -> float:
    """Frame velocity in which both measurements are simultaneous.

    Frames moving faster than this (along the sign of the result) reverse the
    laboratory order of the events.
    """
    alice, bob = measurement_events(g)
    _require_spacelike(alice, bob)
    return (bob.t - alice.t) / (bob.z - alice.z)
