import math
from typing import Tuple

from src.core.experiment import ExperimentGeometry

# Standard CHSH angles: a in {0, pi/2}, b in {pi/4, -pi/4}
CHSH_ALICE_SETTINGS: Tuple[float, float] = (0.0, math.pi / 2)
CHSH_BOB_SETTINGS: Tuple[float, float] = (math.pi / 4, -math.pi / 4)

BEFORE_BEFORE_SPEED = 0.1


def standard_geometry() -> ExperimentGeometry:
    """Apparatuses at rest in the lab; Alice's arm is slightly shorter so she
    measures first, while the events stay spacelike separated."""
    return ExperimentGeometry(source_z=0.0, alice_z=0.9, bob_z=-1.0,
                              alice_beta=0.0, bob_beta=0.0, emission_t=0.0)


def before_before_geometry(speed: float = BEFORE_BEFORE_SPEED) -> ExperimentGeometry:
    """Symmetric 1 light-second arms with both devices receding from the source,
    so each one measures first in its own rest frame."""
    arms = ExperimentGeometry(source_z=0.0, alice_z=-1.0, bob_z=1.0)
    return arms.receding(speed)
