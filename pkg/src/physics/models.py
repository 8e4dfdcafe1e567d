import math
import numpy as np
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Tuple, Type

from src.core.exceptions import UnknownModel
from src.core.experiment import TimingClass

TWO_PI = 2.0 * math.pi

# Singlet convention E(a, b) = CORRELATION_SIGN * cos(ANGLE_FACTOR * (a - b)).
# Photon polarisation experiments use ANGLE_FACTOR = 2; the local sign
# functions follow the same factor so every invariant is unchanged.
CORRELATION_SIGN = -1.0
ANGLE_FACTOR = 1


class Outcome(IntEnum):
    PLUS = 1
    MINUS = -1


@dataclass(frozen=True)
class Setting:
    """Measurement setting, an angle in radians canonicalised to [0, 2*pi)."""
    angle: float

    def __post_init__(self):
        if not math.isfinite(self.angle):
            raise ValueError(f"Setting angle must be finite, got {self.angle}")
        canonical = float(np.mod(self.angle, TWO_PI))
        # np.mod can round a tiny negative angle up to exactly 2*pi
        if canonical >= TWO_PI:
            canonical = 0.0
        object.__setattr__(self, "angle", canonical)


@dataclass(frozen=True)
class HiddenState:
    """Per-trial randomness: shared source variable ``lam`` and two uniforms."""
    lam: float
    aux: Tuple[float, float]

    def __post_init__(self):
        if not 0.0 <= self.lam < TWO_PI:
            raise ValueError(f"lambda must lie in [0, 2*pi), got {self.lam}")
        if len(self.aux) != 2 or not all(0.0 <= u < 1.0 for u in self.aux):
            raise ValueError(f"aux must be two values in [0, 1), got {self.aux}")


@dataclass
class HiddenStates:
    """Batch of hidden states, ``lam`` of shape (n,) and ``aux`` of shape (n, 2)."""
    lam: np.ndarray
    aux: np.ndarray

    def __len__(self) -> int:
        return len(self.lam)

    @classmethod
    def draw(cls, rng: np.random.Generator, n: int) -> "HiddenStates":
        """Draw ``n`` independent hidden states from ``rng``."""
        lam = rng.uniform(0.0, TWO_PI, size=n)
        aux = rng.random(size=(n, 2))
        return cls(lam, aux)

    @classmethod
    def single(cls, h: HiddenState) -> "HiddenStates":
        return cls(np.array([h.lam]), np.array([h.aux], dtype=float))


def singlet_correlation(a, b):
    """Target quantum correlation E(a, b) for the singlet state."""
    return CORRELATION_SIGN * np.cos(ANGLE_FACTOR * (np.asarray(a) - np.asarray(b)))


def local_correlation(a, b):
    """Closed-form correlation of the sign-function local model.

    -(1 - 2*d/pi) where d in [0, pi] is the wrapped angular distance
    between the (angle-factor scaled) settings.
    """
    diff = np.mod(ANGLE_FACTOR * (np.asarray(a) - np.asarray(b)), TWO_PI)
    d = np.minimum(diff, TWO_PI - diff)
    return CORRELATION_SIGN * (1.0 - 2.0 * d / math.pi)


def _sign(values: np.ndarray) -> np.ndarray:
    """sgn with sgn(0) = +1."""
    return np.where(values >= 0.0, 1, -1).astype(np.int8)


def _local_outcome(angle, lam: np.ndarray) -> np.ndarray:
    return _sign(np.cos(ANGLE_FACTOR * (lam - angle)))


def _conditioned_on(w: np.ndarray, correlation, uniform: np.ndarray) -> np.ndarray:
    """Draw v with P(v | w) = (1 + w*v*E) / 2 using one uniform per trial."""
    agree = uniform < (1.0 + correlation) / 2.0
    return np.where(agree, w, -w).astype(np.int8)


def _as_angles(settings, n: int) -> np.ndarray:
    if isinstance(settings, Setting):
        return np.full(n, settings.angle)
    angles = np.asarray(settings, dtype=float)
    return np.broadcast_to(angles, (n,))


class CausalModel:
    """Base class for outcome generators.

    Subclasses implement ``_respond`` on arrays. Models hold no state; all
    randomness enters through the hidden states.
    """
    model_id: str = ""

    def respond(self, a: Setting, b: Setting, timing: TimingClass,
                h: HiddenState) -> Tuple[Outcome, Outcome]:
        """Outcome pair (x, y) for a single trial."""
        x, y = self.respond_batch(a, b, timing, HiddenStates.single(h))
        return Outcome(int(x[0])), Outcome(int(y[0]))

    def respond_batch(self, a, b, timing: TimingClass,
                      hidden: HiddenStates) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorised responses.

        Args:
            a: Alice's setting (``Setting``) or per-trial angles in radians
            b: Bob's setting (``Setting``) or per-trial angles in radians
            timing (TimingClass): Timing class of the geometry
            hidden (HiddenStates): One hidden state per trial

        Returns:
            Tuple of int8 arrays (x, y) with entries in {-1, +1}
        """
        n = len(hidden)
        return self._respond(_as_angles(a, n), _as_angles(b, n),
                             TimingClass(timing), hidden)

    def _respond(self, a: np.ndarray, b: np.ndarray, timing: TimingClass,
                 hidden: HiddenStates) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def correlation(self, a, b, timing: TimingClass):
        """Closed-form E(a, b) this model produces in ``timing``."""
        raise NotImplementedError


class LocalModel(CausalModel):
    """Local deterministic model: x = F(a, lambda), y = G(b, lambda)."""
    model_id = "local"

    def _respond(self, a, b, timing, hidden):
        x = _local_outcome(a, hidden.lam)
        y = -_local_outcome(b, hidden.lam)
        return x, y

    def correlation(self, a, b, timing):
        return local_correlation(a, b)


class QuantumModel(CausalModel):
    """Samples the singlet joint distribution; ignores timing."""
    model_id = "quantum"

    def _respond(self, a, b, timing, hidden):
        x = np.where(hidden.aux[:, 0] < 0.5, 1, -1).astype(np.int8)
        y = _conditioned_on(x, singlet_correlation(a, b), hidden.aux[:, 1])
        return x, y

    def correlation(self, a, b, timing):
        return singlet_correlation(a, b)


class SuarezScaraniModel(CausalModel):
    """Time-ordered nonlocal model.

    An apparatus that is first in its own rest frame answers locally; one that
    measures later takes the earlier outcome as the nonlocal variable w and
    answers with the quantum conditional distribution.
    """
    model_id = "suarez-scarani"

    def _respond(self, a, b, timing, hidden):
        correlation = singlet_correlation(a, b)

        if timing is TimingClass.ALICE_FIRST:
            x = _local_outcome(a, hidden.lam)
            y = _conditioned_on(x, correlation, hidden.aux[:, 1])
        elif timing is TimingClass.BOB_FIRST:
            y = -_local_outcome(b, hidden.lam)
            x = _conditioned_on(y, correlation, hidden.aux[:, 1])
        elif timing is TimingClass.BEFORE_BEFORE:
            # Nonlocal dependencies drop out; only the local parts remain.
            x = _local_outcome(a, hidden.lam)
            y = -_local_outcome(b, hidden.lam)
        else:
            x = np.where(hidden.aux[:, 0] < 0.5, 1, -1).astype(np.int8)
            y = _conditioned_on(x, correlation, hidden.aux[:, 1])
        return x, y

    def correlation(self, a, b, timing):
        if TimingClass(timing) is TimingClass.BEFORE_BEFORE:
            return local_correlation(a, b)
        return singlet_correlation(a, b)


MODELS: Dict[str, Type[CausalModel]] = {
    LocalModel.model_id: LocalModel,
    QuantumModel.model_id: QuantumModel,
    SuarezScaraniModel.model_id: SuarezScaraniModel,
}


def get_model(model_id: str) -> CausalModel:
    """Instantiate the model registered under ``model_id``."""
    try:
        return MODELS[model_id]()
    except KeyError:
        raise UnknownModel(
            f"unknown model {model_id!r}; expected one of {sorted(MODELS)}") from None


def analytic_correlation(model_id: str, a, b, timing: TimingClass):
    """Closed-form E(a, b) for a registered model."""
    return get_model(model_id).correlation(a, b, timing)
