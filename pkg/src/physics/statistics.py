import itertools
import math
import numpy as np
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

from statsmodels.stats.proportion import proportions_ztest

from src.core.exceptions import EmptyCounts, MismatchedSettings
from src.core.experiment import TimingClass
from src.physics.models import HiddenStates, Setting, get_model

LOCAL_BOUND = 2
VIOLATION_SIGMAS = 3.0
NO_VIOLATION_MARGIN = 0.05
MIN_VERDICT_TRIALS = 100_000
MIN_TIMING_TRIALS = 10_000

VIOLATION = "violation"
NO_VIOLATION = "no-violation"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class JointCounts:
    """Tally of outcome pairs (x, y) at one setting pair (a, b)."""
    a: float
    b: float
    n_pp: int = 0
    n_pm: int = 0
    n_mp: int = 0
    n_mm: int = 0

    def __post_init__(self):
        for name in ("n_pp", "n_pm", "n_mp", "n_mm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def n(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    @property
    def cells(self) -> np.ndarray:
        """Counts in the order (+,+), (+,-), (-,+), (-,-)."""
        return np.array([self.n_pp, self.n_pm, self.n_mp, self.n_mm], dtype=np.int64)

    @property
    def alice_plus(self) -> int:
        return self.n_pp + self.n_pm

    @property
    def bob_plus(self) -> int:
        return self.n_pp + self.n_mp

    def __add__(self, other: "JointCounts") -> "JointCounts":
        if (self.a, self.b) != (other.a, other.b):
            raise MismatchedSettings(
                f"cannot merge counts at ({self.a}, {self.b}) and ({other.a}, {other.b})")
        return JointCounts(self.a, self.b,
                           self.n_pp + other.n_pp, self.n_pm + other.n_pm,
                           self.n_mp + other.n_mp, self.n_mm + other.n_mm)

    @classmethod
    def from_cells(cls, a: float, b: float, cells: Sequence[int]) -> "JointCounts":
        n_pp, n_pm, n_mp, n_mm = (int(c) for c in cells)
        return cls(a, b, n_pp, n_pm, n_mp, n_mm)

    @classmethod
    def from_outcomes(cls, x: np.ndarray, y: np.ndarray,
                      a: float, b: float) -> "JointCounts":
        """Tally arrays of +/-1 outcomes."""
        return cls.from_cells(a, b, np.bincount(cell_index(x, y), minlength=4))


def cell_index(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Map outcome pairs to 0..3 in the JointCounts cell order."""
    x = np.asarray(x)
    y = np.asarray(y)
    return 2 * (x < 0).astype(np.int64) + (y < 0).astype(np.int64)


@dataclass(frozen=True)
class CorrelationEstimate:
    e_hat: float
    stderr: float
    n: int


@dataclass(frozen=True)
class ChshResult:
    s: float
    stderr: float
    estimates: Tuple[CorrelationEstimate, CorrelationEstimate,
                     CorrelationEstimate, CorrelationEstimate]
    violates_local_bound: bool


def estimate_correlation(c: JointCounts) -> CorrelationEstimate:
    """Empirical E = P(x = y) - P(x != y) and its standard error."""
    n = c.n
    if n == 0:
        raise EmptyCounts(f"no trials at setting pair ({c.a}, {c.b})")
    e_hat = (c.n_pp + c.n_mm - c.n_pm - c.n_mp) / n
    stderr = math.sqrt(max(0.0, 1.0 - e_hat * e_hat) / n)
    return CorrelationEstimate(e_hat, stderr, n)


def chsh(e11: CorrelationEstimate, e12: CorrelationEstimate,
         e21: CorrelationEstimate, e22: CorrelationEstimate) -> ChshResult:
    """S = E11 + E12 + E21 - E22 with errors added in quadrature."""
    s = e11.e_hat + e12.e_hat + e21.e_hat - e22.e_hat
    stderr = math.sqrt(sum(e.stderr**2 for e in (e11, e12, e21, e22)))
    violates = abs(s) - VIOLATION_SIGMAS * stderr > LOCAL_BOUND
    return ChshResult(s, stderr, (e11, e12, e21, e22), violates)


def strategy_value(x1: int, x2: int, y1: int, y2: int) -> int:
    """CHSH value of the deterministic strategy x(a_i) = x_i, y(b_j) = y_j."""
    return x1 * y1 + x1 * y2 + x2 * y1 - x2 * y2


def local_bound_bruteforce(a1=None, a2=None, b1=None, b2=None) -> int:
    """Largest |S| reachable by any of the 16 deterministic local strategies.

    The settings only label the strategy table; the result is always 2.
    """
    return max(abs(strategy_value(*strategy))
               for strategy in itertools.product((1, -1), repeat=4))


def _fixed_and_varying(c: JointCounts, side: str) -> Tuple[float, float]:
    if side == "alice":
        return c.a, c.b
    if side == "bob":
        return c.b, c.a
    raise ValueError(f"side must be 'alice' or 'bob', got {side!r}")


def nosignaling_test(c1: JointCounts, c2: JointCounts, side: str = "alice") -> float:
    """Two-proportion z-statistic for one party's marginal across the other's settings.

    With ``side='alice'`` both tables must share ``a`` and differ in ``b``, and
    the statistic compares P(x = +1); ``side='bob'`` is the mirror image.
    """
    fixed1, varying1 = _fixed_and_varying(c1, side)
    fixed2, varying2 = _fixed_and_varying(c2, side)
    if fixed1 != fixed2:
        raise MismatchedSettings(f"{side}'s settings differ: {fixed1} vs {fixed2}")
    if varying1 == varying2:
        raise MismatchedSettings(
            f"the other party's settings must differ, both are {varying1}")
    if c1.n == 0 or c2.n == 0:
        raise EmptyCounts("nosignaling_test needs trials in both tables")

    if side == "alice":
        successes = np.array([c1.alice_plus, c2.alice_plus])
    else:
        successes = np.array([c1.bob_plus, c2.bob_plus])
    nobs = np.array([c1.n, c2.n])

    pooled = successes.sum() / nobs.sum()
    if pooled in (0.0, 1.0):
        return 0.0
    z, _ = proportions_ztest(successes, nobs)
    return float(z)


def total_variation(c1: JointCounts, c2: JointCounts) -> float:
    """Total-variation distance between two empirical joint distributions."""
    if c1.n == 0 or c2.n == 0:
        raise EmptyCounts("total_variation needs trials in both tables")
    p1 = c1.cells / c1.n
    p2 = c2.cells / c2.n
    return 0.5 * float(np.abs(p1 - p2).sum())


def timing_dependence_test(model_id: str, settings: Iterable[Tuple[float, float]],
                           n: int, seed: int = 0,
                           first: TimingClass = TimingClass.ALICE_FIRST,
                           second: TimingClass = TimingClass.BEFORE_BEFORE) -> float:
    """Largest TV distance between a model's joints in two timing classes.

    Both classes are evaluated on the same hidden-state draws for each setting
    pair, so a model that ignores timing gives exactly zero.
    """
    if n < MIN_TIMING_TRIALS:
        raise ValueError(f"n must be >= {MIN_TIMING_TRIALS}, got {n}")
    model = get_model(model_id)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))

    worst = 0.0
    for a, b in settings:
        a, b = Setting(a), Setting(b)
        hidden = HiddenStates.draw(rng, n)
        tables = []
        for timing in (first, second):
            x, y = model.respond_batch(a, b, timing, hidden)
            tables.append(JointCounts.from_outcomes(x, y, a.angle, b.angle))
        worst = max(worst, total_variation(*tables))
    return worst


def _mutual_information(labels: np.ndarray, bins: np.ndarray,
                        n_labels: int, n_bins: int) -> float:
    joint = np.bincount(labels * n_bins + bins,
                        minlength=n_labels * n_bins).reshape(n_labels, n_bins)
    p = joint / joint.sum()
    outer = p.sum(axis=1, keepdims=True) * p.sum(axis=0, keepdims=True)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / outer[mask])))


@dataclass(frozen=True)
class FreedomAudit:
    """Independence checks between setting choices and hidden variables."""
    correlation_z: float
    mutual_information: float
    mi_threshold: float

    @property
    def passed(self) -> bool:
        return (abs(self.correlation_z) < 4.0
                and self.mutual_information < self.mi_threshold)


def freedom_test(pair_index: np.ndarray, lambdas: np.ndarray,
                 permutations: int = 200, seed: int = 0) -> FreedomAudit:
    """Audit the no-conspiracy assumption on a stream of trials.

    Args:
        pair_index (np.ndarray): Setting-pair index 0..3 per trial (a-index = index // 2)
        lambdas (np.ndarray): Hidden source variable per trial, in [0, 2*pi)
        permutations (int): Size of the permutation null for the MI threshold
        seed (int): Seed of the permutation stream

    Returns:
        FreedomAudit: Pearson z (r * sqrt(n)) between Alice's setting index and
        lambda, plug-in mutual information between pair index and lambda
        quartile, and the mean + 4 std threshold of the permutation null.
    """
    pair_index = np.asarray(pair_index, dtype=np.int64)
    lambdas = np.asarray(lambdas, dtype=float)
    n = len(pair_index)
    if n < 2 or len(lambdas) != n:
        raise ValueError("freedom_test needs two aligned arrays of at least 2 trials")

    a_index = pair_index // 2
    if np.std(a_index) == 0.0 or np.std(lambdas) == 0.0:
        r = 0.0
    else:
        r = float(np.corrcoef(a_index, lambdas)[0, 1])

    quartile = np.minimum((lambdas / (2.0 * math.pi) * 4.0).astype(np.int64), 3)
    mi = _mutual_information(pair_index, quartile, 4, 4)

    rng = np.random.default_rng(seed)
    null = np.array([
        _mutual_information(rng.permutation(pair_index), quartile, 4, 4)
        for _ in range(permutations)
    ])
    threshold = float(null.mean() + 4.0 * null.std())
    return FreedomAudit(r * math.sqrt(n), mi, threshold)


def verdict(result: ChshResult, trials_per_pair: int,
            margin: float = NO_VIOLATION_MARGIN) -> str:
    """Classify a CHSH result as violation, no-violation or inconclusive.

    No verdict is asserted below MIN_VERDICT_TRIALS trials per setting pair.
    """
    if trials_per_pair < MIN_VERDICT_TRIALS:
        return INCONCLUSIVE
    if abs(result.s) - VIOLATION_SIGMAS * result.stderr > LOCAL_BOUND:
        return VIOLATION
    if abs(result.s) + VIOLATION_SIGMAS * result.stderr < LOCAL_BOUND + margin:
        return NO_VIOLATION
    return INCONCLUSIVE


def chsh_from_counts(counts: Sequence[JointCounts]) -> ChshResult:
    """CHSH over four tables ordered (a1,b1), (a1,b2), (a2,b1), (a2,b2)."""
    return chsh(*(estimate_correlation(c) for c in counts))


def analytic_chsh(correlations: Sequence[float]) -> float:
    e11, e12, e21, e22 = (float(e) for e in correlations)
    return e11 + e12 + e21 - e22

