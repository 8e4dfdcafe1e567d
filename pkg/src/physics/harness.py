import logging
import os
import numpy as np
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed

from src.core.exceptions import TimingDegenerate
from src.core.experiment import (DEFAULT_EPSILON, ExperimentGeometry,
                                 TimingClass, classify_timing)
from src.physics.models import CausalModel, HiddenStates, Setting, get_model
from src.physics.statistics import (INCONCLUSIVE, NO_VIOLATION, VIOLATION,
                                    ChshResult, CorrelationEstimate,
                                    JointCounts, analytic_chsh, cell_index,
                                    chsh, estimate_correlation,
                                    nosignaling_test, verdict)
from src.utils.geometry import (CHSH_ALICE_SETTINGS, CHSH_BOB_SETTINGS,
                                before_before_geometry, standard_geometry)

logger = logging.getLogger(__name__)

# Labels of the two independent random streams derived from the config seed.
SETTINGS_STREAM = 0
HIDDEN_STREAM = 1

# Trials per hidden-state block. Fixed so counts do not depend on worker count.
BLOCK_SIZE = 1 << 16

WORKERS_ENV = "BELLSIM_MAX_WORKERS"
MAX_SEED = 2**64


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines one experiment run."""
    geometry: ExperimentGeometry
    model_id: str
    alice_settings: Tuple[float, float]
    bob_settings: Tuple[float, float]
    trials_per_pair: int
    seed: int
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        get_model(self.model_id)
        for name in ("alice_settings", "bob_settings"):
            settings = tuple(Setting(float(a)).angle for a in getattr(self, name))
            if len(settings) != 2:
                raise ValueError(f"{name} must hold exactly two settings")
            if settings[0] == settings[1]:
                raise ValueError(f"{name} must hold two distinct settings")
            object.__setattr__(self, name, settings)
        if int(self.trials_per_pair) < 1:
            raise ValueError(f"trials_per_pair must be >= 1, got {self.trials_per_pair}")
        if not 0 <= int(self.seed) < MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def setting_pairs(self) -> List[Tuple[float, float]]:
        """Setting pairs in CHSH order (a1,b1), (a1,b2), (a2,b1), (a2,b2)."""
        return [(a, b) for a in self.alice_settings for b in self.bob_settings]

    def mirrored(self) -> "ExperimentConfig":
        """Exchange the two parties: arms, velocities and settings."""
        return replace(self, geometry=self.geometry.mirrored(),
                       alice_settings=self.bob_settings,
                       bob_settings=self.alice_settings)


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    timing_class: TimingClass
    counts: Tuple[JointCounts, ...]
    estimates: Tuple[CorrelationEstimate, ...]
    chsh: ChshResult
    # Rows: Alice's marginal at a1, a2 (b1 vs b2); Bob's at b1, b2 (a1 vs a2)
    nosignaling_z: Tuple[Tuple[float, float], Tuple[float, float]]
    analytic_s: float

    @property
    def seed(self) -> int:
        return self.config.seed


@dataclass
class TrialStream:
    """Setting-pair index and hidden state for each trial, in trial order."""
    pair_index: np.ndarray
    hidden: HiddenStates


def resolve_workers(requested: Optional[int] = None) -> int:
    """Worker count, capped by the BELLSIM_MAX_WORKERS environment variable."""
    workers = 1 if requested is None else max(1, int(requested))
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            logger.warning("ignoring %s=%r: not an integer", WORKERS_ENV, cap)
    return workers


def settings_order(seed: int, trials_per_pair: int) -> np.ndarray:
    """Shuffled setting-pair index per trial, each pair exactly trials_per_pair times.

    Drawn from the settings stream only, which never touches hidden states.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(SETTINGS_STREAM,)))
    order = np.repeat(np.arange(4, dtype=np.int8), trials_per_pair)
    rng.shuffle(order)
    return order


def hidden_block(seed: int, block: int, size: int) -> HiddenStates:
    """Hidden states of one trial block from its own substream."""
    rng = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(HIDDEN_STREAM, block)))
    return HiddenStates.draw(rng, size)


def _block_bounds(total: int) -> List[Tuple[int, int]]:
    return [(start, min(start + BLOCK_SIZE, total))
            for start in range(0, total, BLOCK_SIZE)]


def _count_block(model: CausalModel, timing: TimingClass,
                 alice_angles: np.ndarray, bob_angles: np.ndarray,
                 pair_index: np.ndarray, seed: int, block: int) -> np.ndarray:
    """Counts per (setting pair, outcome cell) for one block, shape (4, 4)."""
    hidden = hidden_block(seed, block, len(pair_index))
    pairs = pair_index.astype(np.int64)
    x, y = model.respond_batch(alice_angles[pairs], bob_angles[pairs], timing, hidden)
    flat = np.bincount(pairs * 4 + cell_index(x, y), minlength=16)
    return flat.reshape(4, 4)


def draw_trials(cfg: ExperimentConfig, limit: Optional[int] = None) -> TrialStream:
    """Reproduce the trial stream of ``cfg`` (optionally only the first ``limit`` trials)."""
    order = settings_order(cfg.seed, cfg.trials_per_pair)
    total = len(order) if limit is None else min(int(limit), len(order))
    lam, aux = [], []
    for block, (start, stop) in enumerate(_block_bounds(total)):
        size = min(BLOCK_SIZE, len(order) - start)
        hidden = hidden_block(cfg.seed, block, size)
        lam.append(hidden.lam[:stop - start])
        aux.append(hidden.aux[:stop - start])
    return TrialStream(order[:total], HiddenStates(np.concatenate(lam), np.concatenate(aux)))


def run_experiment(cfg: ExperimentConfig, n_jobs: Optional[int] = None) -> ExperimentReport:
    """Run the four CHSH setting pairs of ``cfg`` and compute all statistics.

    Raises:
        NotSpacelike, TimingDegenerate: from timing classification
        UnknownModel: for an unregistered model id
    """
    timing = classify_timing(cfg.geometry, cfg.epsilon)
    model = get_model(cfg.model_id)
    pairs = cfg.setting_pairs()
    alice_angles = np.array([a for a, _ in pairs])
    bob_angles = np.array([b for _, b in pairs])

    order = settings_order(cfg.seed, cfg.trials_per_pair)
    bounds = _block_bounds(len(order))
    workers = resolve_workers(n_jobs)
    logger.debug("%s: %d trials in %d blocks on %d worker(s)",
                 cfg.model_id, len(order), len(bounds), workers)

    blocks = Parallel(n_jobs=workers)(
        delayed(_count_block)(model, timing, alice_angles, bob_angles,
                              order[start:stop], cfg.seed, block)
        for block, (start, stop) in enumerate(bounds))
    totals = np.sum(blocks, axis=0)

    counts = tuple(JointCounts.from_cells(a, b, totals[i]) for i, (a, b) in enumerate(pairs))
    estimates = tuple(estimate_correlation(c) for c in counts)
    result = chsh(*estimates)

    c11, c12, c21, c22 = counts
    nosignaling_z = (
        (nosignaling_test(c11, c12, "alice"), nosignaling_test(c21, c22, "alice")),
        (nosignaling_test(c11, c21, "bob"), nosignaling_test(c12, c22, "bob")),
    )
    analytic_s = analytic_chsh([model.correlation(a, b, timing) for a, b in pairs])

    logger.info("%s in %s: S = %.5f +/- %.5f (closed form %.5f)",
                cfg.model_id, timing.value, result.s, result.stderr, analytic_s)
    return ExperimentReport(cfg, timing, counts, estimates, result,
                            nosignaling_z, analytic_s)


SUITE_MODELS = ("quantum", "suarez-scarani", "local")
FIGURES = ("fig1", "fig2")
EXPECTED_VERDICTS: Dict[str, Tuple[str, str]] = {
    "quantum": (VIOLATION, VIOLATION),
    "suarez-scarani": (VIOLATION, NO_VIOLATION),
    "local": (NO_VIOLATION, NO_VIOLATION),
}
# Reported outcome of the before-before experiment: the violation persists.
OBSERVED_EXPERIMENT = (VIOLATION, VIOLATION)


def suite_geometries() -> Dict[str, ExperimentGeometry]:
    return {"fig1": standard_geometry(), "fig2": before_before_geometry()}


@dataclass(frozen=True)
class SuiteCell:
    model_id: str
    figure: str
    report: ExperimentReport
    verdict: str


@dataclass
class SuiteReport:
    trials_per_pair: int
    seed: int
    cells: Dict[Tuple[str, str], SuiteCell] = field(default_factory=dict)

    def verdict_matrix(self) -> Dict[str, Tuple[str, str]]:
        return {model: tuple(self.cells[(model, fig)].verdict for fig in FIGURES)
                for model in SUITE_MODELS}

    @property
    def inconclusive(self) -> bool:
        return any(cell.verdict == INCONCLUSIVE for cell in self.cells.values())

    @property
    def matches_expected(self) -> bool:
        return not self.inconclusive and self.verdict_matrix() == EXPECTED_VERDICTS

    @property
    def refuted_models(self) -> List[str]:
        """Models whose predicted verdicts disagree with the observed experiment."""
        return [model for model, verdicts in self.verdict_matrix().items()
                if INCONCLUSIVE not in verdicts and verdicts != OBSERVED_EXPERIMENT]


def run_discrimination_suite(trials_per_pair: int, seed: int,
                             swap_parties: bool = False,
                             n_jobs: Optional[int] = None) -> SuiteReport:
    """Run every model in the standard and before-before geometries at CHSH angles."""
    suite = SuiteReport(trials_per_pair, seed)
    for model_id in SUITE_MODELS:
        for figure, geometry in suite_geometries().items():
            cfg = ExperimentConfig(geometry, model_id, CHSH_ALICE_SETTINGS,
                                   CHSH_BOB_SETTINGS, trials_per_pair, seed)
            if swap_parties:
                cfg = cfg.mirrored()
            report = run_experiment(cfg, n_jobs=n_jobs)
            cell_verdict = verdict(report.chsh, trials_per_pair)
            logger.info("suite %s/%s (%s): %s", model_id, figure,
                        report.timing_class.value, cell_verdict)
            suite.cells[(model_id, figure)] = SuiteCell(model_id, figure, report, cell_verdict)
    return suite


DEGENERATE = "degenerate"


@dataclass(frozen=True)
class SweepRow:
    beta: float
    timing: str
    s: Optional[float] = None
    stderr: Optional[float] = None
    verdict: Optional[str] = None


def velocity_sweep(cfg: ExperimentConfig, betas: Sequence[float],
                   n_jobs: Optional[int] = None) -> List[SweepRow]:
    """Run ``cfg`` with both devices receding from the source at each speed."""
    rows = []
    for beta in betas:
        moved = replace(cfg, geometry=cfg.geometry.receding(float(beta)))
        try:
            report = run_experiment(moved, n_jobs=n_jobs)
        except TimingDegenerate as exc:
            logger.warning("beta = %.6g skipped: %s", beta, exc)
            rows.append(SweepRow(float(beta), DEGENERATE))
            continue
        rows.append(SweepRow(float(beta), report.timing_class.value,
                             report.chsh.s, report.chsh.stderr,
                             verdict(report.chsh, cfg.trials_per_pair)))
    return rows
