import csv
import math
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Union

import yaml

from src.core.exceptions import ConfigError, InvalidGeometry
from src.core.experiment import DEFAULT_EPSILON, ExperimentGeometry
from src.physics.harness import (FIGURES, MAX_SEED, OBSERVED_EXPERIMENT,
                                 SUITE_MODELS, ExperimentConfig,
                                 ExperimentReport, SuiteReport, SweepRow)
from src.physics.models import MODELS, Setting

GEOMETRY_KEYS = ("source_z", "alice_z", "bob_z", "alice_beta", "bob_beta", "emission_t")
REQUIRED_KEYS = ("geometry", "model", "alice_settings", "bob_settings",
                 "trials_per_pair", "seed")
OPTIONAL_KEYS = ("epsilon",)

RUN_HEADER = ["pair", "a_rad", "b_rad", "n", "n_pp", "n_pm", "n_mp", "n_mm", "e_hat", "stderr"]
PAIR_LABELS = ("11", "12", "21", "22")
SUITE_HEADER = ["model", "fig1_S", "fig1_verdict", "fig2_S", "fig2_verdict"]
SWEEP_HEADER = ["beta", "timing", "S", "stderr", "verdict"]


def _check_keys(section: Mapping[str, Any], required: Sequence[str],
                optional: Sequence[str] = (), prefix: str = "") -> None:
    for key in section:
        if key not in required and key not in optional:
            raise ConfigError(f"{prefix}{key}", "unknown key")
    for key in required:
        if key not in section:
            raise ConfigError(f"{prefix}{key}", "missing required key")


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(key, f"must be finite, got {value!r}")
    return float(value)


def _integer(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return value


def _settings(value: Any, key: str) -> tuple:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(key, "expected a list of exactly two angles in radians")
    angles = tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(value))
    if Setting(angles[0]).angle == Setting(angles[1]).angle:
        raise ConfigError(key, "the two settings must differ modulo 2*pi")
    return angles


def parse_config(document: Any) -> ExperimentConfig:
    """Validate a parsed config document and build the experiment config.

    Raises:
        ConfigError: naming the first offending key
    """
    if not isinstance(document, dict):
        raise ConfigError("<root>", "expected a mapping at the top level")
    _check_keys(document, REQUIRED_KEYS, OPTIONAL_KEYS)

    raw_geometry = document["geometry"]
    if not isinstance(raw_geometry, dict):
        raise ConfigError("geometry", "expected a mapping")
    _check_keys(raw_geometry, GEOMETRY_KEYS, prefix="geometry.")
    values = {key: _number(raw_geometry[key], f"geometry.{key}") for key in GEOMETRY_KEYS}
    for key in ("alice_beta", "bob_beta"):
        if abs(values[key]) >= 1.0:
            raise ConfigError(f"geometry.{key}", f"|beta| must be < 1, got {values[key]}")
    try:
        geometry = ExperimentGeometry(**values)
    except InvalidGeometry as exc:
        raise ConfigError(f"geometry.{exc.field}", str(exc)) from exc

    model_id = document["model"]
    if model_id not in MODELS:
        raise ConfigError("model", f"unknown model {model_id!r}; expected one of {sorted(MODELS)}")

    trials = _integer(document["trials_per_pair"], "trials_per_pair")
    if trials < 1:
        raise ConfigError("trials_per_pair", f"must be >= 1, got {trials}")
    seed = _integer(document["seed"], "seed")
    if not 0 <= seed < MAX_SEED:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    epsilon = _number(document.get("epsilon", DEFAULT_EPSILON), "epsilon")
    if epsilon <= 0.0:
        raise ConfigError("epsilon", f"must be positive, got {epsilon}")

    return ExperimentConfig(
        geometry=geometry,
        model_id=model_id,
        alice_settings=_settings(document["alice_settings"], "alice_settings"),
        bob_settings=_settings(document["bob_settings"], "bob_settings"),
        trials_per_pair=trials,
        seed=seed,
        epsilon=epsilon,
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate a YAML experiment config.

    Raises:
        ConfigError: on unreadable, malformed or invalid files
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"malformed YAML: {exc}") from exc
    return parse_config(document)


def format_float(value: Optional[float]) -> str:
    """Shortest round-trip decimal form; locale independent."""
    return "" if value is None else repr(float(value))


def run_rows(report: ExperimentReport) -> List[List[str]]:
    rows = [RUN_HEADER]
    for label, counts, estimate in zip(PAIR_LABELS, report.counts, report.estimates):
        rows.append([label, format_float(counts.a), format_float(counts.b), str(counts.n),
                     str(counts.n_pp), str(counts.n_pm), str(counts.n_mp), str(counts.n_mm),
                     format_float(estimate.e_hat), format_float(estimate.stderr)])
    rows.append(["S", format_float(report.chsh.s), format_float(report.chsh.stderr)])
    rows.append(["timing", report.timing_class.value])
    return rows


def suite_rows(suite: SuiteReport) -> List[List[str]]:
    rows = [SUITE_HEADER]
    for model_id in SUITE_MODELS:
        row = [model_id]
        for figure in FIGURES:
            cell = suite.cells[(model_id, figure)]
            row += [format_float(cell.report.chsh.s), cell.verdict]
        rows.append(row)
    rows.append(["experiment", *OBSERVED_EXPERIMENT])
    return rows


def sweep_rows(rows: Iterable[SweepRow]) -> List[List[str]]:
    out = [SWEEP_HEADER]
    for row in rows:
        out.append([format_float(row.beta), row.timing, format_float(row.s),
                    format_float(row.stderr), row.verdict or ""])
    return out


def write_csv(path: Union[str, Path], rows: Iterable[Sequence[str]]) -> None:
    """Write rows with ``\\n`` line endings. Raises OSError on I/O failure."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        csv.writer(handle, lineterminator="\n").writerows(rows)
