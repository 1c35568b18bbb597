# sweep_module.py
"""
Sweep Module

Configuration schema and execution of parameter sweeps:
- JSON configuration validated against the SweepConfig schema
- Parameter points evaluated over a worker pool, written in grid order
- Figure presets loaded from presets.json
"""

import enum
import json
import logging
import math
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    ValidationError,
    model_validator,
)

from . import __version__
from .integrations.table_writer import TableWriter, table_writer
from .models import CriterionReport, SpinAxis, SystemParams
from .numerics.common import ConfigValidationError, ConfigurationError
from .entanglement_module import evaluate_criteria
from .observables_module import basis_probability_grid
from .photon_loss_module import apply_photon_loss, lossy_photon_distribution_grid
from .wigner_module import conditional_wigner, marginal_wigner, scaled_to_unit_max

logger = logging.getLogger(__name__)

PRESETS_PATH = Path(__file__).with_name("presets.json")
TAU_COLUMN = "tau[hbar/q]"


class SweepTask(str, enum.Enum):
    PHOTON_DIST = "photon-dist"
    WIGNER_CONDITIONAL = "wigner-conditional"
    WIGNER_MARGINAL = "wigner-marginal"
    ENTANGLEMENT = "entanglement"
    FIDELITY = "fidelity"
    EXPECTATIONS = "expectations"
    VARIANCES = "variances"
    CRITERIA = "criteria"
    BASIS_PROBABILITIES = "basis-probabilities"


# Tasks evaluated along the tau grid from one CriterionReport per point
SCALAR_TASKS = (
    SweepTask.ENTANGLEMENT,
    SweepTask.FIDELITY,
    SweepTask.EXPECTATIONS,
    SweepTask.VARIANCES,
    SweepTask.CRITERIA,
)
# Tasks evaluated at the snapshot times only
SNAPSHOT_TASKS = (
    SweepTask.WIGNER_CONDITIONAL,
    SweepTask.WIGNER_MARGINAL,
    SweepTask.BASIS_PROBABILITIES,
)


class TauGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    start: float = 0.0
    stop: float = math.pi / 2
    count: int = Field(201, ge=1)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


class WignerOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k_project: Optional[NonNegativeInt] = Field(None, description="defaults to N // 2")
    which_bec: int = Field(1, ge=1, le=2, description="BEC kept by the marginal field")
    theta_count: int = Field(181, ge=2)
    phi_count: int = Field(361, ge=2)
    per_panel_scale: bool = False


class OutputOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "results"
    format: str = Field("csv", pattern="^(csv|json)$")
    precision: int = Field(12, ge=1, le=17)


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "sweep"
    base: SystemParams
    tau_grid: TauGrid = Field(default_factory=TauGrid)
    chi_bar_list: List[NonNegativeFloat] = Field(default_factory=lambda: [0.0], min_length=1)
    outcome_list: List[Tuple[NonNegativeInt, NonNegativeInt]] = Field(default_factory=list)
    tasks: List[SweepTask] = Field(..., min_length=1)
    snapshot_taus: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    n_max: Optional[NonNegativeInt] = None
    basis_pairs: List[Tuple[SpinAxis, SpinAxis]] = Field(
        default_factory=lambda: [(SpinAxis.Z, SpinAxis.Z), (SpinAxis.X, SpinAxis.X), (SpinAxis.Y, SpinAxis.Y)]
    )
    wigner: WignerOptions = Field(default_factory=WignerOptions)
    output: OutputOptions = Field(default_factory=OutputOptions)

    @model_validator(mode="after")
    def check_projection(self) -> "SweepConfig":
        if self.wigner.k_project is not None and self.wigner.k_project > self.base.n_atoms:
            raise ValueError("wigner.k_project must not exceed base.n_atoms")
        return self

    def outcomes(self) -> List[Tuple[int, int]]:
        if self.outcome_list:
            return [tuple(pair) for pair in self.outcome_list]
        return [(self.base.n_c, self.base.n_d)]

    def photon_cutoff(self) -> int:
        if self.n_max is not None:
            return self.n_max
        alpha = self.base.alpha
        return int(math.ceil(alpha * alpha + 6.0 * alpha)) + 1

    def projection(self) -> int:
        if self.wigner.k_project is not None:
            return self.wigner.k_project
        return self.base.n_atoms // 2


def _error_path(error: Dict[str, Any]) -> str:
    path = ".".join(str(part) for part in error["loc"])
    return f"{path}: {error['msg']}" if path else error["msg"]


def _projection_errors(data: Dict[str, Any]) -> List[str]:
    """k_project bound checked on the raw input, so it is reported next to field errors."""
    base = data.get("base")
    wigner = data.get("wigner")
    if not isinstance(base, dict) or not isinstance(wigner, dict):
        return []
    n_atoms, k_project = base.get("n_atoms"), wigner.get("k_project")
    if isinstance(n_atoms, int) and isinstance(k_project, int) and k_project > n_atoms:
        return [f"wigner.k_project: must not exceed base.n_atoms ({k_project} > {n_atoms})"]
    return []


def validate_config(raw_text: str) -> SweepConfig:
    """
    Parse and validate a JSON sweep configuration.

    Raises:
        ConfigValidationError: with every error found, each prefixed by its
            dotted field path, or the line and column of a parse error
    """
    try:
        data = json.loads(raw_text)
    except json.JSONDecodeError as e:
        logger.error(f"Error parsing configuration: {str(e)}")
        raise ConfigValidationError([f"line {e.lineno}, column {e.colno}: {e.msg}"])
    if not isinstance(data, dict):
        raise ConfigValidationError(["<root>: configuration must be a JSON object"])
    try:
        return SweepConfig.model_validate(data)
    except ValidationError as e:
        errors = [_error_path(error) for error in e.errors()]
        if not any(error.startswith("wigner.k_project") for error in errors):
            errors.extend(_projection_errors(data))
        raise ConfigValidationError(errors)


def load_config(path: Path) -> SweepConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigValidationError([f"<file>: cannot read {path}: {e}"])
    return validate_config(text)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _load_preset_table() -> List[Dict[str, Any]]:
    with open(PRESETS_PATH, encoding="utf-8") as handle:
        return json.load(handle)["presets"]


def list_presets() -> List[Tuple[str, str]]:
    """(name, description) for every preset, in file order."""
    return [
        (name, entry.get("description", ""))
        for entry in _load_preset_table()
        for name in entry["names"]
    ]


def preset_config(name: str, output_directory: Optional[str] = None) -> SweepConfig:
    """
    Build the SweepConfig of a named preset.

    Raises:
        ConfigurationError: if no preset has that name
    """
    for entry in _load_preset_table():
        if name in entry["names"]:
            data = json.loads(json.dumps(entry["config"]))
            data["name"] = name
            if output_directory is not None:
                data.setdefault("output", {})["directory"] = output_directory
            return SweepConfig.model_validate(data)
    raise ConfigurationError(f"Unknown preset: {name}")


# ---------------------------------------------------------------------------
# Point evaluation
# ---------------------------------------------------------------------------

def _evaluate_point(job: Tuple[Dict[str, Any], Optional[Dict[str, Any]]]) -> Dict[str, Any]:
    """Worker entry point; module-level so the pool can pickle it."""
    params_data, snapshot = job
    params = SystemParams(**params_data)
    rho = apply_photon_loss(params)
    if snapshot is None:
        return {"report": evaluate_criteria(rho, params).model_dump()}

    result: Dict[str, Any] = {}
    grid = (snapshot["theta_count"], snapshot["phi_count"])
    if SweepTask.WIGNER_CONDITIONAL.value in snapshot["tasks"]:
        field = conditional_wigner(rho, snapshot["k_project"], grid)
        if snapshot["per_panel_scale"]:
            field = scaled_to_unit_max(field)
        result["wigner-conditional"] = _field_rows(field)
    if SweepTask.WIGNER_MARGINAL.value in snapshot["tasks"]:
        field = marginal_wigner(rho, snapshot["which_bec"], grid)
        if snapshot["per_panel_scale"]:
            field = scaled_to_unit_max(field)
        result["wigner-marginal"] = _field_rows(field)
    if SweepTask.BASIS_PROBABILITIES.value in snapshot["tasks"]:
        result["basis-probabilities"] = {
            f"{b1}{b2}": basis_probability_grid(rho, SpinAxis(b1), SpinAxis(b2)).tolist()
            for b1, b2 in snapshot["basis_pairs"]
        }
    return result


def _field_rows(field) -> List[List[float]]:
    theta, phi = np.meshgrid(field.theta_grid, field.phi_grid, indexing="ij")
    return np.column_stack([theta.ravel(), phi.ravel(), field.values.ravel()]).tolist()


def _map_ordered(jobs: List[Any], workers: int) -> List[Any]:
    """Evaluate jobs, returning results in job order whatever the completion order."""
    if workers <= 1 or len(jobs) <= 1:
        return [_evaluate_point(job) for job in jobs]
    with Pool(processes=workers) as pool:
        return pool.map(_evaluate_point, jobs)


# ---------------------------------------------------------------------------
# Table layouts
# ---------------------------------------------------------------------------

def _scalar_table(task: SweepTask, reports: List[CriterionReport]) -> Tuple[List[str], List[List[Any]]]:
    if task is SweepTask.ENTANGLEMENT:
        columns = [TAU_COLUMN, "E", "E/E_max"]
        rows = [[r.tau, r.log_negativity, r.log_negativity_normalized] for r in reports]
    elif task is SweepTask.FIDELITY:
        columns = [TAU_COLUMN, "F"]
        rows = [[r.tau, r.epr_fidelity] for r in reports]
    elif task is SweepTask.EXPECTATIONS:
        keys = ["S1x", "S1y", "S1z", "S2x", "S2y", "S2z"]
        columns = [TAU_COLUMN] + [f"<{key}>" for key in keys]
        rows = [[r.tau] + [r.expectations[key] for key in keys] for r in reports]
    elif task is SweepTask.VARIANCES:
        keys = ["S1x-S2x", "S1y-S2y", "S1z+S2z"]
        columns = [TAU_COLUMN] + [f"Var({key})" for key in keys]
        rows = [[r.tau] + [r.variances[key] for key in keys] for r in reports]
    else:
        columns = [
            TAU_COLUMN, "C_ent", "C_DGCZ", "xi2", "xi2/2", "C_steer_1to2",
            "zeta_opt[rad]", "theta[rad]", "phi[rad]",
        ]
        rows = []
        for r in reports:
            theta, phi = r.mean_spin_angles if r.mean_spin_angles else (None, None)
            rows.append([
                r.tau, r.c_ent, r.c_dgcz, r.xi_squared, r.xi_squared_rescaled,
                r.c_steer_1to2, r.zeta_opt, theta, phi,
            ])
    return columns, rows


def _label(value: float) -> str:
    return format(value, ".6g")


def _table_params(params: SystemParams, with_tau: bool) -> Dict[str, Any]:
    data = params.model_dump()
    if not with_tau:
        data.pop("tau")
    return data


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

def run_sweep(
    config: SweepConfig, output_directory: Optional[str] = None, workers: int = 1
) -> Dict[str, Any]:
    """
    Evaluate every requested task and write one table per (task, outcome, chi_bar).

    Snapshot tasks get one table per snapshot tau as well. Identical
    configurations produce byte-identical files.

    Args:
        config: Validated sweep configuration
        output_directory: Overrides config.output.directory
        workers: Worker processes for independent parameter points

    Returns:
        The manifest written next to the tables
    """
    writer: TableWriter = table_writer.configure(
        precision=config.output.precision, fmt=config.output.format
    )
    directory = writer.prepare_directory(Path(output_directory or config.output.directory))
    tasks = set(config.tasks)
    taus = config.tau_grid.values()
    entries: List[Dict[str, Any]] = []
    logger.info(f"Running sweep '{config.name}' with {len(config.tasks)} tasks on {workers} worker(s)")

    # Photon distributions depend on (chi_bar, tau) only
    if SweepTask.PHOTON_DIST in tasks:
        n_max = config.photon_cutoff()
        for chi_bar in config.chi_bar_list:
            for tau in config.snapshot_taus:
                grid = lossy_photon_distribution_grid(
                    config.base.n_atoms, config.base.alpha, tau, chi_bar, n_max
                )
                rows = [[n_c, n_d, grid[n_c, n_d]] for n_c in range(n_max + 1) for n_d in range(n_max + 1)]
                params = config.base.updated(tau=tau, chi_bar=chi_bar, n_c=0, n_d=0)
                entry = writer.write_table(
                    directory, f"photon-dist__chi{_label(chi_bar)}__tau{_label(tau)}",
                    ["n_c", "n_d", "P"], rows,
                )
                entry.update(task=SweepTask.PHOTON_DIST.value, params=_table_params(params, True))
                entries.append(entry)

    scalar_tasks = [task for task in SCALAR_TASKS if task in tasks]
    if scalar_tasks:
        points = [
            (outcome, chi_bar, tau)
            for outcome in config.outcomes()
            for chi_bar in config.chi_bar_list
            for tau in taus
        ]
        jobs = [
            (config.base.updated(n_c=o[0], n_d=o[1], chi_bar=c, tau=float(t)).model_dump(), None)
            for o, c, t in points
        ]
        results = _map_ordered(jobs, workers)
        offset = 0
        for outcome in config.outcomes():
            for chi_bar in config.chi_bar_list:
                reports = [
                    CriterionReport(**results[offset + i]["report"]) for i in range(len(taus))
                ]
                offset += len(taus)
                params = config.base.updated(n_c=outcome[0], n_d=outcome[1], chi_bar=chi_bar)
                for task in scalar_tasks:
                    columns, rows = _scalar_table(task, reports)
                    entry = writer.write_table(
                        directory,
                        f"{task.value}__nc{outcome[0]}_nd{outcome[1]}__chi{_label(chi_bar)}",
                        columns, rows,
                    )
                    entry.update(
                        task=task.value,
                        params=_table_params(params, False),
                        tau_grid=config.tau_grid.model_dump(),
                    )
                    entries.append(entry)

    snapshot_tasks = [task for task in SNAPSHOT_TASKS if task in tasks]
    if snapshot_tasks:
        snapshot = {
            "tasks": [task.value for task in snapshot_tasks],
            "k_project": config.projection(),
            "which_bec": config.wigner.which_bec,
            "theta_count": config.wigner.theta_count,
            "phi_count": config.wigner.phi_count,
            "per_panel_scale": config.wigner.per_panel_scale,
            "basis_pairs": [(b1.value, b2.value) for b1, b2 in config.basis_pairs],
        }
        points = [
            (outcome, chi_bar, tau)
            for outcome in config.outcomes()
            for chi_bar in config.chi_bar_list
            for tau in config.snapshot_taus
        ]
        jobs = [
            (config.base.updated(n_c=o[0], n_d=o[1], chi_bar=c, tau=t).model_dump(), snapshot)
            for o, c, t in points
        ]
        results = _map_ordered(jobs, workers)
        for (outcome, chi_bar, tau), result in zip(points, results):
            params = config.base.updated(n_c=outcome[0], n_d=outcome[1], chi_bar=chi_bar, tau=tau)
            suffix = f"nc{outcome[0]}_nd{outcome[1]}__chi{_label(chi_bar)}__tau{_label(tau)}"
            for key in ("wigner-conditional", "wigner-marginal"):
                if key in result:
                    entry = writer.write_table(
                        directory, f"{key}__{suffix}", ["theta[rad]", "phi[rad]", "W"], result[key]
                    )
                    entry.update(task=key, params=_table_params(params, True))
                    entries.append(entry)
            for pair, grid in result.get("basis-probabilities", {}).items():
                rows = [
                    [k1, k2, grid[k1][k2]] for k1 in range(len(grid)) for k2 in range(len(grid))
                ]
                entry = writer.write_table(
                    directory, f"basis-probabilities-{pair}__{suffix}", ["k1", "k2", "p"], rows
                )
                entry.update(
                    task=SweepTask.BASIS_PROBABILITIES.value,
                    basis=pair,
                    params=_table_params(params, True),
                )
                entries.append(entry)

    manifest = {
        "tool": "qnd-becs",
        "version": __version__,
        "config": config.model_dump(mode="json"),
        "files": entries,
    }
    writer.write_manifest(directory, manifest)
    logger.info(f"Sweep '{config.name}' wrote {len(entries)} tables to {directory}")
    return manifest
