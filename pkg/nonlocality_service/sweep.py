"""
Parameter Sweeps - Grids of Svetlichny values over scenario parameters
Evaluates the closed forms (and optionally the numeric oracle) on 2-D grids,
writes CSV plus a JSON summary, and reports connected S > 8 regions
"""

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, Field, ValidationError, model_validator
from scipy import ndimage

from .config import settings
from .errors import InvalidConfig, InvalidScenario, ParseError, UnknownPreset
from .oracle import OracleConfig, maximize, svetlichny_value
from .qstate import DensityOperator, dephase, depolarize
from .spacetime import (
    SchwarzschildScenario,
    SdSScenario,
    build_sds_state,
    reduce_schwarzschild,
    svetlichny_schwarzschild,
    svetlichny_sds,
)
from .svetlichny import Branch, SvetlichnyResult

logger = structlog.get_logger()


Scenario = Literal["schwarzschild", "sds", "custom-matrix"]

AXIS_FIELDS: Dict[str, Dict[str, str]] = {
    "schwarzschild": {"T": "temperature", "alpha": "alpha", "M": "mass", "omega": "omega"},
    "sds": {"Lambda": "lambda_cosmo", "alpha": "alpha", "M": "mass", "omega": "omega"},
    "custom-matrix": {"visibility": "visibility", "dephasing": "dephasing"},
}

CSV_HEADER = ["axis1", "axis2", "S", "N_measure", "branch"]
AUDIT_HEADER = ["S_oracle", "gap"]


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def resolve_seed(seed: int) -> int:
    """SVET_SEED from the environment wins over any configured seed"""
    return settings.SVET_SEED if settings.SVET_SEED is not None else seed


# =========================================================================== #
# Configuration                                                               #
# =========================================================================== #


class Axis(BaseModel):
    name: str
    min: float
    max: float
    steps: int = Field(..., ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.min < self.max:
            raise ValueError(f"Axis {self.name}: min {self.min} must be below max {self.max}")
        return self

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """NAME:MIN:MAX:STEPS, e.g. T:0.001:3:101"""
        parts = text.split(":")
        if len(parts) != 4:
            raise InvalidConfig(f"Axis must look like NAME:MIN:MAX:STEPS, got {text!r}")
        try:
            return cls(name=parts[0], min=float(parts[1]), max=float(parts[2]), steps=int(parts[3]))
        except (ValueError, ValidationError) as e:
            raise InvalidConfig(f"Invalid axis {text!r}: {e}") from e

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)

    def __str__(self) -> str:
        return f"{self.name}:{self.min:g}:{self.max:g}:{self.steps}"


class SweepConfig(BaseModel):
    """One 2-D grid over a scenario; parameters not on an axis are fixed"""

    scenario: Scenario = "schwarzschild"
    label: Optional[str] = None

    omega: float = Field(1.0, gt=0.0)
    alpha: Optional[float] = Field(None, ge=0.0, le=1.0)
    temperature: Optional[float] = Field(None, gt=0.0)
    mass: Optional[float] = Field(None, gt=0.0)
    lambda_cosmo: Optional[float] = Field(None, gt=0.0)
    n: int = Field(1, ge=1, le=3)
    p: Optional[int] = Field(None, ge=0)
    q: Optional[int] = Field(None, ge=0)
    m: Optional[int] = Field(None, ge=1, le=3)
    matrix: Optional[Dict[str, Any]] = None
    visibility: float = Field(1.0, ge=0.0, le=1.0)
    dephasing: float = Field(0.0, ge=0.0, le=1.0)

    axis1: Axis
    axis2: Axis

    audit: bool = False
    oracle_restarts: int = Field(4, ge=1)
    threshold: float = Field(default_factory=lambda: settings.NONLOCALITY_THRESHOLD)
    out: Optional[str] = None
    rng_seed: int = Field(default_factory=lambda: settings.ORACLE_SEED, ge=0, lt=2**63)
    workers: int = Field(default_factory=lambda: settings.SWEEP_WORKERS, ge=1)

    @model_validator(mode="after")
    def _axes_fit_scenario(self):
        allowed = AXIS_FIELDS[self.scenario]
        for axis in (self.axis1, self.axis2):
            if axis.name not in allowed:
                raise ValueError(
                    f"Axis {axis.name!r} is not valid for {self.scenario}; "
                    f"choose from {sorted(allowed)}"
                )
        if self.axis1.name == self.axis2.name:
            raise ValueError("axis1 and axis2 must differ")

        swept = {allowed[a.name] for a in (self.axis1, self.axis2)}
        if self.scenario == "schwarzschild":
            if "alpha" not in swept and self.alpha is None:
                raise ValueError("alpha is required unless swept")
            if not swept & {"temperature", "mass"} and self.temperature is None and self.mass is None:
                raise ValueError("temperature or mass is required unless swept")
        elif self.scenario == "sds":
            for name in ("alpha", "mass", "lambda_cosmo"):
                if name not in swept and getattr(self, name) is None:
                    raise ValueError(f"{name} is required unless swept")
        elif self.matrix is None:
            raise ValueError("custom-matrix sweeps need a matrix")
        else:
            DensityOperator.from_json(self.matrix)
        return self

    @classmethod
    def parse(cls, payload: Dict[str, Any]) -> "SweepConfig":
        """Validate a JSON-style mapping, raising InvalidConfig on failure"""
        try:
            return cls.model_validate(payload)
        except ValidationError as e:
            raise InvalidConfig(str(e)) from e


@dataclass(frozen=True)
class SweepCell:
    axis1_value: float
    axis2_value: float
    value: float
    measure: float
    branch: Branch
    oracle_value: Optional[float] = None
    oracle_gap: Optional[float] = None

    def csv_row(self, audit: bool) -> List[str]:
        row = [
            _fmt(self.axis1_value),
            _fmt(self.axis2_value),
            _fmt(self.value),
            _fmt(self.measure),
            self.branch.value,
        ]
        if audit:
            row += [_fmt(self.oracle_value), _fmt(self.oracle_gap)]
        return row


# =========================================================================== #
# Cell evaluation                                                             #
# =========================================================================== #


def _point_parameters(cfg: SweepConfig, v1: float, v2: float) -> Dict[str, Any]:
    fields = AXIS_FIELDS[cfg.scenario]
    params = cfg.model_dump(
        include={"alpha", "omega", "temperature", "mass", "lambda_cosmo", "n", "p", "q", "m",
                 "visibility", "dephasing"}
    )
    params[fields[cfg.axis1.name]] = float(v1)
    params[fields[cfg.axis2.name]] = float(v2)
    if cfg.scenario == "schwarzschild" and {fields[cfg.axis1.name], fields[cfg.axis2.name]} & {"temperature", "mass"}:
        # a swept temperature replaces a fixed mass and vice versa
        swept_temperature = "temperature" in (fields[cfg.axis1.name], fields[cfg.axis2.name])
        params["mass" if swept_temperature else "temperature"] = None
    return params


def point_scenario(cfg: SweepConfig, v1: float, v2: float):
    """Scenario object (or noisy density operator) for one grid point"""
    params = _point_parameters(cfg, v1, v2)
    try:
        if cfg.scenario == "schwarzschild":
            p = params["p"] if params["p"] is not None else params["n"] - (params["q"] or 0)
            q = params["q"] if params["q"] is not None else params["n"] - p
            return SchwarzschildScenario(
                alpha=params["alpha"], omega=params["omega"], temperature=params["temperature"],
                mass=params["mass"], n=params["n"], p=p, q=q,
            )
        if cfg.scenario == "sds":
            m = params["m"] if params["m"] is not None else 4 - params["n"]
            return SdSScenario(
                alpha=params["alpha"], omega=params["omega"], mass=params["mass"],
                lambda_cosmo=params["lambda_cosmo"], n=params["n"], m=m,
            )
    except ValidationError as e:
        raise InvalidScenario(f"Invalid scenario at ({v1}, {v2}): {e}") from e

    rho = DensityOperator.from_json(cfg.matrix)
    return dephase(depolarize(rho, params["visibility"]), params["dephasing"])


def evaluate_point(cfg: SweepConfig, v1: float, v2: float, cell_index: int = 0) -> SweepCell:
    """
    Svetlichny value at one grid point, audited against the oracle if requested

    The oracle seed for the cell is rng_seed XOR cell_index.
    """
    target = point_scenario(cfg, v1, v2)
    seed = resolve_seed(cfg.rng_seed) ^ cell_index
    oracle_cfg = OracleConfig(restarts=cfg.oracle_restarts, rng_seed=seed)

    if isinstance(target, SchwarzschildScenario):
        result: SvetlichnyResult = svetlichny_schwarzschild(target)
        rho = reduce_schwarzschild(target) if cfg.audit else None
    elif isinstance(target, SdSScenario):
        result = svetlichny_sds(target)
        rho = build_sds_state(target) if cfg.audit else None
    else:
        result = svetlichny_value(target, oracle_cfg)
        rho = target

    if not cfg.audit:
        return SweepCell(v1, v2, result.value, result.measure, result.branch)

    outcome = maximize(rho, oracle_cfg)
    return SweepCell(
        v1, v2, result.value, result.measure, result.branch,
        oracle_value=outcome.value,
        oracle_gap=result.value - outcome.value,
    )


def _evaluate_row(payload: Tuple[Dict[str, Any], int]) -> List[SweepCell]:
    config_json, row = payload
    cfg = SweepConfig.model_validate(config_json)
    v1 = cfg.axis1.values()[row]
    width = cfg.axis2.steps
    cells = [
        evaluate_point(cfg, float(v1), float(v2), row * width + col)
        for col, v2 in enumerate(cfg.axis2.values())
    ]
    logger.debug("sweep_row_evaluated", row=row, cells=len(cells))
    return cells


# =========================================================================== #
# Running and reporting                                                       #
# =========================================================================== #


def run_sweep(cfg: SweepConfig) -> Tuple[List[SweepCell], Dict[str, Any]]:
    """
    Evaluate the full grid, axis1-major

    Rows are distributed over cfg.workers processes and gathered in row
    order, so the output does not depend on the worker count.

    Returns:
        (cells, summary); when cfg.out is set the CSV and
        <out>.summary.json are written as well
    """
    started = time.perf_counter()
    rows = cfg.axis1.steps
    logger.info(
        "sweep_started",
        scenario=cfg.scenario,
        label=cfg.label,
        axis1=str(cfg.axis1),
        axis2=str(cfg.axis2),
        audit=cfg.audit,
        workers=cfg.workers,
    )

    payloads = [(cfg.model_dump(mode="json"), row) for row in range(rows)]
    try:
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                grid = list(pool.map(_evaluate_row, payloads))
        else:
            grid = [_evaluate_row(payload) for payload in payloads]
    except Exception as e:
        logger.error("sweep_failed", label=cfg.label, error=str(e))
        raise

    cells = [cell for row in grid for cell in row]
    summary = build_summary(cfg, cells)

    if cfg.out:
        write_csv(cfg.out, cells, cfg.audit)
        write_summary(summary_path(cfg.out), summary)

    logger.info(
        "sweep_complete",
        label=cfg.label,
        cells=len(cells),
        max_S=summary["max_S"]["value"],
        elapsed_s=round(time.perf_counter() - started, 3),
    )
    return cells, summary


def summary_path(out: str) -> Path:
    return Path(f"{out}.summary.json")


def write_csv(path: str, cells: List[SweepCell], audit: bool):
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER + (AUDIT_HEADER if audit else []))
        for cell in cells:
            writer.writerow(cell.csv_row(audit))


def write_summary(path, summary: Dict[str, Any]):
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _branch_transitions(cfg: SweepConfig, cells: List[SweepCell]) -> List[Dict[str, Any]]:
    """Neighbouring cells on different branches, scanned along rows then columns"""
    rows, width = cfg.axis1.steps, cfg.axis2.steps
    branches = np.array([c.branch.value for c in cells]).reshape(rows, width)
    transitions = []
    for row in range(rows):
        for col in range(width - 1):
            if branches[row, col] != branches[row, col + 1]:
                left, right = cells[row * width + col], cells[row * width + col + 1]
                transitions.append({
                    "axis1": left.axis1_value,
                    "axis2_between": [left.axis2_value, right.axis2_value],
                    "from": left.branch.value,
                    "to": right.branch.value,
                })
    for col in range(width):
        for row in range(rows - 1):
            if branches[row, col] != branches[row + 1, col]:
                lower, upper = cells[row * width + col], cells[(row + 1) * width + col]
                transitions.append({
                    "axis2": lower.axis2_value,
                    "axis1_between": [lower.axis1_value, upper.axis1_value],
                    "from": lower.branch.value,
                    "to": upper.branch.value,
                })
    return transitions


def build_summary(cfg: SweepConfig, cells: List[SweepCell]) -> Dict[str, Any]:
    """Extremes, threshold cells, branch boundaries, audit statistics and findings"""
    values = np.array([c.value for c in cells])
    best, worst = int(np.argmax(values)), int(np.argmin(values))
    above = [
        [c.axis1_value, c.axis2_value] for c in cells if c.value > cfg.threshold
    ]
    diagonal_cells = sum(1 for c in cells if c.branch is Branch.DIAGONAL)

    summary: Dict[str, Any] = {
        "scenario": cfg.scenario,
        "label": cfg.label,
        "axis1": cfg.axis1.model_dump(),
        "axis2": cfg.axis2.model_dump(),
        "seed": resolve_seed(cfg.rng_seed),
        "threshold": cfg.threshold,
        "max_S": {"value": float(values[best]), "axis1": cells[best].axis1_value, "axis2": cells[best].axis2_value},
        "min_S": {"value": float(values[worst]), "axis1": cells[worst].axis1_value, "axis2": cells[worst].axis2_value},
        "cells_above_threshold": above,
        "branch_counts": {
            b.value: sum(1 for c in cells if c.branch is b) for b in Branch
        },
        "branch_transitions": _branch_transitions(cfg, cells),
    }

    findings = []
    if above:
        findings.append(f"{len(above)} of {len(cells)} cells exceed S = {cfg.threshold:g}")
    else:
        findings.append(f"none found: no cell exceeds S = {cfg.threshold:g}")
    interior = cfg.q if cfg.q is not None else cfg.n - (cfg.p if cfg.p is not None else cfg.n)
    if cfg.scenario == "schwarzschild" and interior >= 2:
        findings.append(
            "interior-mode panel with q >= 2: coherence term is at most "
            "8 sqrt2 sin^2 < 8 and the diagonal term at most 4 sqrt2"
        )
    if diagonal_cells:
        findings.append(
            f"{diagonal_cells} cells on the diagonal branch, where the closed form is an upper bound"
        )

    if cfg.audit:
        tolerance = settings.AUDIT_GAP_TOLERANCE
        gaps = np.array([c.oracle_gap for c in cells])
        coherence_gaps = np.array([c.oracle_gap for c in cells if c.branch is not Branch.DIAGONAL])
        flagged = int(np.sum(np.abs(coherence_gaps) > tolerance)) if coherence_gaps.size else 0
        summary["audit"] = {
            "tolerance": tolerance,
            "max_abs_gap": float(np.max(np.abs(gaps))),
            "max_abs_gap_coherence": float(np.max(np.abs(coherence_gaps))) if coherence_gaps.size else 0.0,
            "min_gap": float(np.min(gaps)),
            "flagged_cells": flagged,
        }
        if flagged:
            findings.append(f"{flagged} coherence-branch cells disagree with the oracle beyond {tolerance:g}")
            logger.warning("sweep_audit_flagged", label=cfg.label, flagged=flagged)
        if np.min(gaps) < -1e-6:
            findings.append("oracle exceeded the closed form on at least one cell")

    summary["findings"] = findings
    return summary


# =========================================================================== #
# Figure presets                                                              #
# =========================================================================== #

PRESET_STEPS = 101
SCHWARZSCHILD_PANELS = {
    "fig2": [(1, 1, 0), (1, 0, 1)],
    "fig3": [(2, 2, 0), (2, 1, 1), (2, 0, 2)],
    "fig4": [(3, 3, 0), (3, 2, 1), (3, 1, 2), (3, 0, 3)],
}
SDS_PANELS = [(3, 1), (2, 2), (1, 3)]


def figure_preset(name: str, steps: int = PRESET_STEPS, **overrides) -> List[SweepConfig]:
    """
    Panel configurations for the published figures

    fig2/3/4 sweep (T, alpha) for n = 1, 2, 3 over every (p, q); fig5 sweeps
    (Lambda, alpha) at M = 0.033; fig6 sweeps (M, alpha) at Lambda = 1.
    Axis extents are reconstructions: T in [1e-3, 3], Lambda in [1e-4, 1],
    M in [1e-3, 0.33].

    Raises:
        UnknownPreset: For any other name
    """
    alpha_axis = Axis(name="alpha", min=0.0, max=1.0, steps=steps)
    if name in SCHWARZSCHILD_PANELS:
        configs = [
            SweepConfig(
                scenario="schwarzschild",
                label=f"{name}_n{n}p{p}q{q}",
                omega=1.0, n=n, p=p, q=q,
                axis1=Axis(name="T", min=1e-3, max=3.0, steps=steps),
                axis2=alpha_axis,
                **overrides,
            )
            for n, p, q in SCHWARZSCHILD_PANELS[name]
        ]
    elif name == "fig5":
        configs = [
            SweepConfig(
                scenario="sds", label=f"fig5_n{n}m{m}", omega=1.0, mass=0.033, n=n, m=m,
                axis1=Axis(name="Lambda", min=1e-4, max=1.0, steps=steps),
                axis2=alpha_axis,
                **overrides,
            )
            for n, m in SDS_PANELS
        ]
    elif name == "fig6":
        configs = [
            SweepConfig(
                scenario="sds", label=f"fig6_n{n}m{m}", omega=1.0, lambda_cosmo=1.0, n=n, m=m,
                axis1=Axis(name="M", min=1e-3, max=0.33, steps=steps),
                axis2=alpha_axis,
                **overrides,
            )
            for n, m in SDS_PANELS
        ]
    else:
        raise UnknownPreset(f"Unknown preset {name!r}; choose from fig2, fig3, fig4, fig5, fig6")

    logger.debug("figure_preset_expanded", preset=name, panels=[c.label for c in configs])
    return configs


# =========================================================================== #
# Region report                                                               #
# =========================================================================== #


def _read_grid(csv_path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    path = Path(csv_path)
    try:
        with path.open(newline="") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}") from e

    if not rows:
        raise ParseError(f"{path} holds no grid cells")
    missing = {"axis1", "axis2", "S"} - set(rows[0])
    if missing:
        raise ParseError(f"{path} lacks columns {sorted(missing)}")

    try:
        a1 = np.array([float(r["axis1"]) for r in rows])
        a2 = np.array([float(r["axis2"]) for r in rows])
        values = np.array([float(r["S"]) for r in rows])
    except (TypeError, ValueError) as e:
        raise ParseError(f"Non-numeric entry in {path}: {e}") from e

    axis1 = np.array(list(dict.fromkeys(a1.tolist())))
    axis2 = np.array(list(dict.fromkeys(a2.tolist())))
    if len(rows) != len(axis1) * len(axis2):
        raise ParseError(
            f"{path} has {len(rows)} rows, not a full {len(axis1)}x{len(axis2)} grid"
        )
    return axis1, axis2, values.reshape(len(axis1), len(axis2))


def region_report(csv_path, threshold: Optional[float] = None) -> Dict[str, Any]:
    """
    Connected (4-neighbour) regions of a sweep CSV where S exceeds the threshold

    Raises:
        ParseError: Empty, unreadable or ragged CSV
    """
    threshold = settings.NONLOCALITY_THRESHOLD if threshold is None else threshold
    axis1, axis2, grid = _read_grid(csv_path)

    labels, count = ndimage.label(grid > threshold)
    regions = []
    for index, box in enumerate(ndimage.find_objects(labels), start=1):
        members = labels == index
        peak = np.unravel_index(np.argmax(np.where(members, grid, -np.inf)), grid.shape)
        regions.append({
            "cells": int(members.sum()),
            "axis1_range": [float(axis1[box[0].start]), float(axis1[box[0].stop - 1])],
            "axis2_range": [float(axis2[box[1].start]), float(axis2[box[1].stop - 1])],
            "max_S": float(grid[peak]),
            "argmax": [float(axis1[peak[0]]), float(axis2[peak[1]])],
        })

    report = {
        "source": str(csv_path),
        "threshold": threshold,
        "grid": [len(axis1), len(axis2)],
        "max_S": float(grid.max()),
        "regions": regions,
        "finding": f"{count} region(s) with S > {threshold:g}" if count else "none found",
    }
    logger.info("region_report_complete", source=str(csv_path), regions=count)
    return report
