"""Validation-set parameter selection for calibrators.

Grid search over temperature (and optionally the map parameter gamma_ev),
plus the cheap line-search variant that sweeps temperatures at two probe
gamma values, fits a line through the optima in (gamma, 1/T) space, and
only evaluates the remaining gammas on that line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    CalibratorParams,
    ParameterError,
    focal_calib_multiclass,
    focal_temperature_transform,
    temperature_scale,
    validate_map_gamma,
)
from .metrics import PredictionBatch, ece_equal_mass, nll

#: gamma_ev candidates used when none are supplied.
DEFAULT_GAMMAS = (-0.5, -0.25, 0.05, 0.25, 0.37, 0.5, 0.75, 1.0, 5.0)
#: temperature grid bounds/step used when none are supplied.
DEFAULT_T_MIN, DEFAULT_T_MAX, DEFAULT_T_STEP = 0.01, 5.0, 0.01
DEFAULT_BINS = 15


@dataclass(frozen=True)
class LabeledLogits:
    """Per-instance logit rows with integer class labels."""

    logits: np.ndarray  # (N, n)
    labels: np.ndarray  # (N,)

    def __post_init__(self) -> None:
        z = np.asarray(self.logits, dtype=float)
        y = np.asarray(self.labels)
        if z.ndim != 2 or z.shape[0] == 0:
            raise ParameterError("logits must be a non-empty (N, n) array")
        if y.shape != (z.shape[0],):
            raise ParameterError("labels length must match logit rows")
        object.__setattr__(self, "logits", z)
        object.__setattr__(self, "labels", np.asarray(y, dtype=int))

    @property
    def n_classes(self) -> int:
        return self.logits.shape[1]

    def __len__(self) -> int:
        return self.logits.shape[0]


@dataclass(frozen=True)
class GridSpec:
    """Search grid: gamma candidates, temperature range, and criterion."""

    gamma_values: tuple[float, ...] = DEFAULT_GAMMAS
    t_min: float = DEFAULT_T_MIN
    t_max: float = DEFAULT_T_MAX
    t_step: float = DEFAULT_T_STEP
    criterion: str = "ece"

    def __post_init__(self) -> None:
        if self.t_min <= 0 or self.t_step <= 0 or self.t_max < self.t_min:
            raise ParameterError("temperature grid must satisfy 0 < t_min <= t_max, t_step > 0")
        gv = tuple(float(g) for g in self.gamma_values)
        if not gv:
            raise ParameterError("gamma grid must be non-empty")
        if len(set(gv)) != len(gv):
            raise ParameterError("gamma grid must be duplicate-free")
        if self.criterion not in ("ece", "nll"):
            raise ParameterError("criterion must be 'ece' or 'nll'")
        object.__setattr__(self, "gamma_values", gv)

    def temperatures(self) -> np.ndarray:
        """Inclusive stepped grid from t_min to t_max."""
        count = int(np.floor((self.t_max - self.t_min) / self.t_step + 1e-9)) + 1
        return np.round(self.t_min + self.t_step * np.arange(count), 12)

    def to_dict(self) -> dict:
        return {
            "gamma_values": list(self.gamma_values),
            "t_min": self.t_min,
            "t_max": self.t_max,
            "t_step": self.t_step,
            "criterion": self.criterion,
        }


@dataclass(frozen=True)
class FitResult:
    """Selected calibrator plus the full audit trace of the search."""

    best: CalibratorParams
    criterion: str
    criterion_value: float
    grid: GridSpec
    trace: tuple[tuple[float, float, float], ...] = field(repr=False)
    # trace rows are (gamma_ev, temperature, criterion_value)

    def to_dict(self) -> dict:
        return {
            "family": self.best.family,
            "gamma_ev": self.best.gamma_ev,
            "temperature": self.best.temperature,
            "criterion": self.criterion,
            "criterion_value": self.criterion_value,
            "grid": self.grid.to_dict(),
            "trace": [list(row) for row in self.trace],
        }


def _criterion_fn(name: str, n_bins: int):
    if name == "ece":
        return lambda batch: ece_equal_mass(batch, n_bins)
    return lambda batch: nll(batch)


def apply_calibrator(data: LabeledLogits, params: CalibratorParams) -> PredictionBatch:
    """Run the calibrator over every row; labels pass through."""
    probs = focal_temperature_transform(data.logits, params)
    return PredictionBatch(probs, data.labels)


def _pick_best(trace, family: str) -> tuple[CalibratorParams, float]:
    """Deterministic argmin: lowest value, then T nearest 1, then gamma
    nearest 0, then earliest in grid order."""
    best_i = 0
    for i in range(1, len(trace)):
        g, t, v = trace[i]
        bg, bt, bv = trace[best_i]
        if (v, abs(t - 1.0), abs(g)) < (bv, abs(bt - 1.0), abs(bg)):
            best_i = i
    g, t, v = trace[best_i]
    if family == "temperature":
        params = CalibratorParams(0.0, t, "temperature")
    else:
        params = CalibratorParams(g, t, family)
    return params, v


def _sweep(data, gamma, temperatures, crit_fn, trace):
    """Evaluate one gamma over all temperatures; append to trace and
    return this gamma's best (gamma, T, value) row."""
    best_row = None
    for t in temperatures:
        params = CalibratorParams(float(gamma), float(t), "focal-temperature")
        value = float(crit_fn(apply_calibrator(data, params)))
        row = (float(gamma), float(t), value)
        trace.append(row)
        if (
            best_row is None
            or (value, abs(t - 1.0)) < (best_row[2], abs(best_row[1] - 1.0))
        ):
            best_row = row
    return best_row


def fit_temperature(
    val: LabeledLogits, grid: GridSpec = GridSpec(), n_bins: int = DEFAULT_BINS
) -> FitResult:
    """Pick T minimizing the criterion; gamma is pinned to 0."""
    crit_fn = _criterion_fn(grid.criterion, n_bins)
    trace: list[tuple[float, float, float]] = []
    _sweep(val, 0.0, grid.temperatures(), crit_fn, trace)
    best, value = _pick_best(trace, "temperature")
    return FitResult(best, grid.criterion, value, grid, tuple(trace))


def fit_focal_temperature(
    val: LabeledLogits, grid: GridSpec = GridSpec(), n_bins: int = DEFAULT_BINS
) -> FitResult:
    """Exhaustive (gamma_ev, T) grid search.

    Whenever 0 is in the gamma grid the result can never be worse than
    fit_temperature on the same temperature grid (superset guarantee).
    The temperature-scaled softmax is computed once per T and shared
    across the gamma candidates; the evaluation is identical to running
    focal_temperature_transform per candidate.
    """
    for g in grid.gamma_values:
        validate_map_gamma(g)
    crit_fn = _criterion_fn(grid.criterion, n_bins)
    trace: list[tuple[float, float, float]] = []
    for t in grid.temperatures():
        q_t = temperature_scale(val.logits, float(t))
        for g in grid.gamma_values:
            probs = q_t if g == 0.0 else focal_calib_multiclass(q_t, g)
            value = float(crit_fn(PredictionBatch(probs, val.labels)))
            trace.append((float(g), float(t), value))
    best, value = _pick_best(trace, "focal-temperature")
    return FitResult(best, grid.criterion, value, grid, tuple(trace))


def fit_focal_temperature_line(
    val: LabeledLogits,
    grid: GridSpec = GridSpec(),
    probe_gammas: tuple[float, float] | None = None,
    n_bins: int = DEFAULT_BINS,
) -> FitResult:
    """Line-search shortcut: at most 3m evaluations for an m-point T grid.

    Sweeps all temperatures at two probe gammas (2m evaluations), fits a
    straight line through the two optima in (gamma, 1/T) space, and
    evaluates each remaining gamma only at the line's temperature rounded
    to the T grid (at most m more).  Defaults probes to the two extreme
    non-zero gammas of the grid.
    """
    for g in grid.gamma_values:
        validate_map_gamma(g)
    if probe_gammas is None:
        nonzero = [g for g in grid.gamma_values if g != 0.0]
        if len(nonzero) >= 2:
            probe_gammas = (min(nonzero), max(nonzero))
        elif len(grid.gamma_values) >= 2:
            probe_gammas = (min(grid.gamma_values), max(grid.gamma_values))
        else:
            probe_gammas = (grid.gamma_values[0], grid.gamma_values[0] + 1.0)
    ga, gb = float(probe_gammas[0]), float(probe_gammas[1])
    if ga == gb:
        raise ParameterError("probe gammas must be distinct")

    crit_fn = _criterion_fn(grid.criterion, n_bins)
    temperatures = grid.temperatures()
    trace: list[tuple[float, float, float]] = []
    best_a = _sweep(val, ga, temperatures, crit_fn, trace)
    best_b = _sweep(val, gb, temperatures, crit_fn, trace)

    # line through the probe optima in (gamma, 1/T) space
    slope = (1.0 / best_b[1] - 1.0 / best_a[1]) / (gb - ga)
    intercept = 1.0 / best_a[1] - slope * ga
    for g in grid.gamma_values:
        if g in (ga, gb):
            continue
        inv_t = slope * g + intercept
        target = 1.0 / inv_t if inv_t > 0 else temperatures[-1]
        t = float(temperatures[np.argmin(np.abs(temperatures - target))])
        params = CalibratorParams(float(g), t, "focal-temperature")
        trace.append((float(g), t, float(crit_fn(apply_calibrator(val, params)))))

    best, value = _pick_best(trace, "focal-temperature")
    return FitResult(best, grid.criterion, value, grid, tuple(trace))
