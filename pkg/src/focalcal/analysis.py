"""Numerical studies of the focal calibration map.

Desk-scale reproductions of the map's approximation and properness
behaviour: minimax matching between the focal calibration map and
temperature scaling (binary logit grids and pinned-logit simplex grids),
linear trend fits of best inverse temperature against gamma, theoretical
sandwich bounds with experimental tightening, confidence-raising and
properness scans, and loss-landscape tables for isoline plots.

Default grids are desk-scale (coarser than the finest grids the studies
support); every result records the grid actually used in its metadata, and
the fine grids remain reachable through the keyword arguments.  Results
are frozen dataclasses that serialize to CSV rows and JSON-ready dicts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import (
    ParameterError,
    VerificationError,
    binary_log_odds,
    clamp_prob,
    focal_calib_binary_logit,
    focal_calib_inverse_binary,
    focal_calib_inverse_multiclass,
    focal_calib_multiclass,
    focal_risk_minimizer,
    sigmoid,
    softmax,
)

__all__ = [
    "DEFAULT_SEED",
    "MatchResult",
    "BoundResult",
    "LinearFit",
    "ConfidenceScanRow",
    "ConfidenceScanReport",
    "PropernessCase",
    "PropernessReport",
    "LandscapeTable",
    "minimax_match_binary",
    "minimax_match_simplex",
    "linear_fit_gamma_invT",
    "bound_check",
    "confidence_raising_scan",
    "properness_scan",
    "loss_landscape_table",
    "focal_risk_minimizer",
]

#: Default seed for every randomized scan in this module and the CLI.
DEFAULT_SEED = 1729

#: Default percentile levels for loss-landscape isoline thresholds.
DEFAULT_PERCENTILES = (3.0, 12.0, 20.0)

#: Default gamma grids for the per-dimension trend fits.  The dimension-4
#: grid starts higher and reaches further because the linear trend there
#: only stabilizes past the small-gamma knee.
LINE_GAMMAS_BINARY = tuple(np.arange(1, 11) * 0.5)  # 0.5 .. 5.0
LINE_GAMMAS_DIM3 = tuple(np.arange(1, 11) * 0.5)  # 0.5 .. 5.0
LINE_GAMMAS_DIM4 = tuple(1.0 + np.arange(1, 18) * 0.5)  # 1.5 .. 9.5

#: Default logit grids per dimension: (lo, hi, step).
BINARY_LOGIT_GRID = (-20.0, 20.0, 0.01)
DIM3_LOGIT_GRID = (-5.0, 5.0, 0.05)
DIM4_LOGIT_GRID = (-1.5, 1.5, 0.1)

#: Default logit grid for bound tightening.  The experimental lower bound
#: is range-sensitive: the ratio s / log-odds(s) decays toward 1/(gamma+1)
#: as s grows, so an ever-wider grid collapses the experimental bound onto
#: the theoretical one and the tightening becomes vacuous.  (-10, 10) is
#: the widest decade range where the tightened pair stays informative.
BOUNDS_LOGIT_GRID = (-10.0, 10.0, 0.01)

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# Grid construction
# ---------------------------------------------------------------------------


def _logit_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive 1-D logit grid lo, lo+step, ..., hi."""
    if not lo < hi:
        raise ParameterError("logit grid needs lo < hi")
    if step <= 0:
        raise ParameterError("logit step must be positive")
    count = int(round((hi - lo) / step)) + 1
    if count < 2:
        raise ParameterError("logit grid is empty")
    return np.linspace(lo, hi, count)


def make_pinned_logit_grid(
    dim: int, lo: float, hi: float, step: float, max_points: int = 2_000_000
) -> np.ndarray:
    """Logit vectors with dim-1 free coordinates and the last pinned to 0.

    The softmax is shift invariant, so pinning one coordinate enumerates
    the same simplex image with exponentially fewer points.  Grids larger
    than max_points are rejected; pass a coarser step instead (the grid in
    use is always recorded in result metadata).
    """
    if dim < 3:
        raise ParameterError("pinned simplex grids start at 3 classes")
    axis = _logit_axis(lo, hi, step)
    n_points = len(axis) ** (dim - 1)
    if n_points > max_points:
        raise ParameterError(
            f"simplex grid would hold {n_points} points (> {max_points}); "
            "coarsen the step or raise max_points"
        )
    mesh = np.meshgrid(*([axis] * (dim - 1)), indexing="ij")
    cols = [m.ravel() for m in mesh] + [np.zeros(n_points)]
    return np.stack(cols, axis=-1)


def _simplex_grid(n: int, step: float) -> np.ndarray:
    """All interior probability vectors with coordinates on a step lattice."""
    if step <= 0 or step >= 0.5:
        raise ParameterError("grid step must lie in (0, 0.5)")
    k = int(round(1.0 / step))
    if n == 2:
        i = np.arange(1, k)
        return np.stack([i / k, 1.0 - i / k], axis=-1)
    if n == 3:
        ii, jj = np.meshgrid(np.arange(1, k), np.arange(1, k), indexing="ij")
        keep = ii + jj <= k - 1
        i = ii[keep]
        j = jj[keep]
        return np.stack([i / k, j / k, (k - i - j) / k], axis=-1)
    raise ParameterError("simplex grid scans are implemented for 2 or 3 classes")


def _golden_min(f, lo: float, hi: float, tol: float = 1e-6):
    """Golden-section minimum of a unimodal f on [lo, hi].

    Returns (argmin, f(argmin), evaluations).
    """
    a, b = float(lo), float(hi)
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x), 1
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        evals += 1
    x = 0.5 * (a + b)
    return x, f(x), evals + 1


# ---------------------------------------------------------------------------
# Result records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatchResult:
    """Best temperature-scaling stand-in for one focal map.

    max_abs_error is the minimax L-infinity distance on the probability
    scale over the logit grid recorded in metadata.
    """

    gamma: float
    best_temperature: float
    best_inverse_temperature: float
    max_abs_error: float
    dimension: int
    metadata: dict

    def __post_init__(self) -> None:
        if self.max_abs_error < 0:
            raise VerificationError("negative minimax error")
        if self.gamma > 0 and self.best_inverse_temperature <= 0:
            raise VerificationError("non-positive inverse temperature")

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "best_temperature": self.best_temperature,
            "best_inverse_temperature": self.best_inverse_temperature,
            "max_abs_error": self.max_abs_error,
            "dimension": self.dimension,
            "metadata": dict(self.metadata),
        }


@dataclass(frozen=True)
class BoundResult:
    """Theoretical and experimentally tightened temperature bounds.

    The focal map with parameter gamma sits between the temperature
    scaling maps at theoretical_lower_T and theoretical_upper_T; the
    experimental pair is the tightest sandwich on the search lattice.
    """

    gamma: float
    theoretical_lower_T: float
    theoretical_upper_T: float
    experimental_lower_T: float
    experimental_upper_T: float
    metadata: dict

    def __post_init__(self) -> None:
        ordered = (
            self.theoretical_lower_T
            <= self.experimental_lower_T
            <= self.experimental_upper_T
            <= self.theoretical_upper_T
        )
        if not ordered:
            raise VerificationError(
                f"bound tightening violated at gamma={self.gamma}: "
                f"theoretical ({self.theoretical_lower_T}, "
                f"{self.theoretical_upper_T}) vs experimental "
                f"({self.experimental_lower_T}, {self.experimental_upper_T})"
            )

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "theoretical_lower_T": self.theoretical_lower_T,
            "theoretical_upper_T": self.theoretical_upper_T,
            "experimental_lower_T": self.experimental_lower_T,
            "experimental_upper_T": self.experimental_upper_T,
            "metadata": dict(self.metadata),
        }


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line through per-gamma best inverse temperatures."""

    dimension: int
    slope: float
    intercept: float
    gamma_values: tuple
    best_temperatures: tuple
    inverse_temperatures: tuple
    max_abs_errors: tuple
    max_abs_residual: float
    rms_residual: float
    metadata: dict

    def __post_init__(self) -> None:
        if len(self.gamma_values) < 10:
            raise ParameterError(
                "trend fits need at least 10 (gamma, 1/T) support points"
            )

    def line_at(self, gamma) -> np.ndarray:
        """Fitted inverse temperature at gamma."""
        return self.slope * np.asarray(gamma, dtype=float) + self.intercept

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "slope": self.slope,
            "intercept": self.intercept,
            "max_abs_residual": self.max_abs_residual,
            "rms_residual": self.rms_residual,
            "n_points": len(self.gamma_values),
            "gamma_values": list(self.gamma_values),
            "best_temperatures": list(self.best_temperatures),
            "inverse_temperatures": list(self.inverse_temperatures),
            "max_abs_errors": list(self.max_abs_errors),
            "metadata": dict(self.metadata),
        }

    def to_csv_rows(self) -> list:
        header = [
            "gamma",
            "best_temperature",
            "best_inverse_temperature",
            "max_abs_error",
            "line_value",
            "residual",
        ]
        rows = [header]
        for g, t, inv_t, err in zip(
            self.gamma_values,
            self.best_temperatures,
            self.inverse_temperatures,
            self.max_abs_errors,
        ):
            line = self.slope * g + self.intercept
            rows.append([g, t, inv_t, err, line, inv_t - line])
        return rows


# ---------------------------------------------------------------------------
# Minimax matching against temperature scaling
# ---------------------------------------------------------------------------


def _coarse_then_golden(err, coarse: np.ndarray, refine_tol: float):
    """Two-stage search: coarse grid, then golden refinement at the incumbent."""
    coarse = np.asarray(coarse, dtype=float)
    if coarse.ndim != 1 or coarse.size == 0:
        raise ParameterError("temperature grid is empty")
    if np.any(coarse <= 0):
        raise ParameterError("temperatures must be positive")
    coarse = np.sort(coarse)
    values = [err(t) for t in coarse]
    i = int(np.argmin(values))
    evals = len(values)
    if coarse.size == 1:
        return float(coarse[0]), float(values[0]), evals
    lo = coarse[max(i - 1, 0)]
    hi = coarse[min(i + 1, coarse.size - 1)]
    t_best, e_best, more = _golden_min(err, lo, hi, tol=refine_tol)
    evals += more
    # the refined point can only improve on the incumbent; keep the better
    if values[i] < e_best:
        t_best, e_best = float(coarse[i]), float(values[i])
    return float(t_best), float(e_best), evals


def minimax_match_binary(
    gamma: float,
    logit_lo: float = BINARY_LOGIT_GRID[0],
    logit_hi: float = BINARY_LOGIT_GRID[1],
    logit_step: float = BINARY_LOGIT_GRID[2],
    t_grid=None,
    refine_tol: float = 1e-6,
) -> MatchResult:
    """Temperature minimizing the worst-case gap to the binary focal map.

    Evaluates max over the logit grid of |focal_map(s) - sigmoid(s/T)| and
    minimizes it over T.  The sandwich bounds confine the optimum to
    [1/(gamma+1), 1/(gamma+1 - log(gamma+1)/2)]; outside that bracket the
    error is monotone, so the default search is a coarse grid over the
    bracket followed by golden-section refinement (the objective is
    unimodal in T).  Pass t_grid to replace the coarse stage.
    """
    if gamma < 0:
        raise ParameterError("matching is defined for gamma >= 0")
    started = time.perf_counter()
    s = _logit_axis(logit_lo, logit_hi, logit_step)
    fc = focal_calib_binary_logit(s, gamma)

    def err(t: float) -> float:
        return float(np.max(np.abs(sigmoid(s / t) - fc)))

    if gamma == 0:
        t_best, e_best, evals = 1.0, err(1.0), 1
        strategy = "identity shortcut (gamma = 0 matches T = 1 exactly)"
        bracket = (1.0, 1.0)
    else:
        lo_t = 1.0 / (gamma + 1.0)
        hi_t = 1.0 / (gamma + 1.0 - np.log(gamma + 1.0) / 2.0)
        bracket = (float(lo_t), float(hi_t))
        coarse = t_grid if t_grid is not None else np.linspace(lo_t, hi_t, 25)
        t_best, e_best, evals = _coarse_then_golden(err, coarse, refine_tol)
        strategy = (
            "user temperature grid + golden refinement"
            if t_grid is not None
            else "sandwich bracket coarse grid + golden refinement"
        )
    elapsed = time.perf_counter() - started
    metadata = {
        "logit_lo": float(logit_lo),
        "logit_hi": float(logit_hi),
        "logit_step": float(logit_step),
        "n_logit_points": int(s.size),
        "t_search": {
            "strategy": strategy,
            "bracket": list(bracket),
            "refine_tol": float(refine_tol),
            "error_evaluations": int(evals),
        },
        "elapsed_seconds": float(elapsed),
    }
    return MatchResult(
        gamma=float(gamma),
        best_temperature=float(t_best),
        best_inverse_temperature=float(1.0 / t_best),
        max_abs_error=float(e_best),
        dimension=2,
        metadata=metadata,
    )


def minimax_match_simplex(
    dim: int,
    gamma: float,
    logit_lo: float = DIM3_LOGIT_GRID[0],
    logit_hi: float = DIM3_LOGIT_GRID[1],
    logit_step: float = DIM3_LOGIT_GRID[2],
    t_grid=None,
    n_coarse: int = 60,
    n_zoom: int = 3,
    max_points: int = 2_000_000,
) -> MatchResult:
    """Temperature minimizing the worst-case gap to the multiclass map.

    Enumerates logit vectors with the last coordinate pinned to 0 (softmax
    shift invariance), measures the elementwise L-infinity distance between
    the focal map of softmax(z) and softmax(z/T), and minimizes over T by a
    coarse linspace (bracketed below by 1/(gamma+1)) followed by n_zoom
    zoom refinements around the incumbent.  The grid actually used is
    recorded in the metadata; default grids are desk-scale.
    """
    if gamma < 0:
        raise ParameterError("matching is defined for gamma >= 0")
    started = time.perf_counter()
    z = make_pinned_logit_grid(dim, logit_lo, logit_hi, logit_step, max_points)
    q = softmax(z)

    if gamma == 0:
        t_best, e_best, evals = 1.0, 0.0, 0
        t_spec = {"strategy": "identity shortcut (gamma = 0 matches T = 1 exactly)"}
    else:
        fc = focal_calib_multiclass(q, gamma)

        def err(t: float) -> float:
            return float(np.max(np.abs(softmax(z, temperature=t) - fc)))

        if t_grid is not None:
            grid = np.sort(np.asarray(t_grid, dtype=float))
            if grid.ndim != 1 or grid.size == 0:
                raise ParameterError("temperature grid is empty")
            if np.any(grid <= 0):
                raise ParameterError("temperatures must be positive")
            t_spec = {"strategy": "user temperature grid + zoom refinement"}
        else:
            lo_t = 0.5 / (gamma + 1.0)
            hi_t = min(2.5 / (gamma + 1.0) + 0.4, 1.2)
            grid = np.linspace(lo_t, hi_t, n_coarse)
            t_spec = {
                "strategy": "coarse linspace + zoom refinement",
                "coarse_lo": float(lo_t),
                "coarse_hi": float(hi_t),
                "n_coarse": int(n_coarse),
            }
        evals = 0
        for _ in range(n_zoom + 1):
            values = [err(t) for t in grid]
            evals += len(values)
            i = int(np.argmin(values))
            t_best, e_best = float(grid[i]), float(values[i])
            lo = grid[max(i - 1, 0)]
            hi = grid[min(i + 1, grid.size - 1)]
            if hi - lo <= 0:
                break
            grid = np.linspace(lo, hi, n_coarse)
        t_spec["n_zoom"] = int(n_zoom)
    elapsed = time.perf_counter() - started
    t_spec["error_evaluations"] = int(evals)
    metadata = {
        "logit_lo": float(logit_lo),
        "logit_hi": float(logit_hi),
        "logit_step": float(logit_step),
        "pinned_last_logit": True,
        "n_grid_points": int(z.shape[0]),
        "t_search": t_spec,
        "elapsed_seconds": float(elapsed),
    }
    return MatchResult(
        gamma=float(gamma),
        best_temperature=float(t_best),
        best_inverse_temperature=float(1.0 / t_best),
        max_abs_error=float(e_best),
        dimension=int(dim),
        metadata=metadata,
    )


def _default_line_config(dim: int):
    if dim == 2:
        return LINE_GAMMAS_BINARY, BINARY_LOGIT_GRID
    if dim == 3:
        return LINE_GAMMAS_DIM3, DIM3_LOGIT_GRID
    if dim == 4:
        return LINE_GAMMAS_DIM4, DIM4_LOGIT_GRID
    raise ParameterError(
        f"no default trend-fit grids for dimension {dim}; "
        "pass gamma_grid and an explicit logit grid"
    )


def linear_fit_gamma_invT(
    dim: int,
    gamma_grid=None,
    logit_lo: float | None = None,
    logit_hi: float | None = None,
    logit_step: float | None = None,
    t_grid=None,
) -> LinearFit:
    """Least-squares line through (gamma, best 1/T) matching points.

    Runs the per-gamma minimax match for the given dimension and fits
    1/T = slope * gamma + intercept by least squares (recorded as
    fit_method in the metadata).  Defaults: dimension 2 uses gammas
    0.5..5 on the (-20, 20)/0.01 logit grid; dimension 3 the same gammas
    on (-5, 5)/0.05; dimension 4 gammas 1.5..9.5 on (-1.5, 1.5)/0.1,
    where the trend has left its small-gamma knee.
    """
    defaults_g, defaults_grid = (None, None)
    if dim in (2, 3, 4):
        defaults_g, defaults_grid = _default_line_config(dim)
    gammas = tuple(float(g) for g in (gamma_grid if gamma_grid is not None else defaults_g or ()))
    if not gammas:
        raise ParameterError("gamma grid is empty and no default exists")
    if len(set(gammas)) != len(gammas):
        raise ParameterError("gamma grid has duplicates")
    grid = (logit_lo, logit_hi, logit_step)
    if any(v is None for v in grid):
        if defaults_grid is None:
            raise ParameterError(
                f"no default logit grid for dimension {dim}; pass one explicitly"
            )
        grid = tuple(
            d if v is None else float(v) for v, d in zip(grid, defaults_grid)
        )
    lo, hi, step = grid

    started = time.perf_counter()
    matches = []
    for g in gammas:
        if dim == 2:
            matches.append(
                minimax_match_binary(g, lo, hi, step, t_grid=t_grid)
            )
        else:
            matches.append(
                minimax_match_simplex(dim, g, lo, hi, step, t_grid=t_grid)
            )
    inv_t = np.array([m.best_inverse_temperature for m in matches])
    g_arr = np.array(gammas)
    slope, intercept = np.polyfit(g_arr, inv_t, 1)
    residuals = inv_t - (slope * g_arr + intercept)
    elapsed = time.perf_counter() - started

    metadata = {
        "fit_method": "least-squares",
        "logit_lo": float(lo),
        "logit_hi": float(hi),
        "logit_step": float(step),
        "t_search": matches[0].metadata["t_search"]["strategy"],
        "elapsed_seconds": float(elapsed),
    }
    return LinearFit(
        dimension=int(dim),
        slope=float(slope),
        intercept=float(intercept),
        gamma_values=gammas,
        best_temperatures=tuple(m.best_temperature for m in matches),
        inverse_temperatures=tuple(m.best_inverse_temperature for m in matches),
        max_abs_errors=tuple(m.max_abs_error for m in matches),
        max_abs_residual=float(np.max(np.abs(residuals))),
        rms_residual=float(np.sqrt(np.mean(residuals**2))),
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# Sandwich bounds
# ---------------------------------------------------------------------------


def bound_check(
    gamma: float,
    logit_lo: float = BOUNDS_LOGIT_GRID[0],
    logit_hi: float = BOUNDS_LOGIT_GRID[1],
    logit_step: float = BOUNDS_LOGIT_GRID[2],
    t_step: float = 0.001,
) -> BoundResult:
    """Verify the sandwich bounds and tighten them experimentally.

    The binary focal map lies strictly between the temperature scaling
    maps with T = 1/(gamma+1) (below, for positive logits) and
    T = 1/(gamma+1 - log(gamma+1)/2) (above); the inequalities flip sign
    across s = 0.  Near-saturated probabilities make a probability-space
    check vacuous, so strictness is verified in log-odds space, where both
    sides stay exactly representable.  The experimental pair is then the
    tightest sandwich on the t_step lattice: the largest lattice T whose
    scaling map stays on one side of the focal map over the whole grid,
    and the smallest lattice T staying on the other.
    """
    if gamma <= 0:
        raise ParameterError("sandwich bounds are defined for gamma > 0")
    if t_step <= 0:
        raise ParameterError("temperature search step must be positive")
    started = time.perf_counter()
    s = _logit_axis(logit_lo, logit_hi, logit_step)
    s = s[s != 0.0]
    if s.size == 0:
        raise ParameterError("logit grid holds only s = 0")
    log_odds = binary_log_odds(s, gamma)

    slope_hi = gamma + 1.0
    slope_lo = gamma + 1.0 - np.log(gamma + 1.0) / 2.0
    pos = s > 0
    lower_side = np.where(pos, slope_lo * s, slope_hi * s)
    upper_side = np.where(pos, slope_hi * s, slope_lo * s)
    bad = ~((lower_side < log_odds) & (log_odds < upper_side))
    if np.any(bad):
        witness = float(s[bad][0])
        raise VerificationError(
            f"sandwich bound violated at gamma={gamma}, s={witness}"
        )

    # sigmoid(s/T) >= focal(s) for all s > 0 (and <= for s < 0) is
    # equivalent to T <= s / log_odds(s) everywhere, and symmetrically for
    # the upper map; the lattice search reduces to rounding the extreme
    # ratios to the t_step lattice.
    ratios = s / log_odds
    exp_lower = np.floor(ratios.min() / t_step + 1e-12) * t_step
    exp_upper = np.ceil(ratios.max() / t_step - 1e-12) * t_step
    elapsed = time.perf_counter() - started

    metadata = {
        "logit_lo": float(logit_lo),
        "logit_hi": float(logit_hi),
        "logit_step": float(logit_step),
        "n_logit_points": int(s.size),
        "t_step": float(t_step),
        "tightest_lower_ratio": float(ratios.min()),
        "tightest_upper_ratio": float(ratios.max()),
        "elapsed_seconds": float(elapsed),
    }
    return BoundResult(
        gamma=float(gamma),
        theoretical_lower_T=float(1.0 / slope_hi),
        theoretical_upper_T=float(1.0 / slope_lo),
        experimental_lower_T=float(np.round(exp_lower, 12)),
        experimental_upper_T=float(np.round(exp_upper, 12)),
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# Confidence-raising scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfidenceScanRow:
    """Margin statistics for one (dimension, gamma) sample batch.

    witness holds the input/mapped pair achieving the most negative
    margin when the batch contains violations, else None.
    """

    dimension: int
    gamma: float
    n_samples: int
    n_violations: int
    min_margin: float
    mean_margin: float
    max_margin: float
    witness: dict | None = None


@dataclass(frozen=True)
class ConfidenceScanReport:
    """Confidence-raising scan over Dirichlet(1) simplex samples."""

    rows: tuple
    seed: int
    metadata: dict

    def total_violations(self) -> int:
        return sum(r.n_violations for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "total_violations": self.total_violations(),
            "rows": [vars(r) for r in self.rows],
            "metadata": dict(self.metadata),
        }

    def to_csv_rows(self) -> list:
        header = [
            "dimension",
            "gamma",
            "n_samples",
            "n_violations",
            "min_margin",
            "mean_margin",
            "max_margin",
        ]
        rows = [header]
        for r in self.rows:
            rows.append(
                [
                    r.dimension,
                    r.gamma,
                    r.n_samples,
                    r.n_violations,
                    r.min_margin,
                    r.mean_margin,
                    r.max_margin,
                ]
            )
        return rows


def confidence_raising_scan(
    dims=(2, 3, 4, 10),
    gammas=(0.5, 1.0, 2.0, 3.0, 5.0),
    n_samples: int = 100_000,
    seed: int = DEFAULT_SEED,
    raise_on_violation: bool = True,
) -> ConfidenceScanReport:
    """Check whether the map ever lowers the top coordinate's probability.

    Samples n_samples points per (dimension, gamma) from a symmetric
    Dirichlet(1) and tests, exactly in floating point, that the mapped
    probability at the input argmax is >= the input maximum.  Reports the
    margin statistics per batch; any strict decrease raises with the
    witness point unless raise_on_violation is False.

    The property holds for 2- and 3-way outputs at any gamma >= 0, and in
    every case observed where the top coordinate is at least 1/2, but it
    is NOT universal: for four or more classes there are diffuse inputs
    (top coordinate well below 1/2, with some very small coordinates)
    whose top probability strictly decreases.  1/L'(q) is convex rather
    than concave near q=0, and small coordinates in that region gain
    proportionally more weight than the leader.  Violations get more
    frequent as the dimension grows and as gamma shrinks; see the scan
    report's witnesses for concrete counterexamples.
    """
    if n_samples < 1:
        raise ParameterError("sample count must be >= 1")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    rows = []
    for dim in dims:
        if dim < 2:
            raise ParameterError("simplex dimension must be >= 2")
        q = rng.dirichlet(np.ones(dim), size=n_samples)
        top_idx = np.argmax(q, axis=-1)
        top_before = np.take_along_axis(q, top_idx[:, None], axis=-1)[:, 0]
        for g in gammas:
            mapped = focal_calib_multiclass(q, g)
            top_after = np.take_along_axis(mapped, top_idx[:, None], axis=-1)[:, 0]
            margins = top_after - top_before
            violated = margins < 0.0
            if np.any(violated) and raise_on_violation:
                i = int(np.argmax(violated))
                raise VerificationError(
                    f"confidence raising violated at dim={dim}, gamma={g}: "
                    f"input {q[i].tolist()} mapped to {mapped[i].tolist()}"
                )
            witness = None
            if np.any(violated):
                i = int(np.argmin(margins))
                witness = {"input": q[i].tolist(), "mapped": mapped[i].tolist()}
            rows.append(
                ConfidenceScanRow(
                    dimension=int(dim),
                    gamma=float(g),
                    n_samples=int(n_samples),
                    n_violations=int(np.count_nonzero(violated)),
                    min_margin=float(margins.min()),
                    mean_margin=float(margins.mean()),
                    max_margin=float(margins.max()),
                    witness=witness,
                )
            )
    elapsed = time.perf_counter() - started
    metadata = {
        "sampler": "symmetric Dirichlet(1)",
        "comparison": "exact floating-point >= at the input argmax",
        "elapsed_seconds": float(elapsed),
    }
    return ConfidenceScanReport(rows=tuple(rows), seed=int(seed), metadata=metadata)


# ---------------------------------------------------------------------------
# Properness scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PropernessCase:
    """Grid minimizer of the properized-focal conditional risk for one p."""

    p_true: tuple
    minimizer: tuple
    linf_distance: float


@dataclass(frozen=True)
class PropernessReport:
    """Properness scan of the properized focal loss over a simplex grid."""

    dimension: int
    gamma: float
    grid_step: float
    tolerance: float
    cases: tuple
    max_linf: float
    metadata: dict

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "gamma": self.gamma,
            "grid_step": self.grid_step,
            "tolerance": self.tolerance,
            "max_linf": self.max_linf,
            "cases": [vars(c) for c in self.cases],
            "metadata": dict(self.metadata),
        }

    def to_csv_rows(self) -> list:
        n = self.dimension
        header = (
            [f"p_{i}" for i in range(n)]
            + [f"minimizer_{i}" for i in range(n)]
            + ["linf_distance"]
        )
        rows = [header]
        for c in self.cases:
            rows.append(list(c.p_true) + list(c.minimizer) + [c.linf_distance])
        return rows


def properness_scan(
    ground_truths,
    gamma: float,
    grid_step: float = 1e-3,
    inversion_iters: int = 48,
) -> PropernessReport:
    """Verify the properized focal loss is minimized at the ground truth.

    For each ground-truth distribution p, minimizes the conditional risk
    R(p, q) = sum_i p_i * properized_focal(q, i) over an interior simplex
    grid and asserts the grid argmin lies within L-infinity 2 * grid_step
    of p.  The expensive part — inverting the calibration map over the
    whole grid — is shared across all ground truths, so adding more p
    vectors is nearly free.  48 bisection halvings put the inversion error
    orders of magnitude below the grid step.
    """
    if gamma < 0:
        raise ParameterError("the properized loss uses the loss role: gamma >= 0")
    p_all = np.atleast_2d(np.asarray(ground_truths, dtype=float))
    n = p_all.shape[-1]
    if np.any(p_all <= 0.0) or np.any(np.abs(p_all.sum(axis=-1) - 1.0) > 1e-8):
        raise ParameterError("ground truths must lie in the simplex interior")

    started = time.perf_counter()
    grid = _simplex_grid(n, grid_step)
    if gamma == 0:
        preimage = grid
    elif n == 2:
        r0 = focal_calib_inverse_binary(grid[:, 0], gamma, iters=inversion_iters)
        preimage = np.stack([r0, 1.0 - r0], axis=-1)
    else:
        preimage = focal_calib_inverse_multiclass(
            grid, gamma, iters=inversion_iters
        )
    r = clamp_prob(preimage)
    loss_by_class = -((1.0 - r) ** gamma) * np.log(r)

    tolerance = 2.0 * grid_step
    cases = []
    for p in p_all:
        risk = loss_by_class @ p
        idx = int(np.argmin(risk))
        q_star = grid[idx]
        linf = float(np.max(np.abs(q_star - p)))
        if linf > tolerance:
            raise VerificationError(
                f"properness violated at gamma={gamma}: risk for "
                f"p={p.tolist()} is minimized at {q_star.tolist()} "
                f"(L-infinity {linf} > {tolerance})"
            )
        cases.append(
            PropernessCase(
                p_true=tuple(float(v) for v in p),
                minimizer=tuple(float(v) for v in q_star),
                linf_distance=linf,
            )
        )
    elapsed = time.perf_counter() - started
    metadata = {
        "n_grid_points": int(grid.shape[0]),
        "inversion_iters": int(inversion_iters),
        "elapsed_seconds": float(elapsed),
    }
    return PropernessReport(
        dimension=int(n),
        gamma=float(gamma),
        grid_step=float(grid_step),
        tolerance=float(tolerance),
        cases=tuple(cases),
        max_linf=float(max(c.linf_distance for c in cases)),
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# Loss landscape tables
# ---------------------------------------------------------------------------

LANDSCAPE_LOSSES = ("brier", "cross-entropy", "focal", "properized-focal")


@dataclass(frozen=True, eq=False)
class LandscapeTable:
    """Conditional-risk table over a simplex grid for plotting isolines.

    risks[i, j] is the conditional risk at grid point i under loss j; the
    percentile thresholds (per loss, over the whole table) are the isoline
    levels.
    """

    p_true: tuple
    gamma: float
    grid_step: float
    dimension: int
    loss_names: tuple
    grid: np.ndarray
    risks: np.ndarray
    percentile_levels: tuple
    thresholds: dict
    metadata: dict

    def argmin_points(self) -> dict:
        out = {}
        for j, name in enumerate(self.loss_names):
            idx = int(np.argmin(self.risks[:, j]))
            out[name] = [float(v) for v in self.grid[idx]]
        return out

    def summary_dict(self) -> dict:
        return {
            "p_true": list(self.p_true),
            "gamma": self.gamma,
            "grid_step": self.grid_step,
            "dimension": self.dimension,
            "loss_names": list(self.loss_names),
            "percentile_levels": list(self.percentile_levels),
            "thresholds": {k: dict(v) for k, v in self.thresholds.items()},
            "risk_argmin": self.argmin_points(),
            "n_grid_points": int(self.grid.shape[0]),
            "metadata": dict(self.metadata),
        }

    def to_csv_rows(self) -> list:
        n = self.dimension
        header = [f"q_{i}" for i in range(n)] + [
            f"risk_{name}" for name in self.loss_names
        ]
        rows = [header]
        for point, risk_row in zip(self.grid, self.risks):
            rows.append([float(v) for v in point] + [float(v) for v in risk_row])
        return rows


def loss_landscape_table(
    p_true,
    gamma: float,
    losses=LANDSCAPE_LOSSES,
    grid_step: float = 0.01,
    percentiles=DEFAULT_PERCENTILES,
    inversion_iters: int = 48,
) -> LandscapeTable:
    """Tabulate conditional risks over a simplex grid for isoline plots.

    For every interior grid point q and each selected loss L, computes
    R(p_true, q) = sum_i p_true[i] * L(q, i).  Boundary ground truths are
    allowed (a one-hot p_true gives the plain per-label loss curve).  The
    isoline levels are percentiles of each loss's risk values over the
    table.
    """
    if gamma < 0:
        raise ParameterError("loss landscapes use the loss role: gamma >= 0")
    p = np.asarray(p_true, dtype=float)
    if p.ndim != 1 or p.shape[0] not in (2, 3):
        raise ParameterError("landscape tables cover 2- or 3-class ground truths")
    if np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-8:
        raise ParameterError("p_true must be a probability vector")
    loss_names = tuple(losses)
    unknown = [name for name in loss_names if name not in LANDSCAPE_LOSSES]
    if unknown:
        raise ParameterError(
            f"unknown losses {unknown}; available: {list(LANDSCAPE_LOSSES)}"
        )
    if not loss_names:
        raise ParameterError("select at least one loss")

    started = time.perf_counter()
    n = p.shape[0]
    grid = _simplex_grid(n, grid_step)
    qc = clamp_prob(grid)

    preimage = None
    if "properized-focal" in loss_names:
        if gamma == 0:
            preimage = grid
        elif n == 2:
            r0 = focal_calib_inverse_binary(
                grid[:, 0], gamma, iters=inversion_iters
            )
            preimage = np.stack([r0, 1.0 - r0], axis=-1)
        else:
            preimage = focal_calib_inverse_multiclass(
                grid, gamma, iters=inversion_iters
            )

    columns = []
    for name in loss_names:
        if name == "brier":
            risk = (grid**2).sum(axis=-1) - 2.0 * grid @ p + 1.0
        elif name == "cross-entropy":
            risk = -(np.log(qc) @ p)
        elif name == "focal":
            risk = (-((1.0 - qc) ** gamma) * np.log(qc)) @ p
        else:  # properized-focal
            r = clamp_prob(preimage)
            risk = (-((1.0 - r) ** gamma) * np.log(r)) @ p
        columns.append(risk)
    risks = np.stack(columns, axis=-1)

    levels = tuple(float(v) for v in percentiles)
    thresholds = {}
    for j, name in enumerate(loss_names):
        thresholds[name] = {
            level: float(np.percentile(risks[:, j], level)) for level in levels
        }
    elapsed = time.perf_counter() - started
    metadata = {
        "n_grid_points": int(grid.shape[0]),
        "inversion_iters": int(inversion_iters),
        "elapsed_seconds": float(elapsed),
    }
    return LandscapeTable(
        p_true=tuple(float(v) for v in p),
        gamma=float(gamma),
        grid_step=float(grid_step),
        dimension=int(n),
        loss_names=loss_names,
        grid=grid,
        risks=risks,
        percentile_levels=levels,
        thresholds=thresholds,
        metadata=metadata,
    )
