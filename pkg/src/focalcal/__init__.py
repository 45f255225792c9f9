"""focalcal: post-hoc probability calibration with the focal calibration map.

The package covers three layers:

  - core: the binary/multiclass focal calibration maps, their numerical
    inverses, the focal loss family with derivatives, the properized
    focal loss, and the composed focal-temperature transform;
  - metrics + fitting: equal-mass ECE / NLL / error rate, and grid-search
    fitting of temperature scaling, focal temperature scaling, and its
    line-search shortcut on validation logits;
  - analysis: minimax matching against temperature scaling, sandwich
    bounds with experimental tightening, properness / confidence-raising
    scans, and loss-landscape tables.

The `focalcal` console script exposes fit / apply / eval plus the
analysis drivers on logits CSV files.
"""

from .analysis import (
    BoundResult,
    LANDSCAPE_LOSSES,
    ConfidenceScanReport,
    ConfidenceScanRow,
    DEFAULT_SEED,
    LandscapeTable,
    LinearFit,
    MatchResult,
    PropernessCase,
    PropernessReport,
    bound_check,
    confidence_raising_scan,
    linear_fit_gamma_invT,
    loss_landscape_table,
    make_pinned_logit_grid,
    minimax_match_binary,
    minimax_match_simplex,
    properness_scan,
)
from .core import (
    CalibrationError,
    CalibratorParams,
    DataError,
    EPS,
    NumericError,
    ParameterError,
    VerificationError,
    binary_log_odds,
    clamp_prob,
    cross_entropy,
    focal_calib_binary,
    focal_calib_binary_logit,
    focal_calib_inverse_binary,
    focal_calib_inverse_multiclass,
    focal_calib_multiclass,
    focal_loss,
    focal_loss_grad,
    focal_loss_second_deriv,
    focal_risk_minimizer,
    focal_temperature_transform,
    properized_focal_loss,
    sigmoid,
    softmax,
    temperature_scale,
    validate_map_gamma,
)
from .fitting import (
    DEFAULT_GAMMAS,
    FitResult,
    GridSpec,
    LabeledLogits,
    apply_calibrator,
    fit_focal_temperature,
    fit_focal_temperature_line,
    fit_temperature,
)
from .metrics import (
    BinRow,
    BinTable,
    PredictionBatch,
    ece_equal_mass,
    error_rate,
    nll,
    reliability_table,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "CalibrationError",
    "ParameterError",
    "DataError",
    "NumericError",
    "VerificationError",
    # core
    "EPS",
    "CalibratorParams",
    "clamp_prob",
    "sigmoid",
    "softmax",
    "temperature_scale",
    "binary_log_odds",
    "focal_calib_binary",
    "focal_calib_binary_logit",
    "focal_calib_multiclass",
    "focal_calib_inverse_binary",
    "focal_calib_inverse_multiclass",
    "cross_entropy",
    "focal_loss",
    "focal_loss_grad",
    "focal_loss_second_deriv",
    "properized_focal_loss",
    "focal_risk_minimizer",
    "focal_temperature_transform",
    "validate_map_gamma",
    # metrics
    "PredictionBatch",
    "BinRow",
    "BinTable",
    "reliability_table",
    "ece_equal_mass",
    "nll",
    "error_rate",
    # fitting
    "DEFAULT_GAMMAS",
    "LabeledLogits",
    "GridSpec",
    "FitResult",
    "apply_calibrator",
    "fit_temperature",
    "fit_focal_temperature",
    "fit_focal_temperature_line",
    # analysis
    "DEFAULT_SEED",
    "MatchResult",
    "BoundResult",
    "LinearFit",
    "ConfidenceScanRow",
    "ConfidenceScanReport",
    "PropernessCase",
    "PropernessReport",
    "LANDSCAPE_LOSSES",
    "LandscapeTable",
    "minimax_match_binary",
    "minimax_match_simplex",
    "linear_fit_gamma_invT",
    "bound_check",
    "confidence_raising_scan",
    "properness_scan",
    "loss_landscape_table",
    "make_pinned_logit_grid",
]
