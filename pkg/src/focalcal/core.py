"""Core numerical transformations and losses for probability calibration.

Implements the softmax / temperature-scaling family, the binary and
multiclass focal calibration maps with their numerical inverses, the focal
and cross-entropy losses with derivatives, the properized focal loss, and
the composed focal-temperature transform.

All functions are pure, operate on numpy arrays (scalars are accepted and
returned as 0-d results), and are batch-vectorized: probability vectors and
logit vectors live on the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Probabilities are clamped to [EPS, 1-EPS] before any log or division.
EPS = 1e-12

#: |logit| beyond which the binary map switches to its logit-space form.
LOGIT_SWITCH = 30.0


class CalibrationError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CalibrationError):
    """Invalid parameter value (temperature, gamma, grid spec...)."""


class DataError(CalibrationError):
    """Malformed input data (non-finite values, bad labels, ragged rows)."""


class NumericError(CalibrationError):
    """A numerical routine failed to converge or bracket a root."""


class VerificationError(CalibrationError):
    """A numerically checked property was violated."""


@dataclass(frozen=True)
class CalibratorParams:
    """A calibrator identified by its family and the pair (gamma_ev, T).

    family is one of {"temperature", "focal", "focal-temperature"};
    "temperature" forces gamma_ev == 0 and "focal" forces temperature == 1.
    """

    gamma_ev: float
    temperature: float
    family: str = "focal-temperature"

    def __post_init__(self) -> None:
        if self.family not in ("temperature", "focal", "focal-temperature"):
            raise ParameterError(f"unknown calibrator family: {self.family!r}")
        if self.temperature <= 0:
            raise ParameterError("temperature must be positive")
        if self.family == "temperature" and self.gamma_ev != 0.0:
            raise ParameterError("family 'temperature' requires gamma_ev = 0")
        if self.family == "focal" and self.temperature != 1.0:
            raise ParameterError("family 'focal' requires temperature = 1")


def clamp_prob(q):
    """Clamp probabilities into [EPS, 1-EPS]."""
    return np.clip(q, EPS, 1.0 - EPS)


def _require_finite(x, what: str):
    if not np.all(np.isfinite(x)):
        raise DataError(f"{what} contains non-finite values")


def sigmoid(s):
    """Numerically stable logistic function."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def softmax(logits, temperature: float = 1.0):
    """Softmax over the last axis, stable under large logits.

    Invariant under adding a constant to all logits; temperature divides
    the logits first (temperature 1 is plain softmax).
    """
    z = np.asarray(logits, dtype=float)
    _require_finite(z, "logits")
    if temperature <= 0:
        raise ParameterError("temperature must be positive")
    z = z / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def temperature_scale(logits, temperature: float):
    """softmax(logits / T): T < 1 sharpens, T > 1 softens."""
    return softmax(logits, temperature=temperature)


# ---------------------------------------------------------------------------
# Binary focal calibration map
# ---------------------------------------------------------------------------


def _g(s):
    """g(s) = e^s * log(1 + e^-s), evaluated stably for all finite s.

    For s >> 0 the direct product is 'large * tiny'; a short series in
    u = e^-s keeps full precision (g -> 1 from below).  For s << 0 the
    exponential underflows first, so factor it out explicitly.
    """
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    hi = s >= LOGIT_SWITCH
    lo = s <= -LOGIT_SWITCH
    mid = ~(hi | lo)
    u = np.exp(-s[hi])
    out[hi] = 1.0 - u / 2.0 + u * u / 3.0
    out[lo] = np.exp(s[lo]) * (-s[lo] + np.log1p(np.exp(s[lo])))
    out[mid] = np.exp(s[mid]) * np.log1p(np.exp(-s[mid]))
    return out


def focal_calib_binary_logit(s, gamma: float):
    """Binary focal calibration map in logit space.

    Evaluates the map as sigmoid(-L(s)) with
      L(s) = -(gamma+1) s + log1p(gamma g(s)) - log1p(gamma g(-s)),
    which stays finite and monotone over the whole double range.
    """
    s = np.asarray(s, dtype=float)
    _require_finite(s, "logit")
    L = (
        -(gamma + 1.0) * s
        + np.log1p(gamma * _g(s))
        - np.log1p(gamma * _g(-s))
    )
    return sigmoid(-L)


def binary_log_odds(s, gamma: float):
    """Log-odds of the binary focal calibration map at logit s.

    Returns (gamma+1) s - log1p(gamma g(s)) + log1p(gamma g(-s)); useful
    when the probability itself would saturate to 0 or 1 in floats.
    """
    s = np.asarray(s, dtype=float)
    return (
        (gamma + 1.0) * s
        - np.log1p(gamma * _g(s))
        + np.log1p(gamma * _g(-s))
    )


def focal_calib_binary(q, gamma: float):
    """Binary focal calibration map on probabilities.

    p_hat(q) = 1 / (1 + ((1-q)/q)^gamma * ((1-q) - gamma q log q)
                                        / (q - gamma (1-q) log(1-q)))

    Strictly increasing bijection of (0,1) for gamma > -1; identity at
    gamma = 0; raises the winning side's confidence for gamma > 0.
    Inputs outside [0,1] are rejected; values at exactly 0/1 are clamped.
    For extreme inputs the evaluation switches to the logit-space form,
    which is algebraically identical but immune to cancellation.
    """
    q = np.asarray(q, dtype=float)
    if np.any((q < 0.0) | (q > 1.0)):
        raise ParameterError("probability input outside [0, 1]")
    q = clamp_prob(q)
    s = np.log(q) - np.log1p(-q)
    extreme = np.abs(s) > LOGIT_SWITCH
    out = np.empty_like(q)
    if np.any(~extreme):
        qm = q[~extreme]
        r = 1.0 - qm
        ratio = (r / qm) ** gamma
        num = r - gamma * qm * np.log(qm)
        den = qm - gamma * r * np.log(r)
        out[~extreme] = 1.0 / (1.0 + ratio * num / den)
    if np.any(extreme):
        out[extreme] = focal_calib_binary_logit(s[extreme], gamma)
    return out


# ---------------------------------------------------------------------------
# Multiclass focal calibration map
# ---------------------------------------------------------------------------


def _log_weight(q, gamma: float):
    """log of the per-coordinate weight w(q) of the multiclass map.

    w(q) = 1 / (-L'(q)) with L the binary focal loss on the true-class
    probability; -L'(q) factors as (1-q)^gamma * (1/q - gamma log(q)/(1-q)),
    all strictly positive on (0,1) for gamma >= 0.  The published form
    carries an overall minus sign; the normalized ratio is identical, so
    the positive convention is used throughout.
    """
    q = clamp_prob(np.asarray(q, dtype=float))
    r = 1.0 - q
    # log(q)/(1-q) = log1p(-r)/r; series for small r to avoid 0/0 noise
    small = r < 1e-4
    r_safe = np.where(small, 1.0, r)
    ratio = np.where(
        small,
        -(1.0 + r / 2.0 + r * r / 3.0),
        np.log1p(-np.where(small, 0.0, r)) / r_safe,
    )
    a = 1.0 / q - gamma * ratio
    if np.any(a <= 0.0):
        raise NumericError(
            f"multiclass weight lost positivity at gamma={gamma}; "
            "the map is not a valid calibration map for this gamma"
        )
    return -(gamma * np.log1p(-q) + np.log(a))


def focal_calib_multiclass(q, gamma: float):
    """Multiclass focal calibration map: normalized per-coordinate weights.

    p_hat_j = w(q_j) / sum_k w(q_k), computed in log space and normalized
    through a softmax for stability.  Identity at gamma = 0; permutation
    equivariant; argmax-preserving; raises the top coordinate for
    gamma > 0.  Entries at exactly 0 or 1 are clamped, not rejected.
    """
    q = np.asarray(q, dtype=float)
    if q.shape[-1] < 2:
        raise ParameterError("probability vectors need at least 2 entries")
    lw = _log_weight(q, gamma)
    lw = lw - lw.max(axis=-1, keepdims=True)
    w = np.exp(lw)
    return w / w.sum(axis=-1, keepdims=True)


def focal_calib_inverse_binary(p, gamma: float, iters: int = 64):
    """Inverse of the binary map by bisection on (EPS, 1-EPS).

    The map is a strictly increasing bijection, so plain bisection
    converges unconditionally; 64 halvings shrink the bracket below
    machine resolution of the interval.
    """
    p = clamp_prob(np.asarray(p, dtype=float))
    lo = np.full_like(p, EPS)
    hi = np.full_like(p, 1.0 - EPS)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = focal_calib_binary(mid, gamma) > p
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def _weight_inverse(t, gamma: float, iters: int = 64):
    """Solve _log_weight(q, gamma) = t for q by bisection.

    The log-weight is strictly increasing in q for gamma >= 0 (the weight
    runs from 0 at q->0 to +inf at q->1), so the bracket (EPS, 1-EPS)
    always contains the root; targets outside the attainable range clamp
    to the corresponding endpoint.
    """
    t = np.asarray(t, dtype=float)
    lo = np.full_like(t, EPS)
    hi = np.full_like(t, 1.0 - EPS)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = _log_weight(mid, gamma) > t
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def focal_calib_inverse_multiclass(p, gamma: float, iters: int = 64):
    """Inverse of the multiclass map by nested monotone bisection.

    Solves for the normalization constant c such that the per-coordinate
    weight preimages sum to one: with phi = log w, find x = log c with
    sum_j phi^{-1}(x + log p_j) = 1, each preimage by inner bisection.
    The outer sum is strictly increasing in x, so both levels are plain
    monotone bisections.  Requires gamma >= 0 (the weight is monotone
    there; negative gamma only participates in the forward direction).
    """
    if gamma < 0:
        raise ParameterError(
            "multiclass inversion requires gamma >= 0 (the coordinate "
            "weight is not monotone for negative gamma)"
        )
    p = np.asarray(p, dtype=float)
    squeeze = p.ndim == 1
    p2 = clamp_prob(np.atleast_2d(p))
    n = p2.shape[-1]
    logp = np.log(p2)
    logp_max = logp.max(axis=-1)

    x_lo = _log_weight(np.full(p2.shape[0], 1.0 / n), gamma) - logp_max
    x_hi = _log_weight(np.full(p2.shape[0], 1.0 - 1e-9), gamma) - logp_max
    S = _weight_inverse(x_hi[:, None] + logp, gamma, iters).sum(axis=-1)
    if np.any(S < 1.0):
        raise NumericError("multiclass inversion failed to bracket the root")
    for _ in range(iters):
        x = 0.5 * (x_lo + x_hi)
        S = _weight_inverse(x[:, None] + logp, gamma, iters).sum(axis=-1)
        too_big = S > 1.0
        x_hi = np.where(too_big, x, x_hi)
        x_lo = np.where(too_big, x_lo, x)
    q = _weight_inverse(0.5 * (x_lo + x_hi)[:, None] + logp, gamma, iters)
    q = q / q.sum(axis=-1, keepdims=True)
    return q[0] if squeeze else q


# ---------------------------------------------------------------------------
# Losses and derivatives
# ---------------------------------------------------------------------------


def cross_entropy(q, label):
    """-log q[label] with clamping; batch-aware over leading axes."""
    return focal_loss(q, label, 0.0)


def focal_loss(q, label, gamma: float):
    """Focal loss -(1 - q_label)^gamma * log(q_label).

    gamma = 0 reduces to cross-entropy exactly.  The loss role requires
    gamma >= 0 (negative values are only meaningful for the calibration
    map, which has its own pathway).
    """
    if gamma < 0:
        raise ParameterError("focal loss requires gamma >= 0")
    q = np.asarray(q, dtype=float)
    label = np.asarray(label)
    n = q.shape[-1]
    if np.any((label < 0) | (label >= n)):
        raise DataError(f"label out of range for {n} classes")
    ql = clamp_prob(np.take_along_axis(
        np.atleast_2d(q), np.atleast_1d(label).reshape(-1, 1), axis=-1
    ).reshape(np.shape(label)))
    return -((1.0 - ql) ** gamma) * np.log(ql)


def focal_loss_grad(q, gamma: float):
    """First derivative of the true-class focal loss term.

    d/dq [-(1-q)^gamma log q] = gamma (1-q)^(gamma-1) log q - (1-q)^gamma / q
    """
    q = clamp_prob(np.asarray(q, dtype=float))
    r = 1.0 - q
    return gamma * r ** (gamma - 1.0) * np.log(q) - (r ** gamma) / q


def focal_loss_second_deriv(q, gamma: float):
    """Second derivative of the true-class focal loss term.

    2 gamma (1-q)^(gamma-1) / q - gamma (gamma-1) (1-q)^(gamma-2) log q
    + (1-q)^gamma / q^2; strictly positive on (0,1) for all gamma >= 0.
    """
    if gamma < 0:
        raise ParameterError("convexity domain is gamma >= 0")
    q = clamp_prob(np.asarray(q, dtype=float))
    r = 1.0 - q
    return (
        2.0 * gamma * r ** (gamma - 1.0) / q
        - gamma * (gamma - 1.0) * r ** (gamma - 2.0) * np.log(q)
        + (r ** gamma) / (q * q)
    )


def properized_focal_loss(q, label, gamma: float):
    """Proper companion of the focal loss: focal loss at the map preimage.

    L*(q, y) = focal_loss(inverse_map(q), y); its conditional risk is
    minimized exactly at the ground-truth distribution.
    """
    q = np.asarray(q, dtype=float)
    u = focal_calib_inverse_multiclass(q, gamma)
    return focal_loss(u, label, gamma)


def focal_risk_minimizer(p_true: float, gamma: float, iters: int = 80) -> float:
    """Minimizer of the binary focal conditional risk at ground truth p_true.

    Minimizes p_true * FL(q, 1) + (1 - p_true) * FL(q, 0) over q in (0,1).
    The risk is strictly convex, so its derivative
        p_true * FL'(q) - (1 - p_true) * FL'(1 - q)
    crosses zero exactly once; bisection on that sign change nails the
    minimizer to machine precision.  The focal calibration map applied to
    the result recovers p_true (the recovery identity).
    """
    if not (0.0 < p_true < 1.0):
        raise ParameterError("p_true must lie strictly inside (0, 1)")
    if gamma < 0:
        raise ParameterError("the risk uses the loss role: gamma >= 0")

    def risk_grad(q):
        return p_true * focal_loss_grad(q, gamma) - (1.0 - p_true) * focal_loss_grad(
            1.0 - q, gamma
        )

    lo, hi = EPS, 1.0 - EPS
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if risk_grad(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Composed calibrator
# ---------------------------------------------------------------------------


def validate_map_gamma(gamma: float, n_probe: int = 2001) -> None:
    """Check that gamma yields a valid (monotone, positive-weight) map.

    gamma >= 0 is always valid.  For negative gamma the map's defining
    expressions can lose positivity or monotonicity, so both are probed
    numerically on a dense grid; violations raise ParameterError.
    """
    if gamma >= 0:
        return
    q = np.linspace(1e-6, 1.0 - 1e-6, n_probe)
    try:
        lw = _log_weight(q, gamma)
    except NumericError as exc:
        raise ParameterError(str(exc)) from None
    if not np.all(np.isfinite(lw)):
        raise ParameterError(
            f"gamma={gamma}: map weights are not finite on (0, 1)"
        )
    mapped = focal_calib_binary(q, gamma)
    if np.any(np.diff(mapped) <= 0.0):
        raise ParameterError(
            f"gamma={gamma}: binary calibration map is not strictly increasing"
        )


def focal_temperature_transform(logits, params: CalibratorParams):
    """Temperature-scaled softmax followed by the focal calibration map.

    gamma_ev = 0 reduces to plain temperature scaling.  Both stages
    preserve the argmax, so downstream accuracy never changes.
    """
    validate_map_gamma(params.gamma_ev)
    q = temperature_scale(logits, params.temperature)
    if params.gamma_ev == 0.0:
        return q
    return focal_calib_multiclass(q, params.gamma_ev)
