"""
Recalibrating a synthetic overconfident classifier
==================================================

End-to-end fitting demo.  We build a 10-class population whose true label
probabilities come from softening a random logit model, then hand the
fitter logits that are too sharp (scaled by T=0.7).  Plain temperature
scaling must fix the sharpness with a single knob; the focal-temperature
family gets a second knob (the calibration map's gamma) and can only do
better on the selection criterion because its grid contains gamma=0.
"""

import numpy as np

from focalcal import (
    CalibratorParams,
    GridSpec,
    LabeledLogits,
    apply_calibrator,
    ece_equal_mass,
    error_rate,
    fit_focal_temperature,
    fit_focal_temperature_line,
    fit_temperature,
    focal_calib_multiclass,
    nll,
    softmax,
)

rng = np.random.default_rng(42)
n_classes, n_rows = 10, 40_000

# ground truth: softened softmax probabilities; observed logits: sharpened
z_raw = rng.normal(0.0, 2.0, size=(n_rows, n_classes))
p_true = focal_calib_multiclass(softmax(z_raw), 0.5)
u = rng.uniform(size=n_rows)
labels = (u[:, None] >= np.cumsum(p_true, axis=-1)).sum(axis=-1)
labels = np.clip(labels, 0, n_classes - 1)
z_obs = 0.7 * z_raw

val = LabeledLogits(z_obs[:10_000], labels[:10_000])
test = LabeledLogits(z_obs[10_000:], labels[10_000:])

print("uncalibrated test metrics:")
identity = CalibratorParams(gamma_ev=0.0, temperature=1.0, family="temperature")
raw = apply_calibrator(test, identity)
print(f"  ece={ece_equal_mass(raw):.4f}  nll={nll(raw):.4f}  err={error_rate(raw):.4f}")

# ----------------------------------------------------------------------
# fit the three calibrators on the validation split
# ----------------------------------------------------------------------
grid = GridSpec(gamma_values=(0.0, 0.5, 1.0), t_min=0.1, t_max=2.0, t_step=0.02)

ts = fit_temperature(val, grid)
fts = fit_focal_temperature(val, grid)
line = fit_focal_temperature_line(val, grid)

for name, fit in (("temperature", ts), ("focal-temperature", fts),
                  ("line-search", line)):
    batch = apply_calibrator(test, fit.best)
    print(
        f"{name:>18}: gamma_ev={fit.best.gamma_ev:.1f} "
        f"T={fit.best.temperature:.2f} val-{fit.criterion}={fit.criterion_value:.4f} "
        f"| test ece={ece_equal_mass(batch):.4f} nll={nll(batch):.4f} "
        f"err={error_rate(batch):.4f} | {len(fit.trace)} evaluations"
    )

print(
    "\nboth stages preserve the argmax, so the error rate never moves; the"
    "\nfocal family matches or beats plain temperature scaling on the"
    "\nselection criterion by construction, and the line search reaches the"
    "\nsame answer with about a third of the grid evaluations."
)
