"""
Tour of the binary focal calibration map
========================================

The map sends a model's reported probability q to the probability that
minimizes expected focal loss given the model's own uncertainty, i.e. it
undoes the systematic under-confidence that focal training induces.  This
script walks the map's basic behavior: values across gamma, the fixed
points, invertibility, and how well a plain temperature rescale of the
log-odds can stand in for it.
"""

import numpy as np

from focalcal import (
    bound_check,
    focal_calib_binary,
    focal_calib_inverse_binary,
    linear_fit_gamma_invT,
    minimax_match_binary,
)

# ----------------------------------------------------------------------
# 1. the map raises confidence, more so for larger gamma
# ----------------------------------------------------------------------
print("calibrated probability p = map(q) for a few reported q:")
qs = np.array([0.10, 0.25, 0.50, 0.75, 0.90, 0.99])
header = "  q      " + "  ".join(f"g={g:<4g}" for g in (0.5, 1.0, 2.0, 5.0))
print(header)
for q in qs:
    row = "  ".join(
        f"{float(focal_calib_binary(np.array([q]), g)[0]):.4f}"
        for g in (0.5, 1.0, 2.0, 5.0)
    )
    print(f"  {q:.2f}   {row}")
print("0, 1/2, and 1 are fixed points; q > 1/2 moves up, q < 1/2 down,")
print("symmetrically: map(1-q) = 1 - map(q).")

# ----------------------------------------------------------------------
# 2. the map is a bijection; the inverse recovers the input
# ----------------------------------------------------------------------
rng = np.random.default_rng(0)
q = rng.uniform(0.05, 0.95, size=10_000)
for g in (0.5, 2.0, 5.0):
    p = focal_calib_binary(q, g)
    back = focal_calib_inverse_binary(p, g)
    print(f"gamma={g}: inverse round-trip max |error| = {np.max(np.abs(back - q)):.2e}")

# ----------------------------------------------------------------------
# 3. a single temperature on the log-odds is a good stand-in
# ----------------------------------------------------------------------
# minimax: pick T so that sigmoid(s/T) is as close as possible to the
# exact map, uniformly over log-odds s in [-10, 10]
print("\nminimax temperature stand-in (probability-scale worst error):")
for g in (0.5, 1.0, 2.0, 4.0):
    m = minimax_match_binary(g)
    print(
        f"  gamma={g:<4g} best T={m.best_temperature:.4f} "
        f"(1/T={m.best_inverse_temperature:.4f}) "
        f"max|gap|={m.max_abs_error:.2e}"
    )

# the optimal T is sandwiched by two slopes of the map in log-odds space;
# bound_check also tightens the bracket experimentally on a logit grid
b = bound_check(4.0)
print(
    f"\ngamma=4 temperature bracket: theoretical "
    f"[{b.theoretical_lower_T:.4f}, {b.theoretical_upper_T:.4f}], "
    f"experimental [{b.experimental_lower_T:.3f}, {b.experimental_upper_T:.3f}]"
)

# ----------------------------------------------------------------------
# 4. best 1/T grows linearly with gamma
# ----------------------------------------------------------------------
fit = linear_fit_gamma_invT(2)
print(
    f"\nline fit over gamma in {fit.gamma_values[0]:g}..{fit.gamma_values[-1]:g}: "
    f"1/T = {fit.slope:.4f} * gamma + {fit.intercept:.4f} "
    f"(max residual {fit.max_abs_residual:.3f})"
)
print("so one fitted line predicts a good temperature for any gamma.")
