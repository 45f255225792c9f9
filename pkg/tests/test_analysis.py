"""Tests for the matching, bounds, properness, confidence-scan, and
landscape analyses."""

import math

import numpy as np
import pytest

from focalcal import (
    LANDSCAPE_LOSSES,
    LinearFit,
    ParameterError,
    VerificationError,
    bound_check,
    confidence_raising_scan,
    focal_calib_inverse_multiclass,
    focal_calib_multiclass,
    linear_fit_gamma_invT,
    loss_landscape_table,
    make_pinned_logit_grid,
    minimax_match_binary,
    minimax_match_simplex,
    properness_scan,
)
from focalcal.analysis import _simplex_grid


# ---------------------------------------------------------------- matching


def test_binary_match_gamma_zero_is_exact():
    res = minimax_match_binary(0.0)
    assert res.best_temperature == 1.0
    assert res.max_abs_error == 0.0


def test_binary_match_gamma_four_band():
    res = minimax_match_binary(4.0)
    assert 0.204 <= res.best_temperature <= 0.220
    assert res.max_abs_error < 1e-3
    assert res.dimension == 2
    assert res.best_inverse_temperature == pytest.approx(
        1.0 / res.best_temperature
    )


def test_binary_match_inverse_temperature_increases_with_gamma():
    prev = 0.0
    for g in (0.5, 1.0, 2.0, 4.0):
        inv_t = minimax_match_binary(g, logit_step=0.05).best_inverse_temperature
        assert inv_t > prev
        prev = inv_t


def test_binary_match_optimum_inside_sandwich_bracket():
    for g in (1.0, 2.0, 4.0):
        res = minimax_match_binary(g, logit_step=0.05)
        lo = 1.0 / (g + 1.0)
        hi = 1.0 / (g + 1.0 - math.log(g + 1.0) / 2.0)
        assert lo <= res.best_temperature <= hi


def test_binary_match_rejects_negative_gamma():
    with pytest.raises(ParameterError):
        minimax_match_binary(-0.5)


def test_simplex_match_gamma_zero_is_exact():
    res = minimax_match_simplex(3, 0.0)
    assert res.best_temperature == 1.0
    assert res.max_abs_error == 0.0


def test_simplex_match_three_class_band():
    # coarse version of the reference three-class experiment
    res = minimax_match_simplex(3, 2.0, logit_lo=-5, logit_hi=5, logit_step=0.1)
    assert 0.43 <= res.best_temperature <= 0.49
    assert res.max_abs_error < 0.08
    assert res.dimension == 3
    assert "elapsed_seconds" in res.metadata


def test_match_result_invariants():
    from focalcal import MatchResult

    with pytest.raises(Exception):
        MatchResult(
            gamma=1.0,
            best_temperature=-0.5,
            best_inverse_temperature=-2.0,
            max_abs_error=0.1,
            dimension=2,
            metadata={},
        )
    with pytest.raises(Exception):
        MatchResult(
            gamma=1.0,
            best_temperature=0.5,
            best_inverse_temperature=2.0,
            max_abs_error=-0.1,
            dimension=2,
            metadata={},
        )


# ------------------------------------------------------------------- lines


def test_linear_fit_requires_ten_points():
    with pytest.raises(ParameterError):
        LinearFit(
            dimension=2,
            slope=1.0,
            intercept=0.0,
            gamma_values=(1.0,) * 9,
            best_temperatures=(0.5,) * 9,
            inverse_temperatures=(2.0,) * 9,
            max_abs_errors=(0.0,) * 9,
            max_abs_residual=0.0,
            rms_residual=0.0,
            metadata={},
        )


def test_linear_fit_binary_coarse():
    # a coarse logit grid keeps this quick; the slope/intercept land close
    # to the fine-grid values because the matching is grid-insensitive at
    # this scale
    fit = linear_fit_gamma_invT(2, logit_step=0.1)
    assert len(fit.gamma_values) == 10
    assert 0.85 <= fit.slope <= 1.0
    assert 0.7 <= fit.intercept <= 1.0
    # the line should describe its own points well
    assert fit.max_abs_residual < 0.25
    line_val = fit.line_at(np.array([2.0]))[0]
    assert abs(line_val - (fit.slope * 2.0 + fit.intercept)) < 1e-12


def test_linear_fit_csv_rows():
    fit = linear_fit_gamma_invT(2, logit_step=0.2)
    rows = fit.to_csv_rows()
    assert rows[0] == [
        "gamma",
        "best_temperature",
        "best_inverse_temperature",
        "max_abs_error",
        "line_value",
        "residual",
    ]
    assert len(rows) == len(fit.gamma_values) + 1


# ------------------------------------------------------------------ bounds


def test_bound_check_hand_values_gamma_one():
    res = bound_check(1.0)
    assert res.theoretical_lower_T == pytest.approx(0.5)
    assert res.theoretical_upper_T == pytest.approx(
        1.0 / (2.0 - math.log(2.0) / 2.0)
    )
    # experimental band sits strictly inside the theoretical one
    assert res.theoretical_lower_T < res.experimental_lower_T
    assert res.experimental_upper_T < res.theoretical_upper_T


def test_bound_check_reference_gamma_four():
    res = bound_check(4.0)
    assert res.theoretical_lower_T == pytest.approx(0.2)
    assert res.theoretical_upper_T == pytest.approx(
        1.0 / (5.0 - math.log(5.0) / 2.0)
    )
    assert res.experimental_lower_T == pytest.approx(0.206)
    assert res.experimental_upper_T == pytest.approx(0.218)


def test_bound_check_rejects_nonpositive_gamma():
    with pytest.raises(ParameterError):
        bound_check(0.0)
    with pytest.raises(ParameterError):
        bound_check(-1.0)


def test_bound_result_ordering_invariant():
    from focalcal import BoundResult

    with pytest.raises(VerificationError):
        BoundResult(
            gamma=1.0,
            theoretical_lower_T=0.5,
            theoretical_upper_T=0.4,
            experimental_lower_T=0.45,
            experimental_upper_T=0.42,
            metadata={},
        )


# -------------------------------------------------------- confidence scan


def test_confidence_scan_clean_for_positive_gamma():
    report = confidence_raising_scan(
        dims=(2, 3), gammas=(0.5, 2.0), n_samples=2000, seed=123
    )
    assert report.total_violations() == 0
    assert all(row.min_margin >= 0 for row in report.rows)
    assert len(report.rows) == 4


def test_confidence_scan_flags_negative_gamma():
    report = confidence_raising_scan(
        dims=(3,),
        gammas=(-0.5,),
        n_samples=2000,
        seed=123,
        raise_on_violation=False,
    )
    assert report.total_violations() > 0
    with pytest.raises(VerificationError):
        confidence_raising_scan(
            dims=(3,), gammas=(-0.5,), n_samples=2000, seed=123
        )


def test_confidence_scan_seed_reproducible():
    a = confidence_raising_scan(dims=(2,), gammas=(1.0,), n_samples=500, seed=7)
    b = confidence_raising_scan(dims=(2,), gammas=(1.0,), n_samples=500, seed=7)
    assert a.rows == b.rows


def test_confidence_scan_finds_genuine_high_dim_violations():
    # raising the top coordinate is NOT universal: at 10 classes and
    # gamma=0.5 a large fraction of diffuse Dirichlet(1) draws strictly
    # decrease; the scan must report them with a witness rather than
    # pretend the property holds
    report = confidence_raising_scan(
        dims=(10,),
        gammas=(0.5,),
        n_samples=20_000,
        seed=11,
        raise_on_violation=False,
    )
    row = report.rows[0]
    assert row.n_violations > 0
    assert row.min_margin < 0
    assert row.witness is not None
    q = np.array([row.witness["input"]])
    mapped = focal_calib_multiclass(q, 0.5)
    idx = int(np.argmax(q))
    assert mapped[0, idx] < q[0, idx]
    # every violating input observed so far is diffuse: top below 1/2
    assert q.max() < 0.5
    # and the witness survives the JSON round trip
    assert report.to_dict()["rows"][0]["witness"]["input"] == row.witness["input"]


# ------------------------------------------------------------- properness


def test_properness_binary_symmetric_point():
    report = properness_scan([np.array([0.5, 0.5])], 3.0, grid_step=1e-3)
    case = report.cases[0]
    assert abs(case.minimizer[0] - 0.5) < 1e-9
    assert case.linf_distance <= 2e-3


def test_properness_three_class_reference_point():
    p = np.array([0.55, 0.30, 0.15])
    for g in (1.0, 3.0):
        report = properness_scan([p], g, grid_step=5e-3)
        assert report.max_linf <= 1e-2
        assert report.dimension == 3


def test_properness_random_binary_points():
    rng = np.random.default_rng(21)
    points = [rng.dirichlet(np.ones(2)) for _ in range(5)]
    report = properness_scan(points, 2.0, grid_step=2e-3)
    assert report.max_linf <= 4e-3


def test_properness_gamma_zero_shortcut():
    p = np.array([0.3, 0.7])
    report = properness_scan([p], 0.0, grid_step=1e-3)
    assert report.max_linf <= 2e-3


def test_properness_rejects_boundary_and_negative_gamma():
    with pytest.raises(ParameterError):
        properness_scan([np.array([1.0, 0.0])], 1.0)
    with pytest.raises(ParameterError):
        properness_scan([np.array([0.6, 0.4])], -1.0)


def test_properness_csv_rows():
    report = properness_scan([np.array([0.4, 0.6])], 1.0, grid_step=5e-3)
    rows = report.to_csv_rows()
    assert rows[0] == ["p_0", "p_1", "minimizer_0", "minimizer_1",
                       "linf_distance"]
    assert len(rows) == 2


# -------------------------------------------------------------- landscape


def test_landscape_brier_direct_formula():
    p = np.array([0.55, 0.30, 0.15])
    table = loss_landscape_table(p, 2.0, grid_step=0.02)
    idx = table.loss_names.index("brier")
    expected = (table.grid**2).sum(axis=-1) - 2.0 * table.grid @ p + 1.0
    assert np.max(np.abs(table.risks[:, idx] - expected)) < 1e-12
    # Brier risk is minimized at the truth itself
    argmin = table.argmin_points()["brier"]
    assert np.max(np.abs(np.asarray(argmin) - p)) <= 0.02 + 1e-12


def test_landscape_gamma_zero_focal_equals_cross_entropy():
    p = np.array([0.7, 0.3])
    table = loss_landscape_table(p, 0.0, grid_step=0.01)
    i_ce = table.loss_names.index("cross-entropy")
    i_fl = table.loss_names.index("focal")
    i_pf = table.loss_names.index("properized-focal")
    assert np.max(np.abs(table.risks[:, i_ce] - table.risks[:, i_fl])) < 1e-12
    assert np.max(np.abs(table.risks[:, i_ce] - table.risks[:, i_pf])) < 1e-12


def test_landscape_focal_minimum_shrinks_toward_half():
    p = np.array([0.8, 0.2])
    table = loss_landscape_table(p, 2.0, grid_step=0.005)
    argmins = table.argmin_points()
    assert abs(argmins["cross-entropy"][0] - 0.8) <= 0.005 + 1e-12
    assert abs(argmins["properized-focal"][0] - 0.8) <= 0.005 + 1e-12
    # focal pulls its optimum toward 1/2
    assert 0.6 < argmins["focal"][0] < 0.65


def test_landscape_percentile_thresholds_monotone():
    p = np.array([0.55, 0.30, 0.15])
    table = loss_landscape_table(p, 1.0, grid_step=0.02)
    assert table.percentile_levels == (3.0, 12.0, 20.0)
    for per_loss in table.thresholds.values():
        vals = [per_loss[level] for level in table.percentile_levels]
        assert vals[0] <= vals[1] <= vals[2]


def test_landscape_rejects_unknown_loss_and_dims():
    p = np.array([0.5, 0.5])
    with pytest.raises(ParameterError):
        loss_landscape_table(p, 1.0, losses=("hinge",))
    with pytest.raises(ParameterError):
        loss_landscape_table(np.full(4, 0.25), 1.0)
    assert set(LANDSCAPE_LOSSES) == {
        "brier",
        "cross-entropy",
        "focal",
        "properized-focal",
    }


def test_landscape_csv_rows():
    p = np.array([0.6, 0.4])
    table = loss_landscape_table(p, 1.0, grid_step=0.1)
    rows = table.to_csv_rows()
    assert len(rows) == len(table.grid) + 1
    assert rows[0][: table.dimension] == ["q_0", "q_1"]


# ------------------------------------------------------------- grid utils


def test_pinned_logit_grid_shape():
    grid = make_pinned_logit_grid(3, -1.0, 1.0, 0.5)
    # 5 values per free axis, last coordinate pinned at zero
    assert grid.shape == (25, 3)
    assert np.all(grid[:, -1] == 0.0)
    assert grid[:, 0].min() == -1.0 and grid[:, 0].max() == 1.0


def test_pinned_logit_grid_overflow_guard():
    with pytest.raises(ParameterError):
        make_pinned_logit_grid(6, -5.0, 5.0, 0.01)
    with pytest.raises(ParameterError):
        make_pinned_logit_grid(2, -1.0, 1.0, 0.5)


def test_simplex_grid_sums():
    for n, step in ((2, 0.01), (3, 0.02)):
        grid = _simplex_grid(n, step)
        assert np.max(np.abs(grid.sum(axis=-1) - 1.0)) < 1e-9
        assert grid.shape[1] == n
        assert np.all(grid >= -1e-12)


def test_cross_entropy_consistency_with_landscape():
    # risk at the truth equals the entropy of the truth
    p = np.array([0.55, 0.30, 0.15])
    table = loss_landscape_table(p, 1.0, grid_step=0.05)
    i_ce = table.loss_names.index("cross-entropy")
    j = np.argmin(np.max(np.abs(table.grid - p), axis=-1))
    entropy = -np.sum(p * np.log(p))
    assert abs(table.risks[j, i_ce] - entropy) < 0.05


def test_properization_undoes_confidence_raising():
    # the plain focal risk is minimized near the preimage of p (far from p),
    # while the properized scan recovers p itself: the composition with the
    # inverse map is what restores properness
    p = np.array([0.55, 0.30, 0.15])
    g = 1.0
    preimage = focal_calib_inverse_multiclass(p, g)
    assert np.max(np.abs(preimage - p)) > 0.02
    report = properness_scan([p], g, grid_step=5e-3)
    assert np.max(np.abs(np.asarray(report.cases[0].minimizer) - p)) <= 5e-3
