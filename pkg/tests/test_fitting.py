"""Tests for grid search fitting of temperature and focal-temperature
calibrators."""

import numpy as np
import pytest

from focalcal import (
    CalibratorParams,
    GridSpec,
    LabeledLogits,
    ParameterError,
    apply_calibrator,
    fit_focal_temperature,
    fit_focal_temperature_line,
    fit_temperature,
    softmax,
)


def _synthetic(seed=11, n=4000, n_classes=4, t_true=1.0):
    rng = np.random.default_rng(seed)
    z = rng.normal(0.0, 1.5, size=(n, n_classes))
    p = softmax(z)
    u = rng.uniform(size=n)
    labels = (u[:, None] >= np.cumsum(p, axis=-1)).sum(axis=-1)
    return LabeledLogits(t_true * z, labels)


def test_grid_spec_temperatures():
    grid = GridSpec(gamma_values=(0.0,), t_min=0.01, t_max=5.0, t_step=0.01)
    temps = grid.temperatures()
    assert len(temps) == 500
    assert temps[0] == 0.01
    assert temps[-1] == 5.0
    # endpoints are included when the step divides the range exactly
    grid2 = GridSpec(gamma_values=(0.0,), t_min=0.5, t_max=2.0, t_step=0.25)
    assert list(grid2.temperatures()) == [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]


def test_grid_spec_validation():
    with pytest.raises(ParameterError):
        GridSpec(gamma_values=(), t_min=0.1, t_max=1.0, t_step=0.1)
    with pytest.raises(ParameterError):
        GridSpec(gamma_values=(0.0,), t_min=0.0, t_max=1.0, t_step=0.1)
    with pytest.raises(ParameterError):
        GridSpec(gamma_values=(0.0,), t_min=1.0, t_max=0.5, t_step=0.1)
    with pytest.raises(ParameterError):
        GridSpec(gamma_values=(0.0,), t_min=0.1, t_max=1.0, t_step=0.0)
    with pytest.raises(ParameterError):
        GridSpec(gamma_values=(0.0,), t_min=0.1, t_max=1.0, t_step=0.1,
                 criterion="accuracy")


def test_fit_temperature_on_calibrated_data():
    # logits drawn from the model that generated the labels: the fitted
    # temperature should land near 1
    val = _synthetic(seed=12, n=20000)
    grid = GridSpec(gamma_values=(0.0,), t_min=0.5, t_max=2.0, t_step=0.05)
    result = fit_temperature(val, grid)
    assert result.best.family == "temperature"
    assert result.best.gamma_ev == 0.0
    assert 0.8 <= result.best.temperature <= 1.25


def test_fit_recovers_applied_temperature():
    val = _synthetic(seed=13, n=20000, t_true=2.0)
    grid = GridSpec(
        gamma_values=(0.0,), t_min=0.5, t_max=4.0, t_step=0.05,
        criterion="nll",
    )
    result = fit_temperature(val, grid)
    # the generating softmax used z, we observe 2z, so T near 2 undoes it
    assert 1.7 <= result.best.temperature <= 2.4


def test_focal_temperature_never_worse_than_temperature():
    val = _synthetic(seed=14, n=5000, t_true=0.7)
    grid = GridSpec(
        gamma_values=(0.0, 0.5, 1.0), t_min=0.5, t_max=2.0, t_step=0.1
    )
    ts = fit_temperature(val, grid)
    fts = fit_focal_temperature(val, grid)
    # gamma = 0 row of the fts sweep reproduces the ts sweep bit for bit,
    # so the joint optimum can never be worse
    assert fts.criterion_value <= ts.criterion_value


def test_trace_shape_and_grid_coverage():
    val = _synthetic(seed=15, n=1000)
    grid = GridSpec(gamma_values=(0.0, 1.0), t_min=0.5, t_max=1.5, t_step=0.25)
    result = fit_focal_temperature(val, grid)
    assert len(result.trace) == 2 * 5
    gammas = {g for g, _, _ in result.trace}
    temps = {t for _, t, _ in result.trace}
    assert gammas == {0.0, 1.0}
    assert temps == {0.5, 0.75, 1.0, 1.25, 1.5}
    assert all(v >= 0 for _, _, v in result.trace)


def test_tie_break_prefers_identity():
    # all-zero logit rows give uniform probabilities for every candidate, so
    # every grid point ties; the reported winner must be the least-surprising
    # parameter pair
    z = np.zeros((40, 3))
    labels = np.arange(40) % 3
    val = LabeledLogits(z, labels)
    grid = GridSpec(
        gamma_values=(0.0, 0.5, 1.0), t_min=0.5, t_max=1.5, t_step=0.25
    )
    result = fit_focal_temperature(val, grid)
    assert result.best.gamma_ev == 0.0
    assert result.best.temperature == 1.0


def test_line_search_probes_and_trace():
    val = _synthetic(seed=16, n=2000)
    grid = GridSpec(
        gamma_values=(0.0, 0.5, 1.0, 2.0), t_min=0.5, t_max=1.5, t_step=0.25
    )
    full = fit_focal_temperature(val, grid)
    line = fit_focal_temperature_line(val, grid)
    # probes the two extreme nonzero gammas plus the line pass
    assert len(line.trace) <= len(full.trace)
    assert line.best.temperature in grid.temperatures()
    assert line.criterion_value >= full.criterion_value - 1e-15


def test_apply_calibrator_identity():
    z = np.array([[1.0, -0.5, 0.2]])
    data = LabeledLogits(z, np.array([0]))
    params = CalibratorParams(gamma_ev=0.0, temperature=1.0,
                              family="temperature")
    batch = apply_calibrator(data, params)
    assert np.max(np.abs(batch.probabilities - softmax(z))) < 1e-15
    assert np.array_equal(batch.labels, data.labels)


def test_apply_calibrator_focal_family():
    from focalcal import focal_calib_multiclass, temperature_scale

    z = np.array([[1.0, -0.5, 0.2], [0.1, 2.0, -1.0]])
    data = LabeledLogits(z, np.array([2, 1]))
    params = CalibratorParams(gamma_ev=1.5, temperature=0.8)
    expected = focal_calib_multiclass(temperature_scale(z, 0.8), 1.5)
    batch = apply_calibrator(data, params)
    assert np.max(np.abs(batch.probabilities - expected)) < 1e-15


def test_result_to_dict_keys():
    val = _synthetic(seed=17, n=500)
    grid = GridSpec(gamma_values=(0.0, 0.5), t_min=0.5, t_max=1.5, t_step=0.5)
    result = fit_focal_temperature(val, grid)
    d = result.to_dict()
    assert set(d) == {
        "family",
        "gamma_ev",
        "temperature",
        "criterion",
        "criterion_value",
        "grid",
        "trace",
    }
    assert d["criterion"] == "ece"
    assert isinstance(d["trace"], list)
    assert len(d["trace"][0]) == 3


def test_labeled_logits_validation():
    with pytest.raises(ParameterError):
        LabeledLogits(np.array([[1.0, 2.0]]), np.array([0, 1]))
    with pytest.raises(ParameterError):
        LabeledLogits(np.empty((0, 2)), np.empty(0, dtype=int))
