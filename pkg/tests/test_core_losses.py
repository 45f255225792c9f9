"""Tests for focal loss, its derivatives, the properized variant, and the
pointwise risk minimizer."""

import math

import numpy as np
import pytest

from focalcal import (
    CalibratorParams,
    DataError,
    ParameterError,
    cross_entropy,
    focal_calib_binary,
    focal_loss,
    focal_loss_grad,
    focal_loss_second_deriv,
    focal_risk_minimizer,
    properized_focal_loss,
)


def test_focal_loss_hand_value():
    q = np.array([[0.7, 0.3]])
    y = np.array([0])
    # (1 - 0.7)^2 = 0.09 modulating factor on -log 0.7
    expected = -0.09 * math.log(0.7)
    assert abs(float(focal_loss(q, y, 2.0)[0]) - expected) < 1e-15


def test_focal_loss_gamma_zero_is_cross_entropy():
    rng = np.random.default_rng(7)
    q = rng.dirichlet(np.ones(4), size=200)
    y = rng.integers(0, 4, size=200)
    assert np.max(np.abs(focal_loss(q, y, 0.0) - cross_entropy(q, y))) < 1e-15


def test_focal_loss_below_cross_entropy():
    rng = np.random.default_rng(8)
    q = rng.dirichlet(np.ones(3), size=500)
    y = rng.integers(0, 3, size=500)
    for g in (0.5, 1.0, 3.0):
        assert np.all(focal_loss(q, y, g) <= cross_entropy(q, y) + 1e-15)


def test_focal_loss_rejects_bad_labels_and_gamma():
    q = np.array([[0.6, 0.4]])
    with pytest.raises(DataError):
        focal_loss(q, np.array([2]), 1.0)
    with pytest.raises(DataError):
        focal_loss(q, np.array([-1]), 1.0)
    with pytest.raises(ParameterError):
        focal_loss(q, np.array([0]), -1.0)


def test_grad_matches_finite_differences():
    # multiplicative step keeps the truncation error in scale across the range
    q = np.linspace(1e-3, 1 - 1e-3, 20001)
    for g in (0.0, 0.5, 1.0, 2.0, 5.0):
        h = q * (1 - q) * 1e-4
        fd = (
            -((1 - (q + h)) ** g) * np.log(q + h)
            + ((1 - (q - h)) ** g) * np.log(q - h)
        ) / (2 * h)
        analytic = focal_loss_grad(q, g)
        rel = np.abs(fd - analytic) / np.maximum(np.abs(analytic), 1e-12)
        assert np.max(rel) < 1e-5


def test_second_deriv_matches_finite_differences():
    q = np.linspace(1e-3, 1 - 1e-3, 20001)

    def f(x, g):
        return -((1 - x) ** g) * np.log(x)

    for g in (0.0, 0.5, 1.0, 2.0, 5.0):
        h = q * (1 - q) * 1e-3
        fd = (f(q + h, g) - 2 * f(q, g) + f(q - h, g)) / (h * h)
        analytic = focal_loss_second_deriv(q, g)
        rel = np.abs(fd - analytic) / np.maximum(np.abs(analytic), 1e-12)
        assert np.max(rel) < 1e-5


def test_second_deriv_positive():
    q = np.linspace(1e-4, 1 - 1e-4, 50001)
    for g in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0):
        assert np.all(focal_loss_second_deriv(q, g) > 0)


def test_second_deriv_rejects_negative_gamma():
    with pytest.raises(ParameterError):
        focal_loss_second_deriv(np.array([0.5]), -1.0)


def test_properized_equals_focal_at_gamma_zero():
    rng = np.random.default_rng(9)
    q = rng.dirichlet(np.ones(3), size=200)
    y = rng.integers(0, 3, size=200)
    plain = focal_loss(q, y, 0.0)
    proper = properized_focal_loss(q, y, 0.0)
    assert np.max(np.abs(plain - proper)) < 1e-12


def test_properized_crosses_focal_at_half():
    # the properized loss evaluates the focal loss at the preimage of the
    # report, which sits closer to 1/2 than the report on the confident side
    # (costlier) and further on the unconfident side (cheaper); the per-label
    # curves cross exactly at q = 1/2
    g = 3.0
    y = np.array([0])
    for q0 in (0.6, 0.8, 0.95):
        q = np.array([[q0, 1 - q0]])
        assert float(properized_focal_loss(q, y, g)[0]) > float(
            focal_loss(q, y, g)[0]
        )
    for q0 in (0.05, 0.2, 0.4):
        q = np.array([[q0, 1 - q0]])
        assert float(properized_focal_loss(q, y, g)[0]) < float(
            focal_loss(q, y, g)[0]
        )
    q = np.array([[0.5, 0.5]])
    assert abs(
        float(properized_focal_loss(q, y, g)[0]) - float(focal_loss(q, y, g)[0])
    ) < 1e-9


def test_risk_minimizer_reference_values():
    assert abs(focal_risk_minimizer(0.8, 0.0) - 0.8) < 1e-10
    for g in (0.5, 1.0, 2.0, 5.0):
        assert abs(focal_risk_minimizer(0.5, g) - 0.5) < 1e-10
    m = focal_risk_minimizer(0.8, 2.0)
    assert 0.61 < m < 0.63


def test_risk_minimizer_matches_inverse_map():
    # the map was built so that applying it to the minimizer recovers p
    for p in (0.15, 0.4, 0.65, 0.8, 0.97):
        for g in (0.5, 1.0, 2.0, 3.0):
            m = focal_risk_minimizer(p, g)
            assert abs(float(focal_calib_binary(m, g)) - p) < 1e-6


def test_risk_minimizer_shrinks_toward_half():
    # gamma > 0 pulls the optimal report toward 1/2 on both sides
    for p in (0.7, 0.9):
        prev = p
        for g in (0.5, 1.0, 2.0, 4.0):
            m = focal_risk_minimizer(p, g)
            assert 0.5 < m < prev
            prev = m


def test_risk_minimizer_domain():
    with pytest.raises(ParameterError):
        focal_risk_minimizer(0.0, 1.0)
    with pytest.raises(ParameterError):
        focal_risk_minimizer(1.0, 1.0)
    with pytest.raises(ParameterError):
        focal_risk_minimizer(0.5, -1.0)


def test_calibrator_params_validation():
    p = CalibratorParams(gamma_ev=1.0, temperature=0.8)
    assert p.family == "focal-temperature"
    with pytest.raises(ParameterError):
        CalibratorParams(gamma_ev=0.0, temperature=0.0)
    with pytest.raises(ParameterError):
        CalibratorParams(gamma_ev=1.0, temperature=1.0, family="temperature")
    with pytest.raises(ParameterError):
        CalibratorParams(gamma_ev=0.0, temperature=0.5, family="focal")
    with pytest.raises(ParameterError):
        CalibratorParams(gamma_ev=0.0, temperature=1.0, family="banana")
    # the single-parameter families are fine when consistent
    CalibratorParams(gamma_ev=0.0, temperature=0.5, family="temperature")
    CalibratorParams(gamma_ev=2.0, temperature=1.0, family="focal")
