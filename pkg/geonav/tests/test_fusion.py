"""
Test the error-state Kalman filter that fuses the INS.
"""
import numpy as np
import numpy.testing as npt
import pytest

from ..fusion import (
    N_STATES,
    POSITION_SLOTS,
    FusionConfig,
    FusionState,
    apply_correction,
    init_fusion_state,
    innovation,
    position_selector,
    predict,
    reset_position,
    update,
)
from ..geofield import GeoPosition
from ..gradient import GradientMatrix


def _position_diagonal(value):
    matrix = np.zeros((N_STATES, N_STATES))
    matrix[POSITION_SLOTS, POSITION_SLOTS] = value
    return matrix


def test_fusion_config_defaults():
    "Identity transition and noise on the position slots"
    config = FusionConfig()
    npt.assert_allclose(config.f_mat, np.eye(N_STATES))
    npt.assert_allclose(config.q_c, _position_diagonal(0.05))
    npt.assert_allclose(config.r_c, 2 * np.eye(2))
    npt.assert_allclose(config.h_b, position_selector())
    assert POSITION_SLOTS == (3, 4)


def test_fusion_config_invalid():
    "Covariances must be symmetric and positive semi-definite"
    asymmetric = _position_diagonal(1.0)
    asymmetric[0, 1] = 0.5
    with pytest.raises(ValueError):
        FusionConfig(q_c=asymmetric)
    with pytest.raises(ValueError):
        FusionConfig(r_c=-np.eye(2))
    with pytest.raises(ValueError):
        FusionConfig(trigger="determinant")


def test_gradient_strength_triggers():
    "Smallest entry or smallest singular value"
    gradient = GradientMatrix.from_array([[3, 0.5], [0, 4]])
    assert FusionConfig().gradient_strength(gradient) == 0
    strength = FusionConfig(trigger="min_singular").gradient_strength(gradient)
    npt.assert_allclose(strength, np.linalg.svd(gradient.as_array())[1][-1])


def test_predict_adds_process_noise():
    "Identity transition: the covariance grows by Q"
    config = FusionConfig()
    prior = predict(init_fusion_state(config), config)
    npt.assert_allclose(prior.position_variance, [1.05, 1.05])
    npt.assert_allclose(prior.x_hat, 0)


def test_update_scalar_gain():
    "Each position slot is a scalar filter"
    config = FusionConfig()
    prior = predict(init_fusion_state(config), config)
    posterior, correction = update(prior, config, [0.2, -0.1])
    gain = 1.05 / (1.05 + 2)
    npt.assert_allclose(correction, [0.2 * gain, -0.1 * gain])
    npt.assert_allclose(posterior.position_variance, [1.05 * 2 / 3.05] * 2)
    # Other states aren't observed
    npt.assert_allclose(np.delete(posterior.x_hat, POSITION_SLOTS), 0)


def test_update_joseph_matches_simple_form():
    "Both covariance updates agree for the optimal gain"
    config = FusionConfig(p0=np.diag(np.linspace(0.5, 2, N_STATES)))
    prior = predict(init_fusion_state(config), config)
    joseph, _ = update(prior, config, [0.1, 0.3])
    simple, _ = update(prior, config, [0.1, 0.3], joseph=False)
    npt.assert_allclose(joseph.p, simple.p, atol=1e-12)
    npt.assert_allclose(joseph.p, joseph.p.T)


def test_update_singular():
    "A zero innovation covariance can't be inverted"
    config = FusionConfig(r_c=np.zeros((2, 2)), p0=np.zeros((N_STATES, N_STATES)))
    with pytest.raises(ValueError):
        update(init_fusion_state(config), config, [0.1, 0.1])


def test_repeated_fusion_reaches_steady_state():
    "The position variance converges to the Riccati fixed point"
    config = FusionConfig()
    state = init_fusion_state(config)
    for _ in range(200):
        state, _ = update(predict(state, config), config, [0, 0])
        state = reset_position(state)
    q, r = 0.05, 2.0
    steady = (-q + np.sqrt(q ** 2 + 4 * q * r)) / 2
    npt.assert_allclose(state.position_variance, [steady, steady], rtol=1e-6)


def test_reset_position():
    "Only the position errors are zeroed"
    state = FusionState(x_hat=np.arange(N_STATES, dtype=float), p=np.eye(N_STATES))
    reset = reset_position(state)
    npt.assert_allclose(reset.x_hat[list(POSITION_SLOTS)], 0)
    assert reset.x_hat[5] == 5
    npt.assert_allclose(reset.p, state.p)


def test_fusion_state_invalid():
    "Shapes and finiteness"
    with pytest.raises(ValueError):
        FusionState(x_hat=np.zeros(3), p=np.eye(N_STATES))
    with pytest.raises(ValueError):
        FusionState(x_hat=np.full(N_STATES, np.nan), p=np.eye(N_STATES))


def test_innovation_and_correction():
    "Innovations wrap the longitude and corrections clip the latitude"
    npt.assert_allclose(innovation(GeoPosition(10, 5), GeoPosition(9, 6)), [1, -1])
    corrected = apply_correction(GeoPosition(179.95, 89.99), (0.1, 0.05))
    npt.assert_allclose([corrected.lon, corrected.lat], [-179.95, 90])


@pytest.mark.slow
def test_fusion_matches_scalar_filters():
    "Long runs with random innovations agree with two independent scalar filters"
    config = FusionConfig()
    state = init_fusion_state(config)
    q, r = 0.05, 2.0
    x_scalar, p_scalar = np.zeros(2), np.ones(2)
    innovations = np.random.default_rng(42).normal(0, 1, size=(10000, 2))
    for dz in innovations:
        state, correction = update(predict(state, config), config, dz)
        p_prior = p_scalar + q
        gain = p_prior / (p_prior + r)
        x_scalar = x_scalar + gain * (dz - x_scalar)
        p_scalar = (1 - gain) * p_prior
        npt.assert_allclose(correction, x_scalar, rtol=0, atol=1e-10)
        npt.assert_allclose(state.position_variance, p_scalar, rtol=0, atol=1e-10)
        npt.assert_allclose(state.p, state.p.T, rtol=0, atol=1e-10)
    assert np.linalg.eigvalsh(state.p).min() >= -1e-12
    npt.assert_allclose(np.delete(state.x_hat, POSITION_SLOTS), 0)
