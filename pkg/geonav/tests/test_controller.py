"""
Test the receding-horizon controller variants.
"""
import numpy as np
import numpy.testing as npt
import pytest

from ..controller import (
    ControllerConfig,
    DiState,
    Interference,
    MpcController,
    VelocityCommand,
    check_variant,
    command,
    compensated_step,
    compensation_input,
    estimate_interference,
    heading_from_velocity,
    predicted_displacement,
    solve_horizon,
)
from ..gradient import GradientMatrix

G_NOW = GradientMatrix.from_array([[0.02, 0.01], [-0.005, 0.03]])
G_PREV = GradientMatrix.from_array([[0.018, 0.012], [-0.004, 0.028]])
S = DiState(5.0, 50.0)
S_D = DiState(6.0, 49.0)


def _wide_config(**kwargs):
    "Bounds that never become active"
    settings = dict(
        horizon=1,
        r_weight=1e-3 * np.eye(2),
        u_min=(-1e3, -1e3),
        u_max=(1e3, 1e3),
        s_min=(-1e3, -1e3),
        s_max=(1e3, 1e3),
    )
    settings.update(kwargs)
    return ControllerConfig(**settings)


def _closed_form(config, gradient):
    "Minimizer of the one-step cost without constraints"
    b_mat = gradient.as_array() * config.period
    error = S.as_array() - S_D.as_array()
    return -np.linalg.solve(b_mat.T @ b_mat + config.r_weight, b_mat.T @ error)


def test_check_variant():
    "Only the three variants are accepted"
    for variant in ("lti", "ltv", "fc"):
        check_variant(variant)
    with pytest.raises(ValueError):
        check_variant("pid")


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(horizon=0),
        dict(period=0),
        dict(r_weight=-np.eye(2)),
        dict(u_min=(50, 0)),
        dict(s_min=(0, 200)),
        dict(variant="pid"),
    ],
)
def test_controller_config_invalid(kwargs):
    "Invalid settings are rejected"
    with pytest.raises(ValueError):
        ControllerConfig(**kwargs)


def test_controller_config_bounds():
    "The bounds are handed to the QP builder"
    bounds = ControllerConfig().bounds
    npt.assert_allclose(bounds.u_min, [0, 0])
    npt.assert_allclose(bounds.s_max, [100, 100])


def test_heading_from_velocity():
    "Speed and heading counter-clockwise from east"
    speed, theta = heading_from_velocity(0, 2)
    npt.assert_allclose([speed, theta], [2, 90])
    with pytest.raises(ValueError):
        heading_from_velocity(0, 0)


def test_estimate_interference_and_compensation():
    "The compensation cancels the interference through the previous model"
    b_prev = G_PREV.as_array() * 0.1
    b_now = G_NOW.as_array() * 0.1
    u = VelocityCommand(20, -10)
    xi = estimate_interference(b_now, b_prev, u)
    npt.assert_allclose(xi.xi, (b_now - b_prev) @ [20, -10])
    u_a = compensation_input(b_prev, xi)
    npt.assert_allclose(b_prev @ u_a.as_array(), -np.asarray(xi.xi), atol=1e-14)


def test_compensation_input_degenerate():
    "Zero and ill-conditioned input matrices"
    xi = Interference(xi=(0.1, 0.2))
    assert compensation_input(np.zeros((2, 2)), xi) == VelocityCommand(0, 0)
    u_a = compensation_input(np.diag([1, 1e-12]), xi)
    assert np.all(np.isfinite(u_a.as_array()))
    npt.assert_allclose(u_a.vx, -0.1, rtol=1e-6)


def test_compensated_step():
    "The state moves by B u"
    state = compensated_step(S, np.eye(2) * 0.1, VelocityCommand(10, -20))
    npt.assert_allclose(state.as_array(), [6, 48])


def test_command_ltv_closed_form():
    "The latest gradient and the unconstrained minimizer"
    config = _wide_config()
    u = command("ltv", config, S, S_D, G_NOW, G_PREV, VelocityCommand(0, 0))
    npt.assert_allclose(u.as_array(), _closed_form(config, G_NOW), rtol=1e-8)


def test_command_lti_uses_initial_gradient():
    "The mission-start gradient is frozen"
    config = _wide_config()
    g_init = GradientMatrix.from_array([[0.03, 0], [0, 0.02]])
    u = command("lti", config, S, S_D, G_NOW, G_PREV, VelocityCommand(0, 0), g_init)
    npt.assert_allclose(u.as_array(), _closed_form(config, g_init), rtol=1e-8)
    with pytest.raises(ValueError):
        command("lti", config, S, S_D, G_NOW, G_PREV, VelocityCommand(0, 0))


def test_command_fc():
    "Previous gradient plus the compensation of the interference"
    config = _wide_config()
    u_prev = VelocityCommand(30, 15)
    u = command("fc", config, S, S_D, G_NOW, G_PREV, u_prev)
    b_prev = G_PREV.as_array() * config.period
    b_now = G_NOW.as_array() * config.period
    u_a = compensation_input(b_prev, estimate_interference(b_now, b_prev, u_prev))
    expected = _closed_form(config, G_PREV) + u_a.as_array()
    npt.assert_allclose(u.as_array(), expected, rtol=1e-8)
    # Without a change of the gradient it is the same as ltv
    same = command("fc", config, S, S_D, G_NOW, G_NOW, u_prev)
    ltv = command("ltv", config, S, S_D, G_NOW, G_PREV, u_prev)
    npt.assert_allclose(same.as_array(), ltv.as_array(), rtol=1e-10)


def test_command_inside_box():
    "Commands respect the input bounds"
    config = ControllerConfig(u_min=(-40, -40), u_max=(40, 40), variant="fc")
    far = DiState(-5.0, 60.0)
    for variant in ("lti", "ltv", "fc"):
        u_prev = VelocityCommand(40, 40)
        u = command(variant, config, S, far, G_NOW, G_PREV, u_prev, g_init=G_NOW)
        assert np.all(u.as_array() >= -40) and np.all(u.as_array() <= 40)


def test_solve_horizon_relaxes_infeasible_state_bounds():
    "Unreachable state bounds are softened with a warning"
    config = ControllerConfig(u_min=(-40, -40), u_max=(40, 40))
    b_mat = 1e-4 * np.eye(2)
    with pytest.warns(UserWarning):
        u_opt, _ = solve_horizon(config, b_mat, DiState(0, 0), DiState(0, 0))
    assert u_opt.size == 2 * config.horizon
    npt.assert_allclose(u_opt[1], 40)


def test_predicted_displacement():
    "Solve G dx = S_d - S, None if G is singular"
    g = GradientMatrix.from_array([[0.5, 0], [0, 0.25]])
    npt.assert_allclose(predicted_displacement(g, S, S_D), [2, -4])
    assert predicted_displacement(GradientMatrix(1, 1, 1, 1), S, S_D) is None


def test_mpc_controller_memory():
    "The controller remembers the previous gradient and command"
    controller = MpcController(_wide_config(variant="fc"), G_PREV)
    assert controller.variant == "fc"
    first = controller.step(S, S_D, G_NOW)
    assert controller.g_prev is G_NOW
    assert controller.u_prev == first
    # Same gradient twice: no interference left to compensate
    second = controller.step(S, S_D, G_NOW)
    config = _wide_config()
    npt.assert_allclose(second.as_array(), _closed_form(config, G_NOW), rtol=1e-8)


def test_mpc_controller_executed_velocity():
    "The fc variant estimates the interference from the velocity flown"
    config = _wide_config(variant="fc")
    controller = MpcController(config, G_PREV)
    controller.step(S, S_D, G_PREV)
    controller.executed((50.0, -10.0))
    assert controller.u_prev == VelocityCommand(50, -10)
    u = controller.step(S, S_D, G_NOW)
    expected = command("fc", config, S, S_D, G_NOW, G_PREV, VelocityCommand(50, -10))
    npt.assert_allclose(u.as_array(), expected.as_array())
    # A vehicle that held its position causes no interference
    controller = MpcController(config, G_PREV)
    controller.step(S, S_D, G_PREV)
    controller.executed((0, 0))
    held = controller.step(S, S_D, G_NOW)
    npt.assert_allclose(held.as_array(), _closed_form(config, G_PREV), rtol=1e-8)
