"""
Receding-horizon velocity commands from declination and inclination errors.

Three variants share the same quadratic program and differ in the input
matrix B = G T they use:

* ``"lti"``: the gradient measured at the start of the mission, frozen.
* ``"ltv"``: the latest gradient.
* ``"fc"``: the previous gradient, with the input compensated for the change
  of the model between the two steps (flexible correction).
"""
import warnings

import attr
import numpy as np

from .qp import (
    Bounds,
    InfeasibleProblemError,
    build_prediction,
    build_qp,
    soften_state_constraints,
    solve_qp,
)

#: The available controller variants
VARIANTS = ("lti", "ltv", "fc")

#: Condition number above which the compensation system is regularized
CONDITION_LIMIT = 1e8


def check_variant(variant):
    "Raise an error if the variant isn't known"
    if variant not in VARIANTS:
        raise ValueError(
            "Unknown controller variant '{}'. Use one of {}.".format(
                variant, ", ".join(VARIANTS)
            )
        )


@attr.s(frozen=True)
class DiState:
    "Declination and inclination [degrees]"

    d = attr.ib(converter=float)
    i = attr.ib(converter=float)

    def as_array(self):
        "The state as a 2-vector"
        return np.array([self.d, self.i])


@attr.s(frozen=True)
class VelocityCommand:
    "Velocity along the local east (vx) and north (vy) directions [km/h]"

    vx = attr.ib(converter=float)
    vy = attr.ib(converter=float)

    def as_array(self):
        "The command as a 2-vector"
        return np.array([self.vx, self.vy])


@attr.s(frozen=True)
class Interference:
    "Per-step disturbance of declination and inclination [degrees]"

    xi = attr.ib(converter=lambda value: tuple(float(i) for i in value))


def _matrix(value):
    return np.asarray(value, dtype="float64").reshape(2, 2)


def _vector(value):
    return np.asarray(value, dtype="float64").reshape(2)


@attr.s(frozen=True, eq=False)
class ControllerConfig:
    """
    Settings of the receding-horizon controller.

    Parameters
    ----------
    horizon : int
        Number of predicted steps N.
    period : float
        Sampling period T [h].
    q_weight, f_weight, r_weight : 2d-arrays
        State, terminal state and input weights (2x2).
    u_min, u_max : 2-vectors
        Box bounds on the velocity commands [km/h].
    s_min, s_max : 2-vectors
        Bounds on the predicted declination and inclination [degrees].
    variant : str
        ``"lti"``, ``"ltv"`` or ``"fc"``.
    literal_linear_cost : bool
        Build the linear cost without the factor 2 (see
        :func:`geonav.build_qp`).
    """

    horizon = attr.ib(default=2, converter=int)
    period = attr.ib(default=0.1, converter=float)
    q_weight = attr.ib(default=attr.Factory(lambda: np.eye(2)), converter=_matrix)
    f_weight = attr.ib(default=attr.Factory(lambda: np.eye(2)), converter=_matrix)
    r_weight = attr.ib(default=attr.Factory(lambda: 10 * np.eye(2)), converter=_matrix)
    u_min = attr.ib(default=(0.0, 0.0), converter=_vector)
    u_max = attr.ib(default=(40.0, 40.0), converter=_vector)
    s_min = attr.ib(default=(-10.0, 10.0), converter=_vector)
    s_max = attr.ib(default=(100.0, 100.0), converter=_vector)
    variant = attr.ib(default="fc")
    literal_linear_cost = attr.ib(default=False)

    def __attrs_post_init__(self):
        if self.horizon < 1:
            raise ValueError("Invalid horizon {}.".format(self.horizon))
        if self.period <= 0:
            raise ValueError("Invalid sampling period {}.".format(self.period))
        try:
            np.linalg.cholesky((self.r_weight + self.r_weight.T) / 2)
        except np.linalg.LinAlgError:
            raise ValueError("The input weight must be positive definite.")
        check_variant(self.variant)
        for lower, upper in [("u_min", "u_max"), ("s_min", "s_max")]:
            if np.any(getattr(self, lower) > getattr(self, upper)):
                raise ValueError(
                    "Invalid bounds: {} is larger than {}.".format(lower, upper)
                )

    @property
    def bounds(self):
        "The box bounds as a :class:`geonav.Bounds`"
        return Bounds(
            u_min=self.u_min, u_max=self.u_max, s_min=self.s_min, s_max=self.s_max
        )


def heading_from_velocity(vx, vy):
    """
    Speed and heading of a velocity.

    Parameters
    ----------
    vx, vy : float
        East and north components [km/h].

    Returns
    -------
    speed : float
        [km/h]
    theta : float
        Heading counter-clockwise from east in (-180, 180] [degrees].

    Examples
    --------

    >>> speed, theta = heading_from_velocity(-1, -1)
    >>> print("{:.6f} {:.1f}".format(speed, theta))
    1.414214 -135.0

    """
    if vx == 0 and vy == 0:
        raise ValueError("The heading of a zero velocity is undefined.")
    return float(np.hypot(vx, vy)), float(np.degrees(np.arctan2(vy, vx)))


def estimate_interference(b_now, b_prev, u):
    """
    Disturbance caused by the change of the input matrix between two steps.

    Parameters
    ----------
    b_now, b_prev : 2d-arrays
        Input matrices of the current and previous steps.
    u : :class:`geonav.VelocityCommand`
        The command applied over the step.

    Returns
    -------
    interference : :class:`geonav.Interference`
    """
    xi = (_matrix(b_now) - _matrix(b_prev)) @ u.as_array()
    return Interference(xi=xi)


def compensation_input(b_prev, xi):
    """
    Input that cancels an interference through the previous input matrix.

    Solves :math:`B u_a = -\\xi`. When the condition number of B is larger
    than :data:`CONDITION_LIMIT` the Tikhonov system
    :math:`(B^T B + \\mu I) u_a = -B^T \\xi` with
    :math:`\\mu = 10^{-8} \\|B\\|^2` is solved instead.

    Parameters
    ----------
    b_prev : 2d-array
        The previous input matrix.
    xi : :class:`geonav.Interference`

    Returns
    -------
    u_a : :class:`geonav.VelocityCommand`
        The compensation added to the command [km/h].
    """
    b_prev = _matrix(b_prev)
    rhs = -np.asarray(xi.xi)
    norm = np.linalg.norm(b_prev, 2)
    if norm == 0:
        return VelocityCommand(0, 0)
    if np.linalg.cond(b_prev) > CONDITION_LIMIT:
        damping = 1e-8 * norm ** 2
        u_a = np.linalg.solve(b_prev.T @ b_prev + damping * np.eye(2), b_prev.T @ rhs)
    else:
        u_a = np.linalg.solve(b_prev, rhs)
    return VelocityCommand(*u_a)


def compensated_step(s, b_prev, u_h):
    """
    Propagate the state one step with the compensated model :math:`S' = S + B u_h`.

    The state matrix is the identity.
    """
    state = s.as_array() + _matrix(b_prev) @ u_h.as_array()
    return DiState(*state)


def solve_horizon(config, b_mat, s, s_d, warm_start=None):
    """
    Solve the quadratic program of one step for a given input matrix.

    If the state bounds make the problem infeasible they are relaxed with a
    heavily penalized slack and a warning is issued.

    Returns
    -------
    u_opt : 1d-array
        The optimal stacked inputs over the horizon (2N values).
    solution : :class:`geonav.QpSolution`
    """
    pred = build_prediction(np.eye(2), b_mat, config.horizon)
    problem = build_qp(
        pred,
        s.as_array(),
        s_d.as_array(),
        config.q_weight,
        config.r_weight,
        config.f_weight,
        bounds=config.bounds,
        literal=config.literal_linear_cost,
    )
    n_inputs = 2 * config.horizon
    try:
        solution = solve_qp(problem, warm_start=warm_start)
        return solution.u_opt, solution
    except InfeasibleProblemError:
        warnings.warn(
            "State bounds are infeasible for state ({:.4f}, {:.4f}). Relaxing them "
            "with a slack variable.".format(s.d, s.i)
        )
    soft = soften_state_constraints(problem, n_hard=2 * n_inputs)
    solution = solve_qp(soft)
    return solution.u_opt[:n_inputs], solution


def _clip(config, u):
    return VelocityCommand(*np.clip(u, config.u_min, config.u_max))


def command(variant, config, s, s_d, g_now, g_prev, u_prev, g_init=None):
    """
    Velocity command of one step of the controller.

    The input matrix of the prediction is built from the variant's gradient:
    the mission-start gradient ``g_init`` for ``"lti"``, ``g_now`` for
    ``"ltv"`` and ``g_prev`` for ``"fc"``. The ``"fc"`` variant adds the input
    that compensates the interference caused by the previous command through
    the change from ``g_prev`` to ``g_now``. Only the first block of the
    optimal input sequence is returned, clipped to the command box.

    Parameters
    ----------
    variant : str
        ``"lti"``, ``"ltv"`` or ``"fc"``.
    config : :class:`geonav.ControllerConfig`
    s, s_d : :class:`geonav.DiState`
        Current and desired declination and inclination.
    g_now, g_prev : :class:`geonav.GradientMatrix`
        Gradients of the current and previous steps.
    u_prev : :class:`geonav.VelocityCommand`
        Command of the previous step.
    g_init : :class:`geonav.GradientMatrix` or None
        Gradient at the start of the mission. Required by ``"lti"``.

    Returns
    -------
    command : :class:`geonav.VelocityCommand`
    """
    check_variant(variant)
    period = config.period
    if variant == "lti":
        if g_init is None:
            raise ValueError("The 'lti' variant needs the mission-start gradient.")
        u_opt, _ = solve_horizon(config, g_init.as_array() * period, s, s_d)
        return _clip(config, u_opt[:2])
    if variant == "ltv":
        u_opt, _ = solve_horizon(config, g_now.as_array() * period, s, s_d)
        return _clip(config, u_opt[:2])
    b_prev = g_prev.as_array() * period
    b_now = g_now.as_array() * period
    xi = estimate_interference(b_now, b_prev, u_prev)
    u_a = compensation_input(b_prev, xi)
    u_h, _ = solve_horizon(config, b_prev, s, s_d)
    return _clip(config, u_h[:2] + u_a.as_array())


def predicted_displacement(g, s, s_d):
    """
    Displacement that brings the state to the reference according to the gradient.

    Solves :math:`G \\Delta x = S_d - S`.

    Returns
    -------
    displacement : 1d-array or None
        East and north displacement [km], or None if the gradient is singular.
    """
    try:
        return np.linalg.solve(g.as_array(), s_d.as_array() - s.as_array())
    except np.linalg.LinAlgError:
        return None


class MpcController:
    """
    Controller of a single navigation run.

    Keeps the gradient of the previous step, the velocity flown over the
    previous step and the mission-start gradient used by the ``"lti"``
    variant. The ``"fc"`` variant estimates the interference from the flown
    velocity, so the navigator reports it with :meth:`executed` once the
    vehicle has moved. Until then the last command stands in for it.

    Parameters
    ----------
    config : :class:`geonav.ControllerConfig`
    g_init : :class:`geonav.GradientMatrix`
        The gradient estimated at the start of the mission.
    """

    def __init__(self, config, g_init):
        self.config = config
        self.g_init = g_init
        self.g_prev = g_init
        self.u_prev = VelocityCommand(0, 0)

    @property
    def variant(self):
        "The controller variant"
        return self.config.variant

    def step(self, s, s_d, g_now):
        """
        Command for the current step. Stores the gradient and command for
        the next one.
        """
        u = command(
            self.variant,
            self.config,
            s,
            s_d,
            g_now,
            self.g_prev,
            self.u_prev,
            g_init=self.g_init,
        )
        self.g_prev = g_now
        self.u_prev = u
        return u

    def executed(self, velocity):
        "Record the velocity flown after the last command [km/h]"
        self.u_prev = VelocityCommand(*np.asarray(velocity, dtype="float64"))
