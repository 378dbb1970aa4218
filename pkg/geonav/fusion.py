"""
Error-state Kalman filter fusing the INS position with the geomagnetic
dead-reckoned position.

The state is the 15-component INS error of :class:`geonav.InsErrorState` and
the measurement is the difference between the INS and the geomagnetic
positions, which observes only the longitude and latitude errors.
"""
import attr
import numpy as np

from .coordinates import longitude_difference
from .geofield import GeoPosition
from .ins import ERROR_STATE_FIELDS

#: Number of components of the error state
N_STATES = len(ERROR_STATE_FIELDS)

#: Indices of the longitude and latitude errors in the state
POSITION_SLOTS = (
    ERROR_STATE_FIELDS.index("d_lon"),
    ERROR_STATE_FIELDS.index("d_lat"),
)

#: Symmetry tolerance of the covariance matrices
SYMMETRY_TOL = 1e-10

#: Criteria that decide when the gradient is too weak for navigation
TRIGGERS = ("min_abs", "min_singular")


def position_selector():
    """
    The 2x15 observation matrix that extracts the position errors.

    Examples
    --------

    >>> h_b = position_selector()
    >>> print(h_b.shape, np.nonzero(h_b)[1])
    (2, 15) [3 4]

    """
    h_b = np.zeros((2, N_STATES))
    h_b[0, POSITION_SLOTS[0]] = 1
    h_b[1, POSITION_SLOTS[1]] = 1
    return h_b


def _position_diagonal(value):
    "15x15 diagonal matrix with the value at the position slots"
    matrix = np.zeros((N_STATES, N_STATES))
    matrix[POSITION_SLOTS, POSITION_SLOTS] = value
    return matrix


def _square(size):
    def converter(value):
        return np.asarray(value, dtype="float64").reshape(size, size)

    return converter


def _check_covariance(name, matrix):
    "Raise ValueError if the matrix isn't symmetric positive semi-definite"
    if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOL:
        raise ValueError("The {} matrix must be symmetric.".format(name))
    if np.min(np.linalg.eigvalsh(matrix)) < -SYMMETRY_TOL:
        raise ValueError("The {} matrix must be positive semi-definite.".format(name))


@attr.s(frozen=True, eq=False)
class FusionConfig:
    """
    Matrices of the fusion filter.

    Parameters
    ----------
    f_mat : 2d-array
        State transition matrix (15x15). Identity by default.
    q_c : 2d-array
        Process noise covariance (15x15). 0.05 on the position slots.
    r_c : 2d-array
        Measurement noise covariance (2x2) [degrees squared].
    p0 : 2d-array
        Initial covariance (15x15). 1 on the position slots.
    trigger : str
        How the gradient is compared to the fusion threshold: smallest
        absolute entry (``"min_abs"``) or smallest singular value
        (``"min_singular"``).
    """

    f_mat = attr.ib(
        default=attr.Factory(lambda: np.eye(N_STATES)), converter=_square(N_STATES)
    )
    q_c = attr.ib(
        default=attr.Factory(lambda: _position_diagonal(0.05)),
        converter=_square(N_STATES),
    )
    r_c = attr.ib(default=attr.Factory(lambda: 2 * np.eye(2)), converter=_square(2))
    p0 = attr.ib(
        default=attr.Factory(lambda: _position_diagonal(1.0)),
        converter=_square(N_STATES),
    )
    trigger = attr.ib(default="min_abs")

    def __attrs_post_init__(self):
        for name in ("q_c", "r_c", "p0"):
            _check_covariance(name, getattr(self, name))
        if self.trigger not in TRIGGERS:
            raise ValueError(
                "Unknown fusion trigger '{}'. Use one of {}.".format(
                    self.trigger, ", ".join(TRIGGERS)
                )
            )

    @property
    def h_b(self):
        "The observation matrix"
        return position_selector()

    def gradient_strength(self, gradient):
        "The quantity compared to the fusion threshold for a gradient"
        if self.trigger == "min_singular":
            return gradient.min_singular_value()
        return gradient.min_abs_entry()


@attr.s(frozen=True, eq=False)
class FusionState:
    """
    Estimate of the INS error and its covariance.

    Parameters
    ----------
    x_hat : 1d-array
        The estimated error state (15 values).
    p : 2d-array
        Its covariance (15x15).
    """

    x_hat = attr.ib(converter=lambda value: np.asarray(value, dtype="float64"))
    p = attr.ib(converter=_square(N_STATES))

    def __attrs_post_init__(self):
        if self.x_hat.shape != (N_STATES,):
            raise ValueError("Invalid state shape {}.".format(self.x_hat.shape))
        if not np.all(np.isfinite(self.x_hat)) or not np.all(np.isfinite(self.p)):
            raise ValueError("Non-finite fusion state.")

    @property
    def position_variance(self):
        "Variances of the longitude and latitude errors [degrees squared]"
        return self.p[POSITION_SLOTS, POSITION_SLOTS]


def init_fusion_state(config):
    "A zero error estimate with the initial covariance of the configuration"
    return FusionState(x_hat=np.zeros(N_STATES), p=config.p0.copy())


def _symmetric(matrix):
    return (matrix + matrix.T) / 2


def predict(state, config):
    """
    Propagate the estimate and its covariance one step.

    Parameters
    ----------
    state : :class:`geonav.FusionState`
    config : :class:`geonav.FusionConfig`

    Returns
    -------
    prior : :class:`geonav.FusionState`
    """
    f_mat = config.f_mat
    return FusionState(
        x_hat=f_mat @ state.x_hat,
        p=_symmetric(f_mat @ state.p @ f_mat.T + config.q_c),
    )


def innovation(z_m, z_c):
    """
    Difference between the INS position and the geomagnetic position.

    Parameters
    ----------
    z_m : :class:`geonav.GeoPosition`
        The position measured by the INS.
    z_c : :class:`geonav.GeoPosition`
        The position calculated by geomagnetic navigation.

    Returns
    -------
    dz : 1d-array
        Longitude and latitude differences [degrees]. The longitude difference
        is wrapped into (-180, 180].

    Examples
    --------

    >>> dz = innovation(GeoPosition(179.9, 0), GeoPosition(-179.9, 0))
    >>> print(np.round(dz, 6))
    [0.2 0. ]

    """
    return np.array([longitude_difference(z_m.lon, z_c.lon), z_m.lat - z_c.lat])


def update(state, config, dz, joseph=True):
    """
    Correct the prior estimate with an innovation.

    Parameters
    ----------
    state : :class:`geonav.FusionState`
        The prior (output of :func:`geonav.predict`).
    config : :class:`geonav.FusionConfig`
    dz : 1d-array
        The innovation [degrees].
    joseph : bool
        If True, update the covariance with the Joseph form
        :math:`(I - KH) P (I - KH)^T + K R K^T`. If False, use
        :math:`(I - KH) P`. Both agree for the optimal gain.

    Returns
    -------
    posterior : :class:`geonav.FusionState`
    correction : tuple
        The estimated longitude and latitude errors [degrees].

    Examples
    --------

    >>> config = FusionConfig()
    >>> posterior, correction = update(
    ...     init_fusion_state(config), config, [0.3, 0.3]
    ... )
    >>> print("{:.4f} {:.4f}".format(*correction))
    0.1000 0.1000

    """
    dz = np.asarray(dz, dtype="float64").reshape(2)
    h_b = config.h_b
    p_prior = state.p
    s_mat = h_b @ p_prior @ h_b.T + config.r_c
    try:
        gain = np.linalg.solve(s_mat, h_b @ p_prior).T
    except np.linalg.LinAlgError:
        raise ValueError("Singular innovation covariance {}.".format(s_mat))
    x_hat = state.x_hat + gain @ (dz - h_b @ state.x_hat)
    reduction = np.eye(N_STATES) - gain @ h_b
    if joseph:
        p_post = _symmetric(
            reduction @ p_prior @ reduction.T + gain @ config.r_c @ gain.T
        )
    else:
        p_post = reduction @ p_prior
    correction = (float(x_hat[POSITION_SLOTS[0]]), float(x_hat[POSITION_SLOTS[1]]))
    return FusionState(x_hat=x_hat, p=p_post), correction


def reset_position(state):
    """
    Zero the position errors of the estimate once they have been applied.

    The covariance is kept.
    """
    x_hat = state.x_hat.copy()
    x_hat[list(POSITION_SLOTS)] = 0
    return FusionState(x_hat=x_hat, p=state.p)


def apply_correction(pos, correction):
    """
    Add the estimated position error to the geomagnetic position.

    Examples
    --------

    >>> pos = apply_correction(GeoPosition(152.0, 33.0), (0.1, -0.05))
    >>> print("{:.2f} {:.2f}".format(pos.lon, pos.lat))
    152.10 32.95

    """
    d_lon, d_lat = correction
    lat = float(np.clip(pos.lat + d_lat, -90, 90))
    return GeoPosition(lon=pos.lon + d_lon, lat=lat, alt=pos.alt)
