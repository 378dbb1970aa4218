"""
Position output of an inertial navigation system with accumulating errors.

Only the position error is simulated: a fixed initial offset, a linear drift
caused by the velocity error and a random walk. The attitude, velocity and
gyro drift components of the error state are carried so that the state has
the layout expected by the fusion filter.
"""
import attr
import numpy as np

from .constants import EARTH_RADIUS, SECONDS_PER_HOUR
from .geofield import GeoPosition

#: Order of the components of the INS error state
ERROR_STATE_FIELDS = (
    "alpha",
    "beta",
    "gamma",
    "d_lon",
    "d_lat",
    "d_h",
    "d_vx",
    "d_vy",
    "d_vz",
    "eps_cx",
    "eps_cy",
    "eps_cz",
    "eps_rx",
    "eps_ry",
    "eps_rz",
)


def _non_negative(instance, attribute, value):
    "Check that a magnitude (or all values of a tuple) is non-negative"
    if np.any(np.asarray(value) < 0):
        raise ValueError(
            "Invalid {} {}. Must be non-negative.".format(attribute.name, value)
        )


def _triple(value):
    return tuple(float(i) for i in np.broadcast_to(value, 3))


@attr.s(frozen=True)
class InsConfig:
    """
    Error settings of the simulated inertial navigation system.

    The defaults are the values of a typical low-grade inertial unit.

    Parameters
    ----------
    east_error, north_error : float
        Initial position errors [m].
    speed_error : float
        Velocity error that makes the position drift [m/s].
    misalignment : tuple
        Initial attitude errors (two horizontal and heading) [arcmin].
    random_walk : float
        Intensity of the position random walk [m/sqrt(h)].
    constant_drift : tuple
        Constant gyro drifts [degrees/h].
    random_drift : tuple
        Standard deviation of the random gyro drifts [degrees/h].
    seed : int
        Seed of the INS noise. The navigator mixes it with the run seed.
    """

    east_error = attr.ib(default=5000.0, converter=float, validator=_non_negative)
    north_error = attr.ib(default=5000.0, converter=float, validator=_non_negative)
    speed_error = attr.ib(default=10.0, converter=float, validator=_non_negative)
    misalignment = attr.ib(
        default=(50.0, 50.0, 500.0), converter=_triple, validator=_non_negative
    )
    random_walk = attr.ib(default=50.0, converter=float, validator=_non_negative)
    constant_drift = attr.ib(default=(0.0, 0.0, 0.0), converter=_triple)
    random_drift = attr.ib(
        default=(0.0, 0.0, 0.0), converter=_triple, validator=_non_negative
    )
    seed = attr.ib(default=0, converter=int)

    @classmethod
    def error_free(cls):
        "A configuration without any error"
        return cls(
            east_error=0,
            north_error=0,
            speed_error=0,
            misalignment=0,
            random_walk=0,
        )


@attr.s(frozen=True)
class InsErrorState:
    """
    The 15 components of the INS error state.

    Attitude errors ``alpha``, ``beta`` and ``gamma`` are in radians, the
    position errors ``d_lon`` and ``d_lat`` in degrees and ``d_h`` in meters,
    the velocity errors in m/s and the gyro drifts in degrees/h.
    """

    alpha = attr.ib(default=0.0, converter=float)
    beta = attr.ib(default=0.0, converter=float)
    gamma = attr.ib(default=0.0, converter=float)
    d_lon = attr.ib(default=0.0, converter=float)
    d_lat = attr.ib(default=0.0, converter=float)
    d_h = attr.ib(default=0.0, converter=float)
    d_vx = attr.ib(default=0.0, converter=float)
    d_vy = attr.ib(default=0.0, converter=float)
    d_vz = attr.ib(default=0.0, converter=float)
    eps_cx = attr.ib(default=0.0, converter=float)
    eps_cy = attr.ib(default=0.0, converter=float)
    eps_cz = attr.ib(default=0.0, converter=float)
    eps_rx = attr.ib(default=0.0, converter=float)
    eps_ry = attr.ib(default=0.0, converter=float)
    eps_rz = attr.ib(default=0.0, converter=float)

    def __attrs_post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError("Non-finite INS error state {}.".format(self.as_array()))

    def as_array(self):
        "The state as a 15-vector in the order of ERROR_STATE_FIELDS"
        return np.array([getattr(self, name) for name in ERROR_STATE_FIELDS])

    @classmethod
    def from_array(cls, array):
        "Build the state from a 15-vector"
        array = np.asarray(array, dtype="float64")
        if array.shape != (len(ERROR_STATE_FIELDS),):
            raise ValueError("Invalid INS error state shape {}.".format(array.shape))
        return cls(*array)


def meters_to_degrees(east, north, latitude, radius=EARTH_RADIUS):
    """
    Convert a local-plane offset in meters to longitude and latitude offsets.

    Examples
    --------

    >>> d_lon, d_lat = meters_to_degrees(0, 1000 * 111.19492664455873, 0)
    >>> print("{:.6f} {:.6f}".format(d_lon, d_lat))
    0.000000 1.000000

    """
    radius_m = radius * 1000
    d_lat = np.degrees(north / radius_m)
    d_lon = np.degrees(east / (radius_m * np.cos(np.radians(latitude))))
    return float(d_lon), float(d_lat)


def init_ins_state(config, pos):
    """
    Initial error state of the INS at a position.

    Parameters
    ----------
    config : :class:`geonav.InsConfig`
    pos : :class:`geonav.GeoPosition`
        The true starting position. Sets the meters to degrees conversion.

    Returns
    -------
    state : :class:`geonav.InsErrorState`
    """
    d_lon, d_lat = meters_to_degrees(config.east_error, config.north_error, pos.lat)
    alpha, beta, gamma = np.radians(np.asarray(config.misalignment) / 60)
    return InsErrorState(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        d_lon=d_lon,
        d_lat=d_lat,
        d_vx=config.speed_error,
        d_vy=config.speed_error,
        eps_cx=config.constant_drift[0],
        eps_cy=config.constant_drift[1],
        eps_cz=config.constant_drift[2],
    )


def ins_position(state, true_pos):
    "The position output by the INS: the true position shifted by the error"
    lat = float(np.clip(true_pos.lat + state.d_lat, -90, 90))
    return GeoPosition(lon=true_pos.lon + state.d_lon, lat=lat, alt=true_pos.alt)


def drift_direction(velocity=None):
    """
    Unit vector (east, north) along which the velocity error moves the INS.

    The drift is perpendicular to the velocity (to its left). Without a
    velocity, or for a zero velocity, the drift points east.
    """
    if velocity is None:
        return np.array([1.0, 0.0])
    vx, vy = velocity
    speed = np.hypot(vx, vy)
    if speed == 0:
        return np.array([1.0, 0.0])
    return np.array([-vy, vx]) / speed


def step_ins(state, true_pos, dt, rng, config=None, velocity=None):
    """
    Advance the INS error over one step and return the measured position.

    The position error grows by ``speed_error * dt`` along the drift
    direction plus a random walk with standard deviation
    ``random_walk * sqrt(dt)`` per axis. The growth is computed in meters and
    converted to degrees at the true latitude. Constant drifts and the
    attitude and velocity errors are held and the random drifts are drawn
    again.

    Parameters
    ----------
    state : :class:`geonav.InsErrorState`
    true_pos : :class:`geonav.GeoPosition`
        The true position at the end of the step.
    dt : float
        Duration of the step [h].
    rng : :class:`numpy.random.Generator`
    config : :class:`geonav.InsConfig` or None
        The error settings. Defaults to ``InsConfig()``.
    velocity : tuple or None
        True (east, north) velocity used for the drift direction.

    Returns
    -------
    state : :class:`geonav.InsErrorState`
        The updated error state.
    measured : :class:`geonav.GeoPosition`
        The position output by the INS.
    """
    if dt <= 0:
        raise ValueError("Invalid time step {}. Must be positive.".format(dt))
    if config is None:
        config = InsConfig()
    drift = config.speed_error * dt * SECONDS_PER_HOUR * drift_direction(velocity)
    walk = rng.normal(0, 1, size=2) * config.random_walk * np.sqrt(dt)
    random_drift = rng.normal(0, 1, size=3) * np.asarray(config.random_drift)
    east, north = drift + walk
    d_lon, d_lat = meters_to_degrees(east, north, true_pos.lat)
    state = attr.evolve(
        state,
        d_lon=state.d_lon + d_lon,
        d_lat=state.d_lat + d_lat,
        eps_rx=random_drift[0],
        eps_ry=random_drift[1],
        eps_rz=random_drift[2],
    )
    return state, ins_position(state, true_pos)
