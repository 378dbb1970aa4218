"""
Closed-loop geomagnetic navigation with inertial aiding.

A run measures declination and inclination along the way, keeps an estimate
of their spatial gradient, steers with the receding-horizon controller and
dead-reckons its position, correcting it with the INS whenever the gradient
becomes too weak to navigate on.
"""
import logging

import attr
import numpy as np
import pandas as pd

from .constants import SECONDS_PER_HOUR
from .controller import (
    ControllerConfig,
    DiState,
    MpcController,
    check_variant,
    heading_from_velocity,
    predicted_displacement,
)
from .coordinates import (
    great_circle_distance,
    great_circle_points,
    local_displacement,
    longitude_difference,
    path_length,
    step_position,
)
from .fusion import (
    FusionConfig,
    apply_correction,
    init_fusion_state,
    innovation,
    predict,
    reset_position,
    update,
)
from .geofield import (
    CoefficientSet,
    GeoPosition,
    apply_anomaly,
    elements_from_field,
    evaluate_field,
)
from .gradient import DiSample, fit_gradient, update_gradient
from .ins import InsConfig, init_ins_state, ins_position, step_ins
from .qp import ConvergenceError, InfeasibleProblemError
from .storm import TimeMapping, anomaly_at, table_covers

LOGGER = logging.getLogger(__name__)

#: Ways a run can end
TERMINATIONS = ("reached", "converged", "max_iterations", "track_end")

#: Columns of an exported trajectory
TRAJECTORY_COLUMNS = [
    "k",
    "time_h",
    "lon_deg",
    "lat_deg",
    "d_deg",
    "i_deg",
    "vx_kmh",
    "vy_kmh",
    "fused",
    "corr_lon_deg",
    "corr_lat_deg",
]

#: Extra columns kept in memory for the metrics and for replays
EXTRA_COLUMNS = [
    "est_lon_deg",
    "est_lat_deg",
    "ins_lon_deg",
    "ins_lat_deg",
    "d_clean_deg",
    "i_clean_deg",
    "cmd_vx_kmh",
    "cmd_vy_kmh",
]

#: Columns of a recorded track
TRACK_COLUMNS = [
    "time_h",
    "gps_lon_deg",
    "gps_lat_deg",
    "d_deg",
    "i_deg",
    "ins_lon_deg",
    "ins_lat_deg",
]


class NavigationError(RuntimeError):
    """
    A run that had to be aborted. The trajectory up to the failure is kept
    in the ``trajectory`` attribute.
    """

    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


def _position(value):
    if isinstance(value, GeoPosition):
        return value
    return GeoPosition(*value)


def _positive(instance, attribute, value):
    if not value > 0:
        raise ValueError(
            "Invalid {} {}. Must be positive.".format(attribute.name, value)
        )


def _optional_positive(instance, attribute, value):
    if value is not None:
        _positive(instance, attribute, value)


def _non_negative(instance, attribute, value):
    if value < 0:
        raise ValueError(
            "Invalid {} {}. Must be non-negative.".format(attribute.name, value)
        )


@attr.s(frozen=True, eq=False)
class Scenario:
    """
    Everything that defines a navigation mission.

    Parameters
    ----------
    start, destination : :class:`geonav.GeoPosition` or tuple
        Start and destination of the mission.
    field_model : :class:`geonav.CoefficientSet`
        The main field model. Defaults to the tilted dipole.
    date : float
        Decimal year of the mission.
    anomaly : :class:`xarray.Dataset` or None
        Storm disturbance table built by :func:`geonav.build_anomaly_table`.
    time_mapping : :class:`geonav.TimeMapping`
        Maps mission time onto the time of the storm table.
    controller : :class:`geonav.ControllerConfig`
        Controller settings. The variant is set by each run. The default
        command box only allows eastward and northward velocities.
    ins : :class:`geonav.InsConfig`
    fusion : :class:`geonav.FusionConfig`
    epsilon : float
        Distance to the destination at which the mission ends [km].
    sigma : float
        Gradient strength below which the INS correction is applied
        [degrees/km].
    max_iterations : int
        Largest number of steps of a run.
    noise : float
        Standard deviation of the noise on measured D and I [degrees].
    seed : int
        Seed of every random stream of a run.
    cruise_speed : float
        Speed of the vehicle [km/h].
    probe_length : float
        Length of each of the two legs that initialize the gradient [km].
    probe_headings : tuple
        Headings of the two legs, counter-clockwise from east [degrees]. The
        first runs along x (0 or 180) and the second along y (90 or 270).
    gradient_form : str
        ``"secant"`` or ``"literal"`` (see :func:`geonav.update_gradient`).
    gradient_gain : float
        Gain of the secant gradient update.
    converge_steps : int or None
        If given, the run also ends (``"converged"``) once the
        gradient-estimated distance to the destination has stayed below
        ``epsilon`` for this many consecutive steps. None disables it.
    reset_ins : bool
        If True, the INS position is reset to the corrected position after
        each fusion.
    name : str
    metadata : dict
        Free-form information carried along (for example the kinematics of
        an external trajectory generator).
    """

    start = attr.ib(default=(152.0, 33.0), converter=_position)
    destination = attr.ib(default=(158.0, 28.0), converter=_position)
    field_model = attr.ib(default=attr.Factory(CoefficientSet.tilted_dipole))
    date = attr.ib(default=2024.5, converter=float)
    anomaly = attr.ib(default=None)
    time_mapping = attr.ib(default=attr.Factory(TimeMapping))
    controller = attr.ib(default=attr.Factory(ControllerConfig))
    ins = attr.ib(default=attr.Factory(InsConfig))
    fusion = attr.ib(default=attr.Factory(FusionConfig))
    epsilon = attr.ib(default=2.5, converter=float, validator=_positive)
    sigma = attr.ib(default=1e-3, converter=float, validator=_non_negative)
    max_iterations = attr.ib(default=2000, converter=int, validator=_positive)
    noise = attr.ib(default=0.01, converter=float, validator=_non_negative)
    seed = attr.ib(default=0, converter=int, validator=_non_negative)
    cruise_speed = attr.ib(default=50.0, converter=float, validator=_positive)
    probe_length = attr.ib(default=1.0, converter=float, validator=_positive)
    probe_headings = attr.ib(
        default=(0.0, 270.0), converter=lambda value: tuple(float(i) for i in value)
    )
    gradient_form = attr.ib(default="secant")
    gradient_gain = attr.ib(default=0.2, converter=float, validator=_positive)
    converge_steps = attr.ib(
        default=None,
        converter=attr.converters.optional(int),
        validator=_optional_positive,
    )
    reset_ins = attr.ib(default=False, converter=bool)
    name = attr.ib(default="")
    metadata = attr.ib(default=attr.Factory(dict))

    def __attrs_post_init__(self):
        if self.distance_to_go(self.start) == 0:
            raise ValueError("The start and the destination must be different.")
        first, second = (np.mod(i, 360) for i in self.probe_headings)
        if first not in (0, 180) or second not in (90, 270):
            raise ValueError(
                "Invalid probe headings {}. The first leg must run along x (0 or 180)"
                " and the second along y (90 or 270).".format(self.probe_headings)
            )
        if self.gradient_form not in ("secant", "literal"):
            raise ValueError(
                "Unknown gradient update form '{}'.".format(self.gradient_form)
            )

    def distance_to_go(self, pos):
        "Great-circle distance from a position to the destination [km]"
        return great_circle_distance(
            pos.lon, pos.lat, self.destination.lon, self.destination.lat
        )


@attr.s(frozen=True, eq=False)
class NavigationResult:
    """
    Outcome of a navigation run.

    Parameters
    ----------
    trajectory : :class:`pandas.DataFrame`
        One row per step with the columns of :data:`TRAJECTORY_COLUMNS` and
        :data:`EXTRA_COLUMNS`.
    terminated : str
        One of :data:`TERMINATIONS`.
    destination : :class:`geonav.GeoPosition`
    variant : str
        The controller variant.
    frozen_updates : int
        Number of steps too short to update the gradient.
    """

    trajectory = attr.ib()
    terminated = attr.ib()
    destination = attr.ib()
    variant = attr.ib(default="fc")
    frozen_updates = attr.ib(default=0)

    @terminated.validator
    def _check_terminated(self, attribute, value):
        "Only the known termination states"
        if value not in TERMINATIONS:
            raise ValueError("Unknown termination state '{}'.".format(value))

    @property
    def iterations(self):
        "Index of the last step"
        return int(self.trajectory.k.iloc[-1])

    @property
    def terminal(self):
        "The final true position"
        last = self.trajectory.iloc[-1]
        return GeoPosition(last.lon_deg, last.lat_deg)

    @property
    def terminal_estimate(self):
        "The final position estimated by the navigator"
        last = self.trajectory.iloc[-1]
        return GeoPosition(last.est_lon_deg, last.est_lat_deg)

    @property
    def terminal_distance(self):
        "Distance from the final true position to the destination [km]"
        return great_circle_distance(
            self.terminal.lon,
            self.terminal.lat,
            self.destination.lon,
            self.destination.lat,
        )

    @property
    def estimate_error(self):
        "Distance between the final estimated and true positions [km]"
        return great_circle_distance(
            self.terminal.lon,
            self.terminal.lat,
            self.terminal_estimate.lon,
            self.terminal_estimate.lat,
        )

    @property
    def trajectory_length(self):
        "Length of the true path [km]"
        if self.trajectory.shape[0] < 2:
            return 0.0
        return path_length(self.trajectory.lon_deg, self.trajectory.lat_deg)


def _frame(rows):
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS + EXTRA_COLUMNS)


def reference_path(scenario, n_points):
    """
    The great circle from the start to the destination of a scenario.

    Parameters
    ----------
    scenario : :class:`geonav.Scenario`
    n_points : int
        Number of points, end points included (at least 2).

    Returns
    -------
    path : :class:`pandas.DataFrame`
        Columns ``k``, ``lon_deg`` and ``lat_deg``.
    """
    lon, lat = great_circle_points(
        scenario.start.lon,
        scenario.start.lat,
        scenario.destination.lon,
        scenario.destination.lat,
        n_points,
    )
    return pd.DataFrame({"k": np.arange(n_points), "lon_deg": lon, "lat_deg": lat})


def _wrapped_change(s_now, s_prev):
    "Change of D and I between two measurements with D wrapped"
    return longitude_difference(s_now.d, s_prev.d), s_now.i - s_prev.i


class _Navigation:
    """
    Mutable state of a single run: positions, filters, gradient and rows.
    """

    def __init__(self, scenario, variant, run_index=0, target=None):
        self.scenario = scenario
        self.variant = variant
        self.rng = np.random.default_rng([scenario.seed, run_index])
        self.ins_rng = np.random.default_rng(
            [scenario.ins.seed, scenario.seed, run_index]
        )
        self.position = scenario.start
        self.estimate = scenario.start
        self.time = 0.0
        self.ins_state = init_ins_state(scenario.ins, scenario.start)
        self.ins_measured = ins_position(self.ins_state, self.position)
        self.fusion_state = init_fusion_state(scenario.fusion)
        self.frozen = 0
        self.rows = []
        if target is None:
            elements = elements_from_field(
                evaluate_field(
                    scenario.field_model, scenario.destination, scenario.date
                )
            )
            target = DiState(elements.d, elements.i)
        self.target = target

    def measure(self):
        "Measured and clean D and I at the current true position"
        scenario = self.scenario
        field = evaluate_field(scenario.field_model, self.position, scenario.date)
        clean = elements_from_field(field)
        if scenario.anomaly is not None and table_covers(
            scenario.anomaly, self.position
        ):
            sample = anomaly_at(
                scenario.anomaly,
                self.position,
                self.time * SECONDS_PER_HOUR,
                mapping=scenario.time_mapping,
            )
            field = apply_anomaly(field, sample)
        disturbed = elements_from_field(field)
        noise = self.rng.normal(0, scenario.noise, size=2)
        measured = DiState(disturbed.d + noise[0], disturbed.i + noise[1])
        return measured, DiState(clean.d, clean.i)

    def record(self, k, s, clean, velocity, fused, correction, command=(0, 0)):
        self.rows.append(
            [
                k,
                self.time,
                self.position.lon,
                self.position.lat,
                s.d,
                s.i,
                velocity[0],
                velocity[1],
                fused,
                correction[0],
                correction[1],
                self.estimate.lon,
                self.estimate.lat,
                self.ins_measured.lon,
                self.ins_measured.lat,
                clean.d,
                clean.i,
                command[0],
                command[1],
            ]
        )

    def move(self, velocity, duration):
        "Move the vehicle and the dead-reckoned estimate, then step the INS"
        east, north = velocity[0] * duration, velocity[1] * duration
        self.position = GeoPosition(
            *step_position(self.position.lon, self.position.lat, east, north)
        )
        self.estimate = GeoPosition(
            *step_position(self.estimate.lon, self.estimate.lat, east, north)
        )
        self.time += duration
        self.ins_state, self.ins_measured = step_ins(
            self.ins_state,
            self.position,
            duration,
            self.ins_rng,
            config=self.scenario.ins,
            velocity=velocity,
        )

    def fuse(self, gradient):
        """
        Correct the estimate with the INS if the gradient is too weak.

        Returns the fused flag and the correction [degrees].
        """
        scenario = self.scenario
        if scenario.fusion.gradient_strength(gradient) >= scenario.sigma:
            return False, (0.0, 0.0)
        prior = predict(self.fusion_state, scenario.fusion)
        dz = innovation(self.ins_measured, self.estimate)
        posterior, correction = update(prior, scenario.fusion, dz)
        self.estimate = apply_correction(self.estimate, correction)
        self.fusion_state = reset_position(posterior)
        if scenario.reset_ins:
            self.ins_state = attr.evolve(
                self.ins_state,
                d_lon=longitude_difference(self.estimate.lon, self.position.lon),
                d_lat=self.estimate.lat - self.position.lat,
            )
            self.ins_measured = ins_position(self.ins_state, self.position)
        LOGGER.debug(
            "Fusion at t=%.2f h: correction (%.6f, %.6f) degrees",
            self.time,
            *correction,
        )
        return True, correction

    def update_gradient(self, gradient, s_now, s_prev, velocity, duration):
        d_d, d_i = _wrapped_change(s_now, s_prev)
        theta = 0.0
        if np.any(velocity):
            theta = heading_from_velocity(*velocity)[1]
        gradient, frozen = update_gradient(
            gradient,
            d_d,
            d_i,
            theta,
            velocity[0],
            velocity[1],
            duration,
            form=self.scenario.gradient_form,
            gain=self.scenario.gradient_gain,
        )
        self.frozen += int(frozen)
        return gradient

    def probe_velocity(self, heading):
        "Velocity of a probe leg at the cruise speed"
        theta = np.radians(heading)
        velocity = self.scenario.cruise_speed * np.array([np.cos(theta), np.sin(theta)])
        return np.round(velocity, 12)

    def heading_control(self, command, gradient, s):
        """
        Executed velocity: the cruise speed along the heading of the command,
        shortened on the final approach.
        """
        config = self.scenario.controller
        command = command.as_array()
        if not np.any(command):
            return np.zeros(2)
        theta = np.radians(heading_from_velocity(*command)[1])
        direction = np.array([np.cos(theta), np.sin(theta)])
        velocity = np.clip(
            self.scenario.cruise_speed * direction, config.u_min, config.u_max
        )
        speed = np.hypot(*velocity)
        if speed == 0:
            return np.zeros(2)
        full_step = speed * config.period
        remaining = predicted_displacement(gradient, s, self.target)
        if remaining is None:
            return velocity
        along = remaining @ velocity / speed
        if along <= 0:
            along = np.linalg.norm(remaining)
        return velocity * min(full_step, along) / full_step

    def result(self, terminated):
        return NavigationResult(
            trajectory=_frame(self.rows),
            terminated=terminated,
            destination=self.scenario.destination,
            variant=self.variant,
            frozen_updates=self.frozen,
        )


def run_navigation(scenario, variant="fc", run_index=0):
    """
    Navigate from the start to the destination of a scenario.

    The run first moves along two short probe legs to estimate the gradient
    of declination and inclination. Then, at every step, it measures D and I
    at the true position (main field, storm disturbance and noise), updates
    the gradient, asks the controller for a velocity command and moves at the
    cruise speed along the heading of the command for one controller period.
    The dead-reckoned estimate moves by the same displacement and is
    corrected with the INS position whenever the gradient strength falls
    below ``scenario.sigma``.

    The run ends when the true position is within ``scenario.epsilon`` of
    the destination (``"reached"``), when the gradient-estimated distance to
    the destination stays below ``epsilon`` for ``scenario.converge_steps``
    steps (``"converged"``, only when ``converge_steps`` is set), or after
    ``scenario.max_iterations`` steps. The probe legs are flown at the cruise
    speed whatever the command box.

    Parameters
    ----------
    scenario : :class:`geonav.Scenario`
    variant : str
        Controller variant: ``"lti"``, ``"ltv"`` or ``"fc"``.
    run_index : int
        Index of the run in an ensemble. Combined with ``scenario.seed`` to
        seed the random streams.

    Returns
    -------
    result : :class:`geonav.NavigationResult`
    """
    check_variant(variant)
    nav = _Navigation(scenario, variant, run_index)
    s, clean = nav.measure()
    if scenario.distance_to_go(nav.position) <= scenario.epsilon:
        nav.record(0, s, clean, (0, 0), False, (0, 0))
        return nav.result("reached")
    samples = [DiSample(s.d, s.i, 0, 0)]
    k = 0
    for heading in scenario.probe_headings:
        velocity = nav.probe_velocity(heading)
        duration = scenario.probe_length / np.hypot(*velocity)
        nav.record(k, s, clean, velocity, False, (0, 0))
        nav.move(velocity, duration)
        s, clean = nav.measure()
        x, y = local_displacement(
            scenario.start.lon, scenario.start.lat, nav.position.lon, nav.position.lat
        )
        samples.append(DiSample(s.d, s.i, x, y))
        k += 1
    gradient = fit_gradient(*samples)
    controller = MpcController(
        attr.evolve(scenario.controller, variant=variant), gradient
    )
    LOGGER.debug("Initial gradient %s", gradient.as_array().tolist())
    fused, correction = False, (0.0, 0.0)
    last_step = None
    near = 0
    while True:
        if last_step is not None:
            gradient = nav.update_gradient(gradient, s, s_prev, *last_step)
        if scenario.distance_to_go(nav.position) <= scenario.epsilon:
            terminated = "reached"
        else:
            remaining = predicted_displacement(gradient, s, nav.target)
            if remaining is not None and np.linalg.norm(remaining) <= scenario.epsilon:
                near += 1
            else:
                near = 0
            terminated = None
            if (
                scenario.converge_steps is not None
                and near >= scenario.converge_steps
            ):
                terminated = "converged"
            elif k >= scenario.max_iterations:
                terminated = "max_iterations"
        if terminated is not None:
            nav.record(k, s, clean, (0, 0), fused, correction)
            break
        try:
            command = controller.step(s, nav.target, gradient)
        except (InfeasibleProblemError, ConvergenceError) as error:
            nav.record(k, s, clean, (0, 0), fused, correction)
            raise NavigationError(
                "Run {} of variant '{}' aborted at step {}: {}".format(
                    run_index, variant, k, error
                ),
                _frame(nav.rows),
            )
        velocity = nav.heading_control(command, gradient, s)
        controller.executed(velocity)
        nav.record(
            k, s, clean, velocity, fused, correction, command=command.as_array()
        )
        nav.move(velocity, scenario.controller.period)
        fused, correction = nav.fuse(gradient)
        s_prev = s
        s, clean = nav.measure()
        last_step = (velocity, scenario.controller.period)
        k += 1
    result = nav.result(terminated)
    LOGGER.info(
        "Run %d (%s) %s after %d steps, %.2f km from the destination",
        run_index,
        variant,
        terminated,
        result.iterations,
        result.terminal_distance,
    )
    return result


def track_from_result(result):
    """
    A recorded track (:data:`TRACK_COLUMNS`) made from a simulated run.

    The true positions play the role of the GPS positions.
    """
    trajectory = result.trajectory
    return pd.DataFrame(
        {
            "time_h": trajectory.time_h.values,
            "gps_lon_deg": trajectory.lon_deg.values,
            "gps_lat_deg": trajectory.lat_deg.values,
            "d_deg": trajectory.d_deg.values,
            "i_deg": trajectory.i_deg.values,
            "ins_lon_deg": trajectory.ins_lon_deg.values,
            "ins_lat_deg": trajectory.ins_lat_deg.values,
        },
        columns=TRACK_COLUMNS,
    )


def replay_navigation(track, scenario, variant="fc", clean_field=False):
    """
    Run the navigation filters on a recorded track.

    The vehicle follows the recorded GPS positions. The recorded D and I
    replace the field model and the recorded INS positions replace the
    simulated INS. The gradient is estimated from the first three samples
    and updated along the track, the controller computes its commands (kept
    in the ``cmd_vx_kmh`` and ``cmd_vy_kmh`` columns) and the dead-reckoned
    estimate is fused with the INS as in :func:`geonav.run_navigation`.

    The destination of the result is the last GPS position, so the
    ``estimate_error`` of the result is the distance between the final
    estimate and the recorded end point.

    With ``clean_field``, the ``clean_d_deg`` and ``clean_i_deg`` columns hold
    the elements of ``scenario.field_model`` at the GPS positions, so the
    difference with the recorded D and I shows the disturbance along the
    track. Otherwise they repeat the recorded values.

    Parameters
    ----------
    track : :class:`pandas.DataFrame`
        Recorded track with the columns of :data:`TRACK_COLUMNS`.
    scenario : :class:`geonav.Scenario`
        Provides the controller, fusion and threshold settings. Its start
        and destination are ignored.
    variant : str
    clean_field : bool
        Evaluate the field model at the GPS positions for the clean columns.

    Returns
    -------
    result : :class:`geonav.NavigationResult`
    """
    check_variant(variant)
    if track.shape[0] < 3:
        raise ValueError(
            "Insufficient samples for the gradient stencil: the track has {} rows "
            "and needs at least 3.".format(track.shape[0])
        )
    gps = [GeoPosition(*i) for i in zip(track.gps_lon_deg, track.gps_lat_deg)]
    ins = [GeoPosition(*i) for i in zip(track.ins_lon_deg, track.ins_lat_deg)]
    measured = [DiState(d, i) for d, i in zip(track.d_deg, track.i_deg)]
    times = track.time_h.values.astype("float64")
    scenario = attr.evolve(
        scenario, start=gps[0], destination=gps[-1], reset_ins=False
    )
    nav = _Navigation(scenario, variant, target=measured[-1])
    nav.ins_measured = ins[0]
    nav.time = times[0]
    samples = []
    for index in range(3):
        x, y = local_displacement(
            gps[0].lon, gps[0].lat, gps[index].lon, gps[index].lat
        )
        samples.append(DiSample(measured[index].d, measured[index].i, x, y))
    gradient = fit_gradient(*samples)
    controller = MpcController(
        attr.evolve(scenario.controller, variant=variant), gradient
    )
    fused, correction = False, (0.0, 0.0)
    for index, s in enumerate(measured):
        velocity = np.zeros(2)
        if index >= 3:
            gradient = nav.update_gradient(
                gradient, s, measured[index - 1], *last_step
            )
        command = np.zeros(2)
        if index >= 2 and index < len(measured) - 1:
            command = controller.step(s, nav.target, gradient).as_array()
        if index < len(measured) - 1:
            duration = times[index + 1] - times[index]
            if duration <= 0:
                raise ValueError(
                    "Track times must increase. Found {} after {} in row {}.".format(
                        times[index + 1], times[index], index + 1
                    )
                )
            east, north = local_displacement(
                gps[index].lon, gps[index].lat, gps[index + 1].lon, gps[index + 1].lat
            )
            velocity = np.array([east, north]) / duration
            if index >= 2:
                controller.executed(velocity)
        clean = s
        if clean_field:
            elements = elements_from_field(
                evaluate_field(scenario.field_model, gps[index], scenario.date)
            )
            clean = DiState(elements.d, elements.i)
        nav.record(index, s, clean, velocity, fused, correction, command=command)
        if index == len(measured) - 1:
            break
        # The vehicle follows the record
        nav.estimate = GeoPosition(
            *step_position(
                nav.estimate.lon,
                nav.estimate.lat,
                velocity[0] * duration,
                velocity[1] * duration,
            )
        )
        nav.position = gps[index + 1]
        nav.ins_measured = ins[index + 1]
        nav.time = times[index + 1]
        fused, correction = False, (0.0, 0.0)
        if index + 1 >= 3:
            fused, correction = nav.fuse(gradient)
        last_step = (velocity, duration)
    result = nav.result("track_end")
    LOGGER.info(
        "Replayed %d samples (%s): final estimate %.2f km from the recorded end",
        len(measured),
        variant,
        result.estimate_error,
    )
    return result
