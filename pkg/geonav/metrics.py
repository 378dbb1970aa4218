"""
Accuracy and path-quality metrics of navigation runs and Monte Carlo ensembles.

Trajectories are :class:`pandas.DataFrame` objects with ``lon_deg`` and
``lat_deg`` columns (the output of :func:`geonav.run_navigation` or
:func:`geonav.reference_path`).
"""
import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor

import attr
import numpy as np
import pandas as pd

from .coordinates import (
    great_circle_distance,
    great_circle_points,
    path_length,
    resample_path,
)
from .geofield import GeoPosition
from .navigator import NavigationError, run_navigation

LOGGER = logging.getLogger(__name__)

#: Default distance within which a trajectory point matches the reference [km]
MATCH_TOL = 0.3

#: Names of the per-run metrics that are summarized over an ensemble
SUMMARY_METRICS = [
    "iterations",
    "trajectory_length",
    "step_variability",
    "mean_deviation",
    "max_deviation",
    "pmr",
    "terminal_distance",
]

#: Columns of the replay comparison table
REPLAY_COLUMNS = [
    "source",
    "length_km",
    "terminal_error_km",
    "dev_mean_km",
    "dev_max_km",
]


def _coordinates(traj):
    return (
        np.asarray(traj["lon_deg"], dtype="float64"),
        np.asarray(traj["lat_deg"], dtype="float64"),
    )


def _step_lengths(traj):
    longitude, latitude = _coordinates(traj)
    if longitude.size < 2:
        raise ValueError(
            "Need a trajectory with at least 2 points, got {}.".format(longitude.size)
        )
    return great_circle_distance(
        longitude[:-1], latitude[:-1], longitude[1:], latitude[1:]
    )


def cep(endpoints, dest, kind="literal"):
    r"""
    Circular error probable of a set of end points.

    With ``kind="literal"`` this is the root mean square of the distances
    that don't exceed their median:

    .. math::

        \text{CEP} = \sqrt{\frac{1}{N} \sum_i d_i^2 \, [d_i \le d_{50}]}

    where :math:`d_{50}` is the lower median of the distances. Note that the
    sum is divided by the number of all end points. With ``kind="median"``
    the median distance (the usual 50% radius) is returned.

    Parameters
    ----------
    endpoints : list of :class:`geonav.GeoPosition`
    dest : :class:`geonav.GeoPosition`
    kind : str
        ``"literal"`` or ``"median"``.

    Returns
    -------
    cep : float
        [km]

    Examples
    --------

    >>> from geonav import GeoPosition
    >>> print(cep([GeoPosition(0, 0)], GeoPosition(0, 0)))
    0.0

    """
    if len(endpoints) == 0:
        raise ValueError("Can't compute the CEP of an empty list of end points.")
    distances = great_circle_distance(
        np.array([i.lon for i in endpoints]),
        np.array([i.lat for i in endpoints]),
        dest.lon,
        dest.lat,
    )
    distances = np.atleast_1d(distances)
    if kind == "median":
        return float(np.median(distances))
    if kind != "literal":
        raise ValueError("Unknown CEP kind '{}'.".format(kind))
    lower_median = np.sort(distances)[(distances.size - 1) // 2]
    inside = distances <= lower_median
    return float(np.sqrt(np.sum(distances[inside] ** 2) / distances.size))


def _aligned_distances(traj, ref):
    "Distances between the trajectory points and the resampled reference"
    longitude, latitude = _coordinates(traj)
    ref_lon, ref_lat = _coordinates(ref)
    if longitude.size == 0 or ref_lon.size == 0:
        raise ValueError("Can't compare empty trajectories.")
    if longitude.size == 1:
        ref_lon, ref_lat = ref_lon[:1], ref_lat[:1]
    else:
        ref_lon, ref_lat = resample_path(ref_lon, ref_lat, longitude.size)
    if ref_lon.size != longitude.size:
        raise RuntimeError(
            "Resampled reference has {} points instead of {}.".format(
                ref_lon.size, longitude.size
            )
        )
    return np.atleast_1d(great_circle_distance(longitude, latitude, ref_lon, ref_lat))


def path_deviations(traj, ref):
    """
    Mean and largest distance between a trajectory and a reference path.

    The reference is resampled by arc length to the number of points of the
    trajectory and the points are compared index by index.

    Returns
    -------
    mean, max : float
        [km]
    """
    distances = _aligned_distances(traj, ref)
    return float(np.mean(distances)), float(np.max(distances))


def pmr(traj, ref, match_tol=MATCH_TOL):
    """
    Path matching rate: percentage of trajectory points within ``match_tol``
    [km] of their index-aligned reference point.
    """
    if match_tol <= 0:
        raise ValueError("Invalid match tolerance {}.".format(match_tol))
    distances = _aligned_distances(traj, ref)
    return float(100 * np.count_nonzero(distances <= match_tol) / distances.size)


def variability(traj):
    """
    Sample variance of the step lengths of a trajectory [km squared].

    Examples
    --------

    >>> import pandas as pd
    >>> from geonav.coordinates import step_position
    >>> lon1, lat1 = step_position(0, 0, east=1, north=0)
    >>> lon2, lat2 = step_position(lon1, lat1, east=3, north=0)
    >>> traj = pd.DataFrame({"lon_deg": [0, lon1, lon2], "lat_deg": [0, 0, 0]})
    >>> print("{:.6f}".format(variability(traj)))
    2.000000

    """
    steps = _step_lengths(traj)
    if steps.size < 2:
        return 0.0
    return float(np.var(steps, ddof=1))


def trajectory_length(traj):
    "Sum of the great-circle lengths of the steps of a trajectory [km]"
    return path_length(*_coordinates(traj))


def snr(traj):
    """
    Signal-to-noise ratio of the measured declination and inclination [dB].

    The signal is the variation of the main-field D and I along the path
    (columns ``d_clean_deg`` and ``i_clean_deg``) and the noise is the
    difference between the measured and main-field values (storm disturbance
    and sensor noise). Infinite if the measurements are clean.
    """
    clean = traj[["d_clean_deg", "i_clean_deg"]].values
    measured = traj[["d_deg", "i_deg"]].values
    signal = np.sum((clean - clean.mean(axis=0)) ** 2)
    noise = np.sum((measured - clean) ** 2)
    if noise == 0:
        return float("inf")
    if signal == 0:
        return float("-inf")
    return float(10 * np.log10(signal / noise))


@attr.s(frozen=True)
class RunMetrics:
    """
    Metrics of a single navigation run. Distances in km.
    """

    iterations = attr.ib(converter=int)
    trajectory_length = attr.ib(converter=float)
    step_variability = attr.ib(converter=float)
    mean_deviation = attr.ib(converter=float)
    max_deviation = attr.ib(converter=float)
    pmr = attr.ib(converter=float)
    terminal_distance = attr.ib(converter=float)
    terminal_lon = attr.ib(converter=float)
    terminal_lat = attr.ib(converter=float)
    estimate_error = attr.ib(converter=float)
    snr = attr.ib(converter=float)
    terminated = attr.ib(default="reached")
    run_index = attr.ib(default=0, converter=int)


def run_metrics(result, match_tol=MATCH_TOL, run_index=0):
    """
    Compute the metrics of a navigation run.

    The reference path is the great circle from the first point of the
    trajectory to the destination of the run.

    Parameters
    ----------
    result : :class:`geonav.NavigationResult`
    match_tol : float
        Tolerance of the path matching rate [km].
    run_index : int
        Index of the run in an ensemble.

    Returns
    -------
    metrics : :class:`geonav.RunMetrics`
    """
    traj = result.trajectory
    first = traj.iloc[0]
    n_points = max(traj.shape[0], 2)
    ref_lon, ref_lat = great_circle_points(
        first.lon_deg,
        first.lat_deg,
        result.destination.lon,
        result.destination.lat,
        n_points,
    )
    ref = pd.DataFrame({"lon_deg": ref_lon, "lat_deg": ref_lat})
    mean_deviation, max_deviation = path_deviations(traj, ref)
    if traj.shape[0] < 2:
        length, step_variability = 0.0, 0.0
    else:
        length, step_variability = trajectory_length(traj), variability(traj)
    return RunMetrics(
        iterations=result.iterations,
        trajectory_length=length,
        step_variability=step_variability,
        mean_deviation=mean_deviation,
        max_deviation=max_deviation,
        pmr=pmr(traj, ref, match_tol=match_tol),
        terminal_distance=result.terminal_distance,
        terminal_lon=result.terminal.lon,
        terminal_lat=result.terminal.lat,
        estimate_error=result.estimate_error,
        snr=snr(traj),
        terminated=result.terminated,
        run_index=run_index,
    )


@attr.s(frozen=True, eq=False)
class EnsembleReport:
    """
    Aggregated metrics of a Monte Carlo ensemble.

    Parameters
    ----------
    variant : str
        The controller variant.
    runs : list of :class:`geonav.RunMetrics`
        Metrics of the runs that finished, ordered by run index.
    cep : float
        Circular error probable of the end points [km].
    mean_terminal_lon, mean_terminal_lat : float
        Mean end point [degrees].
    summary : :class:`pandas.DataFrame`
        Minimum, quartiles and maximum of each metric in
        :data:`SUMMARY_METRICS`.
    aborted : int
        Number of runs that were aborted and left out.
    best_run : int
        Index of the run with the smallest terminal distance (ties broken by
        the shortest trajectory).
    """

    variant = attr.ib()
    runs = attr.ib()
    cep = attr.ib(converter=float)
    mean_terminal_lon = attr.ib(converter=float)
    mean_terminal_lat = attr.ib(converter=float)
    summary = attr.ib()
    aborted = attr.ib(default=0)
    best_run = attr.ib(default=0)

    @runs.validator
    def _check_runs(self, attribute, value):
        "The report needs at least one run"
        if len(value) == 0:
            raise ValueError("An ensemble report needs at least one run.")

    def to_dataframe(self):
        "The per-run metrics as a data frame"
        return pd.DataFrame([attr.asdict(i) for i in self.runs])


def summarize(runs):
    """
    Minimum, quartiles and maximum of the metrics of several runs.

    Returns
    -------
    summary : :class:`pandas.DataFrame`
        One row per metric with columns ``min``, ``q25``, ``median``, ``q75``
        and ``max``.
    """
    table = pd.DataFrame([attr.asdict(i) for i in runs])[SUMMARY_METRICS]
    quantiles = table.quantile([0, 0.25, 0.5, 0.75, 1]).T
    quantiles.columns = ["min", "q25", "median", "q75", "max"]
    return quantiles


def ensemble_report(variant, runs, destination, aborted=0):
    """
    Aggregate the metrics of the runs of an ensemble.

    Parameters
    ----------
    variant : str
    runs : list of :class:`geonav.RunMetrics`
    destination : :class:`geonav.GeoPosition`
    aborted : int
        Number of aborted runs.

    Returns
    -------
    report : :class:`geonav.EnsembleReport`
    """
    if len(runs) == 0:
        raise ValueError("All runs of variant '{}' were aborted.".format(variant))
    runs = sorted(runs, key=lambda i: i.run_index)
    lon = np.array([i.terminal_lon for i in runs])
    lat = np.array([i.terminal_lat for i in runs])
    endpoints = [GeoPosition(i, j) for i, j in zip(lon, lat)]
    cep_value = cep(endpoints, destination)
    best = min(runs, key=lambda i: (i.terminal_distance, i.trajectory_length))
    return EnsembleReport(
        variant=variant,
        runs=runs,
        cep=cep_value,
        mean_terminal_lon=np.mean(lon),
        mean_terminal_lat=np.mean(lat),
        summary=summarize(runs),
        aborted=aborted,
        best_run=best.run_index,
    )


def _run_one(args):
    """
    Run and score one member of an ensemble.

    Lives at module level so that the process pool can pickle it.
    """
    scenario, variant, run_index, match_tol = args
    try:
        result = run_navigation(scenario, variant=variant, run_index=run_index)
    except NavigationError as error:
        return run_index, None, str(error)
    return run_index, run_metrics(result, match_tol, run_index), None


def default_workers():
    "Number of worker processes: GEONAV_THREADS or the number of CPUs"
    value = os.environ.get("GEONAV_THREADS")
    if value is None:
        return os.cpu_count() or 1
    workers = int(value)
    if workers < 1:
        raise ValueError("Invalid GEONAV_THREADS value '{}'.".format(value))
    return workers


def monte_carlo(
    scenario, variant="fc", n_runs=50, master_seed=0, workers=None, match_tol=MATCH_TOL
):
    """
    Run an ensemble of seeded navigations and aggregate their metrics.

    Run ``i`` uses the scenario with ``seed=master_seed`` and run index ``i``,
    so each run has its own random streams and the report only depends on
    ``master_seed``. Runs that end at the iteration cap are kept. Runs
    aborted because the controller failed are left out with a warning.

    Parameters
    ----------
    scenario : :class:`geonav.Scenario`
    variant : str
    n_runs : int
        Number of runs (at least 1).
    master_seed : int
    workers : int or None
        Number of worker processes. If None, uses :func:`default_workers`.
        With 1 the runs are executed in this process.
    match_tol : float
        Tolerance of the path matching rate [km].

    Returns
    -------
    report : :class:`geonav.EnsembleReport`
    """
    if n_runs < 1:
        raise ValueError("Invalid number of runs {}.".format(n_runs))
    if workers is None:
        workers = default_workers()
    workers = max(1, min(int(workers), n_runs))
    scenario = attr.evolve(scenario, seed=master_seed)
    tasks = [(scenario, variant, i, match_tol) for i in range(n_runs)]
    LOGGER.info(
        "Running %d runs of variant '%s' with %d worker(s)", n_runs, variant, workers
    )
    if workers == 1:
        outcomes = [_run_one(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(_run_one, tasks))
    runs, aborted = [], 0
    for run_index, metrics, error in sorted(outcomes, key=lambda i: i[0]):
        if metrics is None:
            aborted += 1
            LOGGER.debug("Run %d aborted: %s", run_index, error)
        else:
            runs.append(metrics)
    if aborted:
        warnings.warn(
            "{} of {} runs of variant '{}' were aborted and are left out of the "
            "report.".format(aborted, n_runs, variant)
        )
    report = ensemble_report(variant, runs, scenario.destination, aborted=aborted)
    LOGGER.info(
        "Variant '%s': CEP %.4f km over %d runs", variant, report.cep, len(runs)
    )
    return report


def _track_row(source, lon, lat, gps_lon, gps_lat):
    distances = np.atleast_1d(great_circle_distance(lon, lat, gps_lon, gps_lat))
    return {
        "source": source,
        "length_km": path_length(lon, lat),
        "terminal_error_km": distances[-1],
        "dev_mean_km": np.mean(distances),
        "dev_max_km": np.max(distances),
    }


def replay_table(track, results):
    """
    Compare the positions of a replayed track with its GPS positions.

    The GPS row describes the recorded path, the INS row the recorded INS
    positions and each replay result adds a row for the position estimated
    by its variant. Deviations are computed point by point against the GPS
    positions.

    Parameters
    ----------
    track : :class:`pandas.DataFrame`
        The recorded track.
    results : list of :class:`geonav.NavigationResult`
        Outputs of :func:`geonav.replay_navigation` on the track.

    Returns
    -------
    table : :class:`pandas.DataFrame`
        Columns of :data:`REPLAY_COLUMNS`.
    """
    gps_lon = track.gps_lon_deg.values
    gps_lat = track.gps_lat_deg.values
    rows = [
        _track_row("gps", gps_lon, gps_lat, gps_lon, gps_lat),
        _track_row(
            "ins", track.ins_lon_deg.values, track.ins_lat_deg.values, gps_lon, gps_lat
        ),
    ]
    for result in results:
        traj = result.trajectory
        rows.append(
            _track_row(
                result.variant,
                traj.est_lon_deg.values,
                traj.est_lat_deg.values,
                gps_lon,
                gps_lat,
            )
        )
    return pd.DataFrame(rows, columns=REPLAY_COLUMNS)
