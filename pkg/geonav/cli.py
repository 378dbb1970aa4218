"""
Command line interface: run navigation ensembles or replay recorded tracks.

Usage::

    geonav run --scenario pacific_clean.json --variants lti,ltv,fc --runs 50
    geonav replay --scenario pacific_clean.json --track track.csv --out results

"""
import argparse
import json
import logging
import os
import sys

import attr
import numpy as np

from .constants import SECONDS_PER_HOUR
from .controller import VARIANTS, ControllerConfig
from .datasets import fetch_wmm2020
from .fusion import N_STATES, POSITION_SLOTS, FusionConfig
from .geofield import CoefficientSet, load_cof
from .ins import InsConfig
from .io import (
    load_track_csv,
    write_comparison_csv,
    write_report_json,
    write_table_csv,
    write_trajectory_csv,
)
from .metrics import (
    MATCH_TOL,
    ensemble_report,
    monte_carlo,
    replay_table,
    run_metrics,
)
from .navigator import Scenario, replay_navigation, run_navigation
from .storm import (
    DEFAULT_REGION,
    TimeMapping,
    build_anomaly_table,
    load_storm_csv,
    synthetic_storm,
)
from .version import full_version

LOGGER = logging.getLogger(__name__)

#: Directory of the scenarios installed with the package
SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "scenarios")

#: Every key a scenario file may have (``metadata`` is free-form)
SCENARIO_KEYS = {
    "name",
    "metadata",
    "start",
    "start.lon",
    "start.lat",
    "destination",
    "destination.lon",
    "destination.lat",
    "date",
    "field",
    "field.source",
    "field.file",
    "field.g10",
    "storm",
    "storm.kind",
    "storm.file",
    "storm.seed",
    "storm.method",
    "storm.region",
    "storm.spacing",
    "storm.time_bin_s",
    "storm.time_mapping",
    "storm.mission_duration_h",
    "controller",
    "controller.horizon",
    "controller.period_h",
    "controller.q_weight",
    "controller.f_weight",
    "controller.r_weight",
    "controller.u_min",
    "controller.u_max",
    "controller.s_min",
    "controller.s_max",
    "controller.literal_linear_cost",
    "ins",
    "ins.east_error_m",
    "ins.north_error_m",
    "ins.speed_error_ms",
    "ins.misalignment_arcmin",
    "ins.random_walk",
    "ins.seed",
    "fusion",
    "fusion.q_position",
    "fusion.r_position",
    "fusion.p0_position",
    "fusion.trigger",
    "epsilon",
    "sigma",
    "max_iterations",
    "noise",
    "seed",
    "cruise_speed",
    "probe_length",
    "probe_headings",
    "gradient_form",
    "gradient_gain",
    "converge_steps",
    "reset_ins",
    "match_tol",
}

#: Sources of the main field model
FIELD_SOURCES = ("wmm2020", "tilted_dipole", "dipole", "coefficients")


def _flatten(config, prefix=""):
    "Dotted names of all the keys of a nested dictionary"
    keys = []
    for key, value in config.items():
        name = prefix + key
        keys.append(name)
        if isinstance(value, dict) and name != "metadata":
            keys.extend(_flatten(value, prefix=name + "."))
    return keys


def _lookup(config, key, default):
    node = config
    for part in key.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def _option(config, key, default, convert=float, check=None):
    """
    Get a value from the scenario with a default and convert it.

    Conversion and check errors are raised as ValueError naming the key.
    """
    raw = _lookup(config, key, default)
    if raw is None:
        return None
    try:
        value = convert(raw)
        if check is not None:
            check(value)
    except (TypeError, ValueError) as error:
        raise ValueError(
            "Invalid value {!r} for scenario key '{}': {}".format(raw, key, error)
        )
    return value


def _latitude(value):
    if not -90 <= value <= 90:
        raise ValueError("latitude must be in [-90, 90]")


def _positive(value):
    if not value > 0:
        raise ValueError("must be positive")


def _non_negative(value):
    if value < 0:
        raise ValueError("must be non-negative")


def _vector(size):
    def convert(value):
        array = np.asarray(value, dtype="float64")
        if array.shape != (size,) or not np.all(np.isfinite(array)):
            raise ValueError("expected {} finite numbers".format(size))
        return array

    return convert


def _matrix(value):
    array = np.asarray(value, dtype="float64")
    if array.shape != (2, 2) or not np.all(np.isfinite(array)):
        raise ValueError("expected a 2x2 matrix")
    return array


def _choice(choices):
    def check(value):
        if value not in choices:
            raise ValueError("must be one of {}".format(", ".join(choices)))

    return check


def _build(key, factory, **kwargs):
    "Call a constructor and name the scenario section in its errors"
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as error:
        raise ValueError("Invalid scenario section '{}': {}".format(key, error))


def _resolve(path, base_dir):
    if path is None or os.path.isabs(path):
        return path
    return os.path.join(base_dir, path)


def _field_model(config, base_dir, coefficients=None):
    "The main field model selected by the scenario or the command line"
    if coefficients is not None:
        return load_cof(coefficients)
    source = _option(
        config, "field.source", "wmm2020", convert=str, check=_choice(FIELD_SOURCES)
    )
    if source == "tilted_dipole":
        return CoefficientSet.tilted_dipole()
    if source == "dipole":
        return CoefficientSet.dipole(g10=_option(config, "field.g10", -29404.8))
    if source == "coefficients":
        fname = _option(config, "field.file", None, convert=str)
        if fname is None:
            raise ValueError(
                "Scenario key 'field.file' is required for the 'coefficients' source."
            )
        return load_cof(_resolve(fname, base_dir))
    return fetch_wmm2020()


def _anomaly_table(config, base_dir, storm=None):
    "The storm disturbance table of the scenario (None if there is no storm)"
    fname = storm
    if fname is None:
        fname = _resolve(_option(config, "storm.file", None, convert=str), base_dir)
    kind = _option(
        config, "storm.kind", None, convert=str, check=_choice(("long", "short"))
    )
    if fname is None and kind is None:
        return None
    region = tuple(
        _option(config, "storm.region", DEFAULT_REGION, convert=_vector(4))
    )
    if fname is not None:
        records = load_storm_csv(fname)
    else:
        seed = _option(config, "storm.seed", 0, convert=int, check=_non_negative)
        records = synthetic_storm(kind=kind, region=region, seed=seed)
    return build_anomaly_table(
        records,
        region=region,
        spacing=_option(config, "storm.spacing", 1.0, check=_positive),
        time_bin=_option(
            config, "storm.time_bin_s", SECONDS_PER_HOUR, check=_positive
        ),
        method=_option(
            config,
            "storm.method",
            "idw",
            convert=str,
            check=_choice(("idw", "kriging")),
        ),
    )


def _position_diagonal(value):
    matrix = np.zeros((N_STATES, N_STATES))
    matrix[POSITION_SLOTS, POSITION_SLOTS] = value
    return matrix


def scenario_from_dict(
    config, base_dir=".", coefficients=None, storm=None, field_model=None
):
    """
    Build a scenario from the contents of a scenario file.

    Absent keys take their default values. Paths in the file are relative to
    ``base_dir``.

    Parameters
    ----------
    config : dict
        The parsed scenario file.
    base_dir : str
        Directory that relative paths are resolved against.
    coefficients : str or None
        Coefficient file that replaces the field source of the scenario.
    storm : str or None
        Storm CSV file that replaces the storm of the scenario.
    field_model : :class:`geonav.CoefficientSet` or None
        A field model that replaces the field source of the scenario.

    Returns
    -------
    scenario : :class:`geonav.Scenario`
    match_tol : float
        Tolerance of the path matching rate [km].
    """
    if not isinstance(config, dict):
        raise ValueError("A scenario must be a JSON object.")
    unknown = [key for key in _flatten(config) if key not in SCENARIO_KEYS]
    unknown = [key for key in unknown if not key.startswith("metadata.")]
    if unknown:
        raise ValueError("Unknown scenario key(s): {}".format(", ".join(unknown)))
    start = [
        _option(config, "start.lon", 152.0),
        _option(config, "start.lat", 33.0, check=_latitude),
    ]
    destination = [
        _option(config, "destination.lon", 158.0),
        _option(config, "destination.lat", 28.0, check=_latitude),
    ]
    controller = _build(
        "controller",
        ControllerConfig,
        horizon=_option(config, "controller.horizon", 2, convert=int),
        period=_option(config, "controller.period_h", 0.1, check=_positive),
        q_weight=_option(config, "controller.q_weight", np.eye(2), convert=_matrix),
        f_weight=_option(config, "controller.f_weight", np.eye(2), convert=_matrix),
        r_weight=_option(
            config, "controller.r_weight", 10 * np.eye(2), convert=_matrix
        ),
        u_min=_option(config, "controller.u_min", (0, 0), convert=_vector(2)),
        u_max=_option(config, "controller.u_max", (40, 40), convert=_vector(2)),
        s_min=_option(config, "controller.s_min", (-10, 10), convert=_vector(2)),
        s_max=_option(config, "controller.s_max", (100, 100), convert=_vector(2)),
        literal_linear_cost=_option(
            config, "controller.literal_linear_cost", False, convert=bool
        ),
    )
    ins = _build(
        "ins",
        InsConfig,
        east_error=_option(config, "ins.east_error_m", 5000.0),
        north_error=_option(config, "ins.north_error_m", 5000.0),
        speed_error=_option(config, "ins.speed_error_ms", 10.0),
        misalignment=_option(
            config, "ins.misalignment_arcmin", (50, 50, 500), convert=_vector(3)
        ),
        random_walk=_option(config, "ins.random_walk", 50.0),
        seed=_option(config, "ins.seed", 0, convert=int),
    )
    fusion = _build(
        "fusion",
        FusionConfig,
        q_c=_position_diagonal(_option(config, "fusion.q_position", 0.05)),
        r_c=_option(config, "fusion.r_position", 2.0) * np.eye(2),
        p0=_position_diagonal(_option(config, "fusion.p0_position", 1.0)),
        trigger=_option(config, "fusion.trigger", "min_abs", convert=str),
    )
    base_dir = os.path.abspath(base_dir)
    if field_model is None:
        field_model = _field_model(config, base_dir, coefficients=coefficients)
    mapping = _build(
        "storm",
        TimeMapping,
        mission_duration=_option(config, "storm.mission_duration_h", 16.4)
        * SECONDS_PER_HOUR,
        kind=_option(config, "storm.time_mapping", "linear", convert=str),
    )
    scenario = _build(
        "scenario",
        Scenario,
        start=start,
        destination=destination,
        field_model=field_model,
        date=_option(config, "date", 2024.5),
        anomaly=_anomaly_table(config, base_dir, storm=storm),
        time_mapping=mapping,
        controller=controller,
        ins=ins,
        fusion=fusion,
        epsilon=_option(config, "epsilon", 2.5, check=_positive),
        sigma=_option(config, "sigma", 1e-3, check=_non_negative),
        max_iterations=_option(
            config, "max_iterations", 2000, convert=int, check=_positive
        ),
        noise=_option(config, "noise", 0.01, check=_non_negative),
        seed=_option(config, "seed", 0, convert=int, check=_non_negative),
        cruise_speed=_option(config, "cruise_speed", 50.0, check=_positive),
        probe_length=_option(config, "probe_length", 1.0, check=_positive),
        probe_headings=_option(
            config, "probe_headings", (0, 270), convert=_vector(2)
        ),
        gradient_form=_option(
            config,
            "gradient_form",
            "secant",
            convert=str,
            check=_choice(("secant", "literal")),
        ),
        gradient_gain=_option(config, "gradient_gain", 0.2, check=_positive),
        converge_steps=_option(
            config, "converge_steps", None, convert=int, check=_positive
        ),
        reset_ins=_option(config, "reset_ins", False, convert=bool),
        name=_option(config, "name", "", convert=str),
        metadata=dict(config.get("metadata", {})),
    )
    match_tol = _option(config, "match_tol", MATCH_TOL, check=_positive)
    return scenario, match_tol


def load_scenario(path, **kwargs):
    """
    Read a scenario file (JSON).

    If ``path`` isn't an existing file, it is looked up among the scenarios
    installed with the package (``pacific_clean.json``, ``pacific_signed.json``,
    ``pacific_long_storm.json`` and ``pacific_short_storm.json``).

    Parameters
    ----------
    path : str
        The scenario file.
    kwargs
        Passed to :func:`geonav.cli.scenario_from_dict`.

    Returns
    -------
    scenario : :class:`geonav.Scenario`
    match_tol : float
    """
    if not os.path.isfile(path):
        shipped = os.path.join(SCENARIO_DIR, os.path.basename(path))
        if not os.path.isfile(shipped):
            raise IOError("Scenario file '{}' not found.".format(path))
        path = shipped
    with open(path) as scenario_file:
        try:
            config = json.load(scenario_file)
        except json.JSONDecodeError as error:
            raise IOError(
                "Invalid JSON in scenario file '{}' (line {}): {}".format(
                    path, error.lineno, error.msg
                )
            )
    return scenario_from_dict(config, base_dir=os.path.dirname(path), **kwargs)


def _variants(value):
    "Parse a comma-separated list of controller variants"
    variants = [i.strip() for i in value.split(",") if i.strip()]
    unknown = [i for i in variants if i not in VARIANTS]
    if not variants or unknown:
        raise argparse.ArgumentTypeError(
            "invalid variant(s) '{}'. Choose from {}.".format(
                ",".join(unknown) or value, ",".join(VARIANTS)
            )
        )
    return variants


def _positive_int(value):
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("must be at least 1, got {}".format(value))
    return number


def build_parser():
    "The argument parser of the command line interface"
    parser = argparse.ArgumentParser(
        prog="geonav",
        description="Geomagnetic navigation with inertial aiding and MPC steering.",
    )
    parser.add_argument(
        "--version", action="version", version="%(prog)s " + full_version
    )
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True
    for name, help_text in [
        ("run", "simulate navigation runs and compare controller variants"),
        ("replay", "run the navigation filters on a recorded track"),
    ]:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument(
            "--scenario",
            default="pacific_clean.json",
            help="scenario file (JSON) or name of a shipped scenario",
        )
        sub.add_argument(
            "--variants",
            type=_variants,
            default=list(VARIANTS),
            help="comma-separated controller variants (lti, ltv, fc)",
        )
        sub.add_argument("--seed", type=int, default=None, help="master seed")
        sub.add_argument("--storm", default=None, help="storm records (CSV)")
        sub.add_argument(
            "--coefficients", default=None, help="main field coefficients (.COF)"
        )
        sub.add_argument("--out", default=".", help="output directory")
        sub.add_argument(
            "--verbose", action="store_true", help="print debugging messages"
        )
        if name == "run":
            sub.add_argument(
                "--runs", type=_positive_int, default=1, help="runs per variant"
            )
            sub.add_argument(
                "--workers",
                type=_positive_int,
                default=None,
                help="worker processes (default: GEONAV_THREADS or all CPUs)",
            )
        else:
            sub.add_argument("--track", required=True, help="recorded track (CSV)")
    return parser


def cmd_run(args):
    """
    Run Monte Carlo ensembles for each variant and write the outputs.

    Writes ``<variant>_trajectory.csv`` (best run), ``<variant>_report.json``
    and ``comparison.csv`` to the output directory.
    """
    scenario, match_tol = load_scenario(
        args.scenario, coefficients=args.coefficients, storm=args.storm
    )
    seed = scenario.seed if args.seed is None else args.seed
    os.makedirs(args.out, exist_ok=True)
    reports = []
    for variant in args.variants:
        report = monte_carlo(
            scenario,
            variant=variant,
            n_runs=args.runs,
            master_seed=seed,
            workers=args.workers,
            match_tol=match_tol,
        )
        best = run_navigation(
            attr.evolve(scenario, seed=seed), variant, run_index=report.best_run
        )
        write_trajectory_csv(
            best, os.path.join(args.out, "{}_trajectory.csv".format(variant))
        )
        write_report_json(
            report, os.path.join(args.out, "{}_report.json".format(variant))
        )
        reports.append(report)
    fname = os.path.join(args.out, "comparison.csv")
    write_comparison_csv(reports, fname)
    LOGGER.info("Wrote the comparison of %d variant(s) to %s", len(reports), fname)
    return 0


def cmd_replay(args):
    """
    Replay a recorded track with each variant and write the outputs.

    Writes ``<variant>_trajectory.csv``, ``<variant>_report.json`` and a
    ``comparison.csv`` with GPS, INS and per-variant rows.
    """
    # The recorded D and I replace the main field model
    if args.coefficients is None:
        scenario, match_tol = load_scenario(
            args.scenario, storm=args.storm, field_model=CoefficientSet.tilted_dipole()
        )
    else:
        scenario, match_tol = load_scenario(
            args.scenario, coefficients=args.coefficients, storm=args.storm
        )
    if args.seed is not None:
        scenario = attr.evolve(scenario, seed=args.seed)
    track = load_track_csv(args.track)
    os.makedirs(args.out, exist_ok=True)
    results = []
    for variant in args.variants:
        result = replay_navigation(
            track,
            scenario,
            variant=variant,
            clean_field=args.coefficients is not None,
        )
        metrics = run_metrics(result, match_tol=match_tol)
        report = ensemble_report(variant, [metrics], result.destination)
        write_trajectory_csv(
            result, os.path.join(args.out, "{}_trajectory.csv".format(variant))
        )
        write_report_json(
            report, os.path.join(args.out, "{}_report.json".format(variant))
        )
        LOGGER.info(
            "Variant '%s': final estimate %.4f km from the recorded end point",
            variant,
            result.estimate_error,
        )
        results.append(result)
    table = replay_table(track, results)
    write_table_csv(table, os.path.join(args.out, "comparison.csv"))
    print(table.to_string(index=False, float_format="{:.4f}".format))
    return 0


def main(argv=None):
    """
    Entry point of the ``geonav`` command.

    Returns
    -------
    status : int
        0 on success and 1 if the simulation failed.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    command = {"run": cmd_run, "replay": cmd_replay}[args.command]
    try:
        return command(args)
    except (IOError, ValueError, RuntimeError) as error:
        LOGGER.error("%s", error)
        return 1


if __name__ == "__main__":
    sys.exit(main())
