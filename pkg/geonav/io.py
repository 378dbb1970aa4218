"""
Functions to write simulation outputs and to read and write recorded tracks.

Every file starts with a line declaring its schema so that readers can check
what they are given.
"""
import io
import json

import attr
import numpy as np
import pandas as pd

from .navigator import TRACK_COLUMNS, TRAJECTORY_COLUMNS

#: Schema identifiers written at the top of each output file
TRAJECTORY_SCHEMA = "geonav-trajectory/1"
REPORT_SCHEMA = "geonav-report/1"
COMPARISON_SCHEMA = "geonav-comparison/1"
TRACK_SCHEMA = "geonav-track/1"

#: Columns of the comparison table of several variants
COMPARISON_COLUMNS = [
    "variant",
    "runs",
    "cep_km",
    "iter_med",
    "len_med_km",
    "var_med_km2",
    "dev_mean_km",
    "dev_max_km",
    "pmr_pct",
]


def _write_csv(table, fname, schema, float_format):
    with open(fname, "w", newline="") as output:
        output.write("# schema: {}\n".format(schema))
        table.to_csv(output, index=False, float_format=float_format)


def write_trajectory_csv(result, fname):
    """
    Write the trajectory of a navigation run to a CSV file.

    Positions and angles are written with 7 decimals. The fusion flag is
    written as 0 or 1.

    Parameters
    ----------
    result : :class:`geonav.NavigationResult`
    fname : str or :class:`pathlib.Path`
    """
    table = result.trajectory[TRAJECTORY_COLUMNS].copy()
    table["fused"] = table["fused"].astype(int)
    _write_csv(table, fname, TRAJECTORY_SCHEMA, "%.7f")


def _rounded(value, decimals=4):
    if isinstance(value, float):
        if not np.isfinite(value):
            return str(value)
        return round(value, decimals)
    return value


def report_to_dict(report):
    """
    Convert an ensemble report into a dictionary that can be serialized.

    Metrics are rounded to 4 decimals and the end point to 7.
    """
    runs = [
        {key: _rounded(value) for key, value in attr.asdict(run).items()}
        for run in report.runs
    ]
    summary = {
        metric: {key: _rounded(float(value)) for key, value in row.items()}
        for metric, row in report.summary.iterrows()
    }
    return {
        "schema": REPORT_SCHEMA,
        "variant": report.variant,
        "runs": runs,
        "aggregate": {
            "n_runs": len(report.runs),
            "aborted": int(report.aborted),
            "cep_km": _rounded(report.cep),
            "mean_terminal_lon_deg": _rounded(report.mean_terminal_lon, 7),
            "mean_terminal_lat_deg": _rounded(report.mean_terminal_lat, 7),
            "best_run": int(report.best_run),
            "summary": summary,
        },
    }


def write_report_json(report, fname):
    "Write an ensemble report to a JSON file"
    with open(fname, "w") as output:
        json.dump(report_to_dict(report), output, indent=2, sort_keys=True)
        output.write("\n")


def comparison_row(report):
    """
    The row of the comparison table for an ensemble report.

    Medians over the runs, except for the CEP.
    """
    median = report.summary["median"]
    return {
        "variant": report.variant,
        "runs": len(report.runs),
        "cep_km": report.cep,
        "iter_med": median["iterations"],
        "len_med_km": median["trajectory_length"],
        "var_med_km2": median["step_variability"],
        "dev_mean_km": median["mean_deviation"],
        "dev_max_km": median["max_deviation"],
        "pmr_pct": median["pmr"],
    }


def write_comparison_csv(reports, fname):
    "Write one row per ensemble report to a CSV file with 4 decimals"
    table = pd.DataFrame(
        [comparison_row(report) for report in reports], columns=COMPARISON_COLUMNS
    )
    _write_csv(table, fname, COMPARISON_SCHEMA, "%.4f")


def write_table_csv(table, fname, schema=COMPARISON_SCHEMA):
    "Write any summary table to a CSV file with 4 decimals"
    _write_csv(table, fname, schema, "%.4f")


def write_track_csv(track, fname):
    "Write a track (see :func:`geonav.load_track_csv`) with 7 decimals"
    _write_csv(track[TRACK_COLUMNS], fname, TRACK_SCHEMA, "%.7f")


def parse_track_csv(text):
    """
    Read a recorded track from the contents of a CSV file.

    Lines starting with ``#`` are ignored. The file needs the columns
    ``time_h, gps_lon_deg, gps_lat_deg, d_deg, i_deg, ins_lon_deg,
    ins_lat_deg`` and at least one row. Times must increase.

    Parameters
    ----------
    text : str
        The contents of the file.

    Returns
    -------
    track : :class:`pandas.DataFrame`
    """
    # Keep the line numbers of the header and data rows in the original text
    kept = [
        (number, line)
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.startswith("#")
    ]
    numbers = [number for number, _ in kept]
    content = "\n".join(line for _, line in kept)
    if not content.strip():
        raise IOError("Empty track file.")
    table = pd.read_csv(io.StringIO(content), dtype=str)
    missing = [name for name in TRACK_COLUMNS if name not in table.columns]
    if missing:
        raise IOError(
            "Missing column(s) {} in the header of the track file (line {}).".format(
                ", ".join(missing), numbers[0]
            )
        )
    table = table[TRACK_COLUMNS]
    if table.shape[0] == 0:
        raise IOError("The track file has no data rows.")
    values = table.apply(pd.to_numeric, errors="coerce")
    invalid = ~np.isfinite(values.values.astype("float64"))
    if np.any(invalid):
        row, column = np.argwhere(invalid)[0]
        raise IOError(
            "Invalid value '{}' for column '{}' in line {} of the track file.".format(
                table.iat[row, column], TRACK_COLUMNS[column], numbers[row + 1]
            )
        )
    values = values.astype("float64")
    steps = np.diff(values.time_h.values)
    if np.any(steps <= 0):
        row = int(np.argmax(steps <= 0)) + 1
        raise IOError(
            "Track times must increase (line {}).".format(numbers[row + 1])
        )
    for name in ("gps_lat_deg", "ins_lat_deg"):
        bad = np.abs(values[name].values) > 90
        if np.any(bad):
            row = int(np.argmax(bad))
            raise IOError(
                "Invalid latitude {} in column '{}' in line {}.".format(
                    values[name].values[row], name, numbers[row + 1]
                )
            )
    return values


def load_track_csv(fname):
    """
    Read a recorded track from a CSV file.

    See :func:`geonav.io.parse_track_csv` for the format.
    """
    with open(fname) as track_file:
        return parse_track_csv(track_file.read())
