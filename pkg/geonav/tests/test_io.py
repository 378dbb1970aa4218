"""
Test writing the simulation outputs and reading recorded tracks.
"""
import json

import numpy as np
import numpy.testing as npt
import pandas as pd
import pytest

from ..io import (
    COMPARISON_COLUMNS,
    load_track_csv,
    parse_track_csv,
    report_to_dict,
    write_comparison_csv,
    write_report_json,
    write_track_csv,
    write_trajectory_csv,
)
from ..metrics import ensemble_report, run_metrics
from ..navigator import TRACK_COLUMNS, TRAJECTORY_COLUMNS, run_navigation
from ..navigator import track_from_result
from .utils import short_scenario

HEADER = ",".join(TRACK_COLUMNS)
TRACK = """# A recorded track
{}
0.0,152.0,33.0,7.1,44.2,152.05,33.04
0.1,152.05,32.98,7.1,44.1,152.1,33.02
0.2,152.1,32.96,7.0,44.0,152.16,33.0
""".format(
    HEADER
)


@pytest.fixture(scope="module", name="result")
def fixture_result():
    "A short navigation run"
    return run_navigation(short_scenario(max_iterations=4), variant="ltv")


def _read(fname):
    "First line and table of an output file"
    with open(fname) as output:
        first = output.readline().strip()
    return first, pd.read_csv(fname, comment="#")


def test_write_trajectory_csv(result, tmp_path):
    "Schema line, columns and the fusion flag as integers"
    fname = tmp_path / "trajectory.csv"
    write_trajectory_csv(result, fname)
    first, table = _read(fname)
    assert first == "# schema: geonav-trajectory/1"
    assert list(table.columns) == TRAJECTORY_COLUMNS
    assert table.shape[0] == result.trajectory.shape[0]
    assert set(table.fused.unique()) <= {0, 1}
    npt.assert_allclose(table.lon_deg, result.trajectory.lon_deg, atol=1e-7)


def test_report_json(result, tmp_path):
    "Rounded metrics, infinite values as text and the aggregate"
    report = ensemble_report("ltv", [run_metrics(result)], result.destination)
    content = report_to_dict(report)
    assert content["schema"] == "geonav-report/1"
    assert content["variant"] == "ltv"
    assert content["aggregate"]["n_runs"] == 1
    assert content["aggregate"]["best_run"] == 0
    run = content["runs"][0]
    assert run["snr"] == "inf"
    assert run["terminated"] == "max_iterations"
    assert run["trajectory_length"] == round(run["trajectory_length"], 4)
    assert set(content["aggregate"]["summary"]) == set(report.summary.index)
    fname = tmp_path / "report.json"
    write_report_json(report, fname)
    with open(fname) as report_file:
        assert json.load(report_file) == content


def test_write_comparison_csv(result, tmp_path):
    "One row per variant"
    reports = [
        ensemble_report(variant, [run_metrics(result)], result.destination)
        for variant in ("lti", "fc")
    ]
    fname = tmp_path / "comparison.csv"
    write_comparison_csv(reports, fname)
    first, table = _read(fname)
    assert first == "# schema: geonav-comparison/1"
    assert list(table.columns) == COMPARISON_COLUMNS
    assert list(table.variant) == ["lti", "fc"]
    assert np.all(table.runs == 1)
    npt.assert_allclose(table.iter_med, result.iterations)


def test_parse_track_csv():
    "Comments are skipped and the values are floats"
    track = parse_track_csv(TRACK)
    assert list(track.columns) == TRACK_COLUMNS
    assert track.shape == (3, 7)
    npt.assert_allclose(track.time_h, [0, 0.1, 0.2])
    npt.assert_allclose(track.ins_lat_deg, [33.04, 33.02, 33.0])


def test_parse_track_csv_extra_columns():
    "Columns that aren't part of a track are dropped"
    text = TRACK.replace(HEADER, HEADER + ",depth_m")
    text = text.replace("33.04\n", "33.04,10\n")
    text = text.replace("33.02\n", "33.02,11\n").replace("33.0\n", "33.0,12\n")
    assert list(parse_track_csv(text).columns) == TRACK_COLUMNS


@pytest.mark.parametrize(
    "text,message",
    [
        ("# nothing\n", "Empty"),
        (HEADER + "\n", "no data rows"),
        (TRACK.replace("gps_lat_deg,", ""), "line 2"),
        (TRACK.replace("44.1", "abc"), "line 4"),
        (TRACK.replace("0.2,", "0.1,"), "line 5"),
        (TRACK.replace("33.0,7.1", "93.0,7.1"), "line 3"),
    ],
    ids=["empty", "no-rows", "missing-column", "not-a-number", "time", "latitude"],
)
def test_parse_track_csv_invalid(text, message):
    "Errors name the line of the file"
    with pytest.raises(IOError) as error:
        parse_track_csv(text)
    assert message in str(error.value)


def test_track_file(result, tmp_path):
    "Tracks written from a simulated run can be loaded again"
    track = track_from_result(result)
    fname = tmp_path / "track.csv"
    write_track_csv(track, fname)
    with open(fname) as track_file:
        assert track_file.readline().strip() == "# schema: geonav-track/1"
    loaded = load_track_csv(fname)
    npt.assert_allclose(loaded.values, track.values, atol=1e-7)
