"""
Test the storm disturbance records and the anomaly table.
"""
import numpy as np
import numpy.testing as npt
import pytest

from ..geofield import GeoPosition
from ..storm import (
    StationRecord,
    TimeMapping,
    anomaly_at,
    build_anomaly_table,
    horizontal_intensity,
    interpolate_anomaly,
    load_storm_csv,
    parse_storm_csv,
    synthetic_storm,
    table_covers,
)

CSV = """time_s,lon_deg,lat_deg,dbx_nt,dby_nt,dbz_nt
0,145,27,-10,2,1
0,165,27,-12,3,
0,145,34,-8,1,2
0,165,34,-9,0,
3600,145,27,20,-2,1
3600,165,27,22,-3,
3600,145,34,18,-1,2
3600,165,34,19,0,
"""


def _constant_records(dbx, dby, times=(0, 3600, 7200)):
    "Records with the same disturbance on the corners of the default region"
    return [
        StationRecord(time=time, lon=lon, lat=lat, dbx=dbx, dby=dby, dbz=1.0)
        for time in times
        for lon, lat in [(145, 27), (165, 27), (145, 34), (165, 34)]
    ]


def test_horizontal_intensity_arrays():
    "The sign follows dbx"
    npt.assert_allclose(
        horizontal_intensity([3, -3, 0, -0.0], [4, 4, -2, 1]), [5, -5, 2, 1]
    )


def test_parse_storm_csv():
    "Read the records with and without the vertical component"
    records = parse_storm_csv(CSV)
    assert len(records) == 8
    assert records[0] == StationRecord(0, 145, 27, -10, 2, 1)
    assert records[1].dbz is None
    assert records[4].time == 3600


def test_load_storm_csv(tmpdir):
    "Read the records from a file"
    fname = tmpdir.join("storm.csv")
    fname.write(CSV)
    assert len(load_storm_csv(str(fname))) == 8


def test_parse_storm_csv_invalid():
    "Report missing columns and bad values with line numbers"
    with pytest.raises(IOError) as error:
        parse_storm_csv("time_s,lon_deg,lat_deg,dbx_nt,dby_nt\n0,1,2,3,4\n")
    assert "dbz_nt" in str(error.value)
    with pytest.raises(IOError) as error:
        parse_storm_csv(CSV + "7200,150,30,abc,1,\n")
    assert "line 10" in str(error.value)
    with pytest.raises(IOError) as error:
        parse_storm_csv(CSV + "7200,150,30,,1,\n")
    assert "dbx_nt" in str(error.value)
    with pytest.raises(ValueError) as error:
        parse_storm_csv(CSV + "7200,150,95,1,1,\n")
    assert "line 10" in str(error.value)


def test_station_record_invalid():
    "Negative times and bad latitudes are rejected"
    with pytest.raises(ValueError):
        StationRecord(time=-1, lon=150, lat=30, dbx=0, dby=0)
    with pytest.raises(ValueError):
        StationRecord(time=0, lon=150, lat=-91, dbx=0, dby=0)


@pytest.mark.use_numba
def test_interpolate_anomaly_at_station():
    "Records of a station are averaged and reproduced at the station"
    records = [
        StationRecord(0, 150, 30, dbx=-4, dby=2),
        StationRecord(60, 150, 30, dbx=-6, dby=4),
        StationRecord(0, 160, 32, dbx=10, dby=10),
    ]
    sample = interpolate_anomaly(records, GeoPosition(150, 30))
    npt.assert_allclose([sample.dbx, sample.dby, sample.dbz], [-5, 3, 0])
    npt.assert_allclose(sample.dbh, -np.hypot(5, 3))


def test_interpolate_anomaly_invalid():
    "Needs records and a known method"
    with pytest.raises(ValueError):
        interpolate_anomaly([], GeoPosition(150, 30))
    with pytest.raises(ValueError):
        interpolate_anomaly(_constant_records(1, 1), GeoPosition(150, 30), "spline")


@pytest.mark.use_numba
def test_build_anomaly_table_shape():
    "One grid per time bin on the cell centers"
    table = build_anomaly_table(parse_storm_csv(CSV), spacing=1.0, time_bin=1800)
    assert table.dbx.shape == (2, 7, 20)
    npt.assert_allclose(table.time, [0, 1800])
    npt.assert_allclose(table.longitude[[0, -1]], [145.5, 164.5])
    npt.assert_allclose(table.latitude[[0, -1]], [27.5, 33.5])
    assert table.attrs["duration"] == 3600
    # The record at the end of the last bin belongs to it
    assert np.all(table.dbx.isel(time=1) > 0)
    assert np.all(table.dbx.isel(time=0) < 0)
    npt.assert_allclose(
        table.dbh, horizontal_intensity(table.dbx.values, table.dby.values)
    )


@pytest.mark.use_numba
def test_build_anomaly_table_constant():
    "Constant disturbances give constant tables with both methods"
    records = _constant_records(dbx=-30, dby=40)
    for method in ("idw", "kriging"):
        table = build_anomaly_table(records, spacing=1.0, method=method)
        npt.assert_allclose(table.dbx, -30)
        npt.assert_allclose(table.dbh, -50)
        npt.assert_allclose(table.dbz, 1)
        assert table.attrs["method"] == method


def test_build_anomaly_table_invalid():
    "Bad regions, spacings and empty bins"
    records = _constant_records(dbx=1, dby=1)
    with pytest.raises(ValueError):
        build_anomaly_table([])
    with pytest.raises(ValueError):
        build_anomaly_table(records, spacing=0.3)
    with pytest.raises(ValueError):
        build_anomaly_table(records, time_bin=0)
    with pytest.raises(ValueError):
        build_anomaly_table(_constant_records(1, 1, times=(0, 9000)), time_bin=3600)


def test_time_mapping():
    "Linear stretch and identity, both clamped"
    linear = TimeMapping(mission_duration=100)
    npt.assert_allclose(linear(25, dataset_duration=8), 2)
    identity = TimeMapping(kind="identity")
    npt.assert_allclose(identity(5, dataset_duration=8), 5)
    npt.assert_allclose(identity(50, dataset_duration=8), 8)
    with pytest.raises(ValueError):
        TimeMapping(mission_duration=0)
    with pytest.raises(ValueError):
        TimeMapping(kind="log")


@pytest.mark.use_numba
def test_anomaly_at():
    "Look up the cell and the time bin of a position"
    table = build_anomaly_table(parse_storm_csv(CSV), time_bin=1800)
    identity = TimeMapping(kind="identity")
    pos = GeoPosition(146.2, 27.9)
    early = anomaly_at(table, pos, 100, mapping=identity)
    late = anomaly_at(table, pos, 3000, mapping=identity)
    npt.assert_allclose(early.dbx, table.dbx.values[0, 0, 1])
    npt.assert_allclose(late.dbx, table.dbx.values[1, 0, 1])
    # The east and north edges belong to the last cells
    edge = anomaly_at(table, GeoPosition(165, 34), 0, mapping=identity)
    npt.assert_allclose(edge.dby, table.dby.values[0, -1, -1])
    assert table_covers(table, GeoPosition(165, 34))
    assert not table_covers(table, GeoPosition(166, 30))
    with pytest.raises(ValueError):
        anomaly_at(table, GeoPosition(140, 30), 0)


def test_synthetic_storm():
    "Stations on the corners and the expected sampling"
    long_storm = synthetic_storm("long", seed=3)
    assert len(long_storm) == 37 * 12
    short_storm = synthetic_storm("short", seed=3)
    assert len(short_storm) == 94 * 12
    corners = {(i.lon, i.lat) for i in long_storm}
    assert {(145, 27), (165, 27), (145, 34), (165, 34)} <= corners
    assert synthetic_storm("long", seed=3) == long_storm
    assert synthetic_storm("long", seed=4) != long_storm
    with pytest.raises(ValueError):
        synthetic_storm("medium")
    with pytest.raises(ValueError):
        synthetic_storm(n_stations=3)
