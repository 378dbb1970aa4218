"""
Magnetic storm disturbances: observatory records, signed horizontal intensity
and the gridded time-varying anomaly table.
"""
import io

import attr
import numpy as np
import pandas as pd
import verde as vd
import xarray as xr

from .constants import SECONDS_PER_HOUR
from .coordinates import normalize_longitude
from .interpolation import IdwGridder, KrigingGridder

#: Region of the Pacific missions (W, E, S, N) in degrees
DEFAULT_REGION = (145.0, 165.0, 27.0, 34.0)

#: Columns of the storm CSV files
STORM_COLUMNS = ["time_s", "lon_deg", "lat_deg", "dbx_nt", "dby_nt", "dbz_nt"]

#: Default mission duration used to stretch the storm over the navigation [s]
DEFAULT_MISSION_DURATION = 16.4 * SECONDS_PER_HOUR

GRIDDERS = {"idw": IdwGridder, "kriging": KrigingGridder}


def horizontal_intensity(dbx, dby):
    """
    Signed horizontal intensity of a disturbance.

    The magnitude is :math:`\\sqrt{dB_x^2 + dB_y^2}` and the sign is the sign of
    :math:`dB_x`. A disturbance with :math:`dB_x = 0` is taken as positive.

    Parameters
    ----------
    dbx, dby : float or array
        North and east disturbance components [nT].

    Returns
    -------
    dbh : float or array
        The signed horizontal intensity [nT].

    Examples
    --------

    >>> print(horizontal_intensity(3, 4), horizontal_intensity(-3, 4))
    5.0 -5.0
    >>> print(horizontal_intensity(0, 7))
    7.0

    """
    dbx = np.asarray(dbx, dtype="float64")
    sign = np.where(dbx < 0, -1.0, 1.0)
    dbh = sign * np.hypot(dbx, dby)
    if dbh.ndim == 0:
        return float(dbh)
    return dbh


def _check_latitude(instance, attribute, value):
    if not -90 <= value <= 90:
        raise ValueError(
            "Invalid {} {}. Must be in the [-90, 90] interval.".format(
                attribute.name, value
            )
        )


def _optional_float(value):
    if value is None:
        return None
    value = float(value)
    if np.isnan(value):
        return None
    return value


@attr.s(frozen=True)
class StationRecord:
    """
    Disturbance measured by a magnetic observatory at one instant.

    Parameters
    ----------
    time : float
        Seconds since the start of the dataset.
    lon, lat : float
        Position of the station in degrees.
    dbx, dby : float
        North and east disturbance components [nT].
    dbz : float or None
        Vertical (down) disturbance component [nT], if recorded.
    """

    time = attr.ib(converter=float)
    lon = attr.ib(converter=normalize_longitude)
    lat = attr.ib(converter=float, validator=_check_latitude)
    dbx = attr.ib(converter=float)
    dby = attr.ib(converter=float)
    dbz = attr.ib(default=None, converter=_optional_float)

    @time.validator
    def _check_time(self, attribute, value):
        "Times are counted from the start of the dataset"
        if value < 0:
            raise ValueError("Invalid negative record time {}.".format(value))


@attr.s(frozen=True)
class AnomalySample:
    """
    Magnetic disturbance at a point [nT].

    ``dbh`` is the signed horizontal intensity and is computed from ``dbx``
    and ``dby`` if not given.

    Examples
    --------

    >>> print(AnomalySample(dbx=-3, dby=4).dbh)
    -5.0

    """

    dbx = attr.ib(converter=float)
    dby = attr.ib(converter=float)
    dbz = attr.ib(default=0.0, converter=float)
    dbh = attr.ib(
        default=attr.Factory(
            lambda self: horizontal_intensity(self.dbx, self.dby), takes_self=True
        ),
        converter=float,
    )


def parse_storm_csv(text):
    """
    Parse observatory disturbance records from CSV text.

    The header must contain the columns
    ``time_s,lon_deg,lat_deg,dbx_nt,dby_nt,dbz_nt``. The ``dbz_nt`` values may
    be empty.

    Parameters
    ----------
    text : str
        The CSV content.

    Returns
    -------
    records : list of :class:`geonav.StationRecord`
        One record per data row, in file order.
    """
    try:
        table = pd.read_csv(io.StringIO(text), dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise IOError("Missing header in the storm CSV file.")
    table.columns = [column.strip() for column in table.columns]
    for column in STORM_COLUMNS:
        if column not in table.columns:
            raise IOError(
                "Couldn't find {} column in the storm CSV file.".format(column)
            )
    records = []
    # Line 1 is the header
    for line, row in enumerate(table.to_dict("records"), start=2):
        try:
            values = {
                column: float(row[column])
                for column in STORM_COLUMNS[:-1]
                if not pd.isna(row[column])
            }
            dbz = row["dbz_nt"]
            dbz = None if pd.isna(dbz) or not dbz.strip() else float(dbz)
        except ValueError:
            raise IOError(
                "Unparseable number in line {} of the storm CSV.".format(line)
            )
        missing = [column for column in STORM_COLUMNS[:-1] if column not in values]
        if missing:
            raise IOError(
                "Missing value for {} in line {} of the storm CSV.".format(
                    ", ".join(missing), line
                )
            )
        try:
            record = StationRecord(
                time=values["time_s"],
                lon=values["lon_deg"],
                lat=values["lat_deg"],
                dbx=values["dbx_nt"],
                dby=values["dby_nt"],
                dbz=dbz,
            )
        except ValueError as error:
            raise ValueError("Invalid record in line {}: {}".format(line, error))
        records.append(record)
    return records


def load_storm_csv(fname):
    """
    Read observatory disturbance records from a CSV file.

    See :func:`geonav.parse_storm_csv` for the format.
    """
    with open(fname) as storm_file:
        return parse_storm_csv(storm_file.read())


def records_to_dataframe(records):
    """
    Convert a list of station records to a :class:`pandas.DataFrame` with the
    storm CSV columns.
    """
    return pd.DataFrame(
        {
            "time_s": [record.time for record in records],
            "lon_deg": [record.lon for record in records],
            "lat_deg": [record.lat for record in records],
            "dbx_nt": [record.dbx for record in records],
            "dby_nt": [record.dby for record in records],
            "dbz_nt": [
                np.nan if record.dbz is None else record.dbz for record in records
            ],
        },
        columns=STORM_COLUMNS,
    )


def _station_means(records):
    "Average the records of each station so that every location appears once"
    table = records_to_dataframe(records)
    return table.groupby(["lon_deg", "lat_deg"], sort=True).mean().reset_index()


def _fit_components(records, method, **kwargs):
    "Fit one gridder per disturbance component. dbz is None if never recorded."
    if method not in GRIDDERS:
        raise ValueError(
            "Unknown interpolation method '{}'. Use one of {}.".format(
                method, ", ".join(GRIDDERS)
            )
        )
    stations = _station_means(records)
    gridders = {}
    for component in ("dbx_nt", "dby_nt", "dbz_nt"):
        valid = stations[component].notna()
        if not valid.any():
            gridders[component] = None
            continue
        coordinates = (
            stations.lon_deg[valid].values,
            stations.lat_deg[valid].values,
        )
        gridders[component] = GRIDDERS[method](**kwargs).fit(
            coordinates, stations[component][valid].values
        )
    return gridders


def _predict_components(gridders, coordinates):
    shape = np.broadcast(*coordinates).shape
    values = {}
    for component, gridder in gridders.items():
        if gridder is None:
            values[component] = np.zeros(shape)
        else:
            values[component] = gridder.predict(coordinates)
    return values["dbx_nt"], values["dby_nt"], values["dbz_nt"]


def interpolate_anomaly(records, at, method="idw", **kwargs):
    """
    Interpolate the disturbance of one time bin at a position.

    Records of the same station are averaged first. The default inverse
    distance weighting (power 2, great-circle distances) reproduces the
    station values exactly at the station locations.

    Parameters
    ----------
    records : list of :class:`geonav.StationRecord`
        The records of a single time bin.
    at : :class:`geonav.GeoPosition`
        Where to interpolate.
    method : str
        ``"idw"`` or ``"kriging"``.
    kwargs
        Passed to the gridder (:class:`geonav.IdwGridder` or
        :class:`geonav.KrigingGridder`).

    Returns
    -------
    sample : :class:`geonav.AnomalySample`
    """
    if not records:
        raise ValueError("No disturbance records to interpolate from.")
    gridders = _fit_components(records, method, **kwargs)
    dbx, dby, dbz = _predict_components(
        gridders, (np.atleast_1d(at.lon), np.atleast_1d(at.lat))
    )
    return AnomalySample(dbx=dbx[0], dby=dby[0], dbz=dbz[0])


def build_anomaly_table(
    records, region=DEFAULT_REGION, spacing=1.0, time_bin=SECONDS_PER_HOUR, **kwargs
):
    """
    Grid observatory records into a time-varying anomaly table.

    Records are split into time bins of ``time_bin`` seconds starting at time
    zero. The number of bins is ``ceil(max_time / time_bin)`` (at least one)
    and a record falling exactly on the end of the last bin belongs to it.
    Each bin is interpolated on the centers of the cells of a regular grid
    with :func:`geonav.interpolate_anomaly`'s gridders and the signed
    horizontal intensity is recomputed per cell.

    Parameters
    ----------
    records : list of :class:`geonav.StationRecord`
        The disturbance records.
    region : tuple = (W, E, S, N)
        Boundaries of the grid in degrees.
    spacing : float
        Size of the grid cells in degrees.
    time_bin : float
        Length of the time bins [s].
    kwargs
        Passed to :func:`geonav.interpolate_anomaly` (``method`` and gridder
        parameters).

    Returns
    -------
    table : :class:`xarray.Dataset`
        Variables ``dbx``, ``dby``, ``dbz`` and ``dbh`` [nT] with dimensions
        ``(time, latitude, longitude)``. The ``time`` coordinate holds the start
        of each bin [s] and the cell centers are the spatial coordinates.
    """
    if not records:
        raise ValueError("Can't build an anomaly table without records.")
    if time_bin <= 0 or spacing <= 0:
        raise ValueError(
            "Invalid time bin {} or spacing {}. Both must be positive.".format(
                time_bin, spacing
            )
        )
    west, east, south, north = region
    shape = (round((north - south) / spacing), round((east - west) / spacing))
    if min(shape) < 1 or not np.allclose(
        [shape[0] * spacing, shape[1] * spacing], [north - south, east - west]
    ):
        raise ValueError(
            "Region {} must be a whole number of {} degree cells.".format(
                region, spacing
            )
        )
    half = spacing / 2
    # Cell centers
    longitude, latitude = vd.grid_coordinates(
        (west + half, east - half, south + half, north - half), shape=shape
    )
    times = np.array([record.time for record in records])
    n_bins = max(1, int(np.ceil(times.max() / time_bin)))
    bins = np.minimum(np.floor(times / time_bin).astype(int), n_bins - 1)
    method = kwargs.pop("method", "idw")
    components = {name: [] for name in ("dbx", "dby", "dbz")}
    for index in range(n_bins):
        in_bin = [record for record, bin_ in zip(records, bins) if bin_ == index]
        if not in_bin:
            raise ValueError(
                "Time bin {} ({} s to {} s) has no records.".format(
                    index, index * time_bin, (index + 1) * time_bin
                )
            )
        gridders = _fit_components(in_bin, method, **kwargs)
        for name, values in zip(
            ("dbx", "dby", "dbz"), _predict_components(gridders, (longitude, latitude))
        ):
            components[name].append(values)
    dims = ("time", "latitude", "longitude")
    data_vars = {name: (dims, np.array(values)) for name, values in components.items()}
    data_vars["dbh"] = (
        dims,
        horizontal_intensity(data_vars["dbx"][1], data_vars["dby"][1]),
    )
    table = xr.Dataset(
        data_vars,
        coords={
            "time": np.arange(n_bins) * time_bin,
            "latitude": latitude[:, 0],
            "longitude": longitude[0, :],
        },
        attrs={
            "time_bin": time_bin,
            "spacing": spacing,
            "duration": n_bins * time_bin,
            "region": list(region),
            "method": method,
        },
    )
    for name, description in [
        ("dbx", "Northward disturbance"),
        ("dby", "Eastward disturbance"),
        ("dbz", "Downward disturbance"),
        ("dbh", "Signed horizontal disturbance intensity"),
    ]:
        table[name].attrs["long_name"] = description
        table[name].attrs["units"] = "nT"
    return table


@attr.s(frozen=True)
class TimeMapping:
    """
    Map mission time onto the time of a storm dataset.

    With ``kind="linear"`` the whole dataset is stretched over the mission:
    the start of the mission sees the start of the storm and
    ``mission_duration`` sees its end. With ``kind="identity"`` mission and
    dataset times are the same. Both are clamped to the dataset.

    Parameters
    ----------
    mission_duration : float
        Duration of the mission [s].
    kind : str
        ``"linear"`` or ``"identity"``.

    Examples
    --------

    >>> mapping = TimeMapping(mission_duration=100)
    >>> print(mapping(50, dataset_duration=10), mapping(500, dataset_duration=10))
    5.0 10.0

    """

    mission_duration = attr.ib(default=DEFAULT_MISSION_DURATION, converter=float)
    kind = attr.ib(default="linear")

    @mission_duration.validator
    def _check_duration(self, attribute, value):
        "Only positive durations make sense"
        if value <= 0:
            raise ValueError("Invalid mission duration {}.".format(value))

    @kind.validator
    def _check_kind(self, attribute, value):
        "Check the mapping kind"
        if value not in ("linear", "identity"):
            raise ValueError(
                "Unknown time mapping '{}'. Use 'linear' or 'identity'.".format(value)
            )

    def __call__(self, mission_time, dataset_duration):
        if self.kind == "linear":
            dataset_time = mission_time / self.mission_duration * dataset_duration
        else:
            dataset_time = mission_time
        return float(np.clip(dataset_time, 0, dataset_duration))


def table_covers(table, pos):
    "True if the position is inside the region of an anomaly table"
    west, east, south, north = table.attrs["region"]
    return bool(west <= pos.lon <= east and south <= pos.lat <= north)


def anomaly_at(table, pos, mission_time, mapping=None):
    """
    Look up the disturbance of the table cell containing a position.

    Parameters
    ----------
    table : :class:`xarray.Dataset`
        Table built by :func:`geonav.build_anomaly_table`.
    pos : :class:`geonav.GeoPosition`
        The position.
    mission_time : float
        Time since the start of the mission [s].
    mapping : :class:`geonav.TimeMapping` or None
        Mapping of mission time onto dataset time. Defaults to a linear
        stretch over :data:`DEFAULT_MISSION_DURATION`.

    Returns
    -------
    sample : :class:`geonav.AnomalySample`
    """
    if mapping is None:
        mapping = TimeMapping()
    spacing = table.attrs["spacing"]
    west, east, south, north = table.attrs["region"]
    if not table_covers(table, pos):
        raise ValueError(
            "Position ({}, {}) is outside of the anomaly table region {}.".format(
                pos.lon, pos.lat, table.attrs["region"]
            )
        )
    i_lon = min(int(np.floor((pos.lon - west) / spacing)), table.longitude.size - 1)
    i_lat = min(int(np.floor((pos.lat - south) / spacing)), table.latitude.size - 1)
    dataset_time = mapping(mission_time, table.attrs["duration"])
    i_time = int(np.floor(dataset_time / table.attrs["time_bin"]))
    i_time = min(i_time, table.time.size - 1)
    cell = table.isel(time=i_time, latitude=i_lat, longitude=i_lon)
    return AnomalySample(
        dbx=cell.dbx.values,
        dby=cell.dby.values,
        dbz=cell.dbz.values,
        dbh=cell.dbh.values,
    )


def synthetic_storm(kind="long", region=DEFAULT_REGION, seed=0, n_stations=12):
    """
    Generate synthetic observatory records that imitate a magnetic storm.

    This is a stand-in for real observatory exports when none are at hand.
    The disturbance has a storm envelope in time, a smooth trend in latitude
    and a random amplitude per station. A ``"long"`` storm lasts 6 hours and
    is sampled every 10 minutes. A ``"short"`` storm lasts 93 minutes and is
    sampled every minute with a weaker amplitude.

    Parameters
    ----------
    kind : str
        ``"long"`` or ``"short"``.
    region : tuple = (W, E, S, N)
        Stations are placed inside this region (corners included).
    seed : int
        Seed of the random number generator.
    n_stations : int
        Number of stations.

    Returns
    -------
    records : list of :class:`geonav.StationRecord`
    """
    settings = {
        "long": dict(duration=6 * SECONDS_PER_HOUR, step=600, dbx=-200.0, dby=40.0),
        "short": dict(duration=93 * 60, step=60, dbx=-120.0, dby=25.0),
    }
    if kind not in settings:
        raise ValueError(
            "Unknown storm kind '{}'. Use 'long' or 'short'.".format(kind)
        )
    setting = settings[kind]
    random = np.random.default_rng(seed)
    west, east, south, north = region
    # Put stations on the corners so the table is interpolated, not extrapolated
    if n_stations < 4:
        raise ValueError("Need at least 4 stations, got {}.".format(n_stations))
    lon = np.concatenate(
        [[west, east, west, east], random.uniform(west, east, n_stations - 4)]
    )
    lat = np.concatenate(
        [[south, south, north, north], random.uniform(south, north, n_stations - 4)]
    )
    scale = random.uniform(0.8, 1.2, lon.size)
    trend = 1 + 0.03 * (lat - (south + north) / 2)
    phase = random.uniform(0, 2 * np.pi, lon.size)
    times = np.arange(0, setting["duration"] + 1, setting["step"], dtype="float64")
    records = []
    for time in times:
        envelope = np.sin(np.pi * time / setting["duration"]) ** 2
        ripple = np.sin(2 * np.pi * time / (setting["duration"] / 3) + phase)
        dbx = setting["dbx"] * envelope * scale * trend + 5 * ripple
        dby = setting["dby"] * envelope * scale * np.cos(phase) + 2 * ripple
        for station in range(lon.size):
            records.append(
                StationRecord(
                    time=time,
                    lon=lon[station],
                    lat=lat[station],
                    dbx=dbx[station],
                    dby=dby[station],
                )
            )
    return records
