"""
Test coordinate conversions and great-circle geometry.
"""
import numpy as np
import numpy.testing as npt
import pytest

from ..constants import EARTH_RADIUS
from ..coordinates import (
    geodetic_to_spherical,
    great_circle_distance,
    great_circle_points,
    haversine_core,
    local_displacement,
    longitude_difference,
    normalize_longitude,
    path_length,
    resample_path,
    step_position,
)
from ..ellipsoid import WGS84


def test_geodetic_to_spherical_on_poles():
    "The radius at the poles is the semi-minor axis"
    _, latitude, radius = geodetic_to_spherical(
        np.array([0.0, 120.0]), np.array([90.0, -90.0]), np.zeros(2)
    )
    npt.assert_allclose(latitude, [90, -90])
    npt.assert_allclose(radius, WGS84.semiminor_axis / 1000, rtol=1e-10)


def test_geodetic_to_spherical_latitude_smaller():
    "Geocentric latitudes are closer to the equator than geodetic ones"
    latitude = np.linspace(5, 85, 9)
    _, spherical_latitude, _ = geodetic_to_spherical(0, latitude, 0)
    assert np.all(spherical_latitude < latitude)
    assert np.all(spherical_latitude > latitude - 0.2)


def test_normalize_longitude():
    "Longitudes are wrapped into (-180, 180]"
    npt.assert_allclose(
        normalize_longitude([190, -190, 360, 180, -180, 540]),
        [-170, 170, 0, 180, 180, 180],
    )
    assert normalize_longitude(-181.0) == 179.0


def test_longitude_difference_across_antimeridian():
    "The difference takes the short way around"
    npt.assert_allclose(longitude_difference(-179, 179), 2)
    npt.assert_allclose(longitude_difference(179, -179), -2)


def test_great_circle_distance_meridian_degree():
    "One degree of latitude is pi/180 of the radius"
    npt.assert_allclose(
        great_circle_distance(152, 33, 152, 34), EARTH_RADIUS * np.pi / 180
    )
    assert great_circle_distance(10, 20, 10, 20) == 0


@pytest.mark.use_numba
def test_haversine_core_matches_distance():
    "The jitted central angle agrees with the vectorized distance"
    angle = haversine_core(*np.radians([152.0, 33.0, 158.0, 28.0]))
    npt.assert_allclose(
        angle * EARTH_RADIUS, great_circle_distance(152, 33, 158, 28), rtol=1e-12
    )


def test_step_position_inverse_of_local_displacement():
    "Stepping and measuring the local displacement give back the step"
    lon, lat = step_position(152.0, 33.0, east=3.0, north=-4.0)
    east, north = local_displacement(152.0, 33.0, lon, lat)
    npt.assert_allclose([east, north], [3, -4], rtol=1e-12)


def test_step_position_wraps_longitude():
    "Steps across the antimeridian keep the longitude in (-180, 180]"
    lon, _ = step_position(179.99, 0.0, east=10.0, north=0)
    assert -180 < lon < -179.9


def test_great_circle_points_equally_spaced():
    "Points are equally spaced and keep the end points"
    lon, lat = great_circle_points(152, 33, 158, 28, 11)
    assert lon.size == 11
    npt.assert_allclose([lon[0], lat[0], lon[-1], lat[-1]], [152, 33, 158, 28])
    steps = great_circle_distance(lon[:-1], lat[:-1], lon[1:], lat[1:])
    npt.assert_allclose(steps, great_circle_distance(152, 33, 158, 28) / 10)


def test_great_circle_points_invalid():
    "Needs at least the two end points"
    with pytest.raises(ValueError):
        great_circle_points(0, 0, 1, 1, 1)


def test_resample_path_equator():
    "Resampling an uneven polyline along the equator"
    lon, lat = resample_path([0, 1, 3], [0, 0, 0], 4)
    npt.assert_allclose(lon, [0, 1, 2, 3], atol=1e-10)
    npt.assert_allclose(lat, 0, atol=1e-10)


def test_resample_path_invalid():
    "Paths need 2 vertices and 2 output points"
    with pytest.raises(ValueError):
        resample_path([0], [0], 4)
    with pytest.raises(ValueError):
        resample_path([0, 1], [0, 0], 1)


def test_path_length():
    "The length is the sum of the segments"
    npt.assert_allclose(
        path_length([0, 0, 1], [0, 1, 1]),
        great_circle_distance(0, 0, 0, 1) + great_circle_distance(0, 1, 1, 1),
    )
    with pytest.raises(ValueError):
        path_length([0], [0])
