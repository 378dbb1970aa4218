"""
Geographic coordinate conversions, local-plane steps and great-circle geometry.
"""
import numpy as np
from numba import jit

from .constants import EARTH_RADIUS
from .ellipsoid import WGS84


def geodetic_to_spherical(longitude, latitude, height, ellipsoid=WGS84):
    """
    Convert from geodetic to geocentric spherical coordinates.

    The coordinates are converted following [Vermeille2002]_.

    Parameters
    ----------
    longitude : float or array
        Longitude coordinates on geodetic coordinate system in degrees.
    latitude : float or array
        Latitude coordinates on geodetic coordinate system in degrees.
    height : float or array
        Ellipsoidal heights in kilometers.
    ellipsoid : :class:`geonav.ellipsoid.ReferenceEllipsoid`
        The datum of the geodetic coordinates. Defaults to WGS84.

    Returns
    -------
    longitude : float or array
        Longitude coordinates in degrees (not modified by the conversion).
    spherical_latitude : float or array
        Latitude coordinates on the geocentric spherical system in degrees.
    radius : float or array
        Spherical radius coordinates in kilometers.

    Examples
    --------

    On the equator the radius is the semi-major axis of the ellipsoid:

    >>> spherical = geodetic_to_spherical(longitude=0, latitude=0, height=0)
    >>> print(", ".join("{:.4f}".format(i) for i in spherical))
    0.0000, 0.0000, 6378.1370

    """
    latitude_rad = np.radians(latitude)
    e_squared = ellipsoid.eccentricity_squared
    semimajor_axis = ellipsoid.semimajor_axis / 1000
    prime_vertical_radius = semimajor_axis / np.sqrt(
        1 - e_squared * np.sin(latitude_rad) ** 2
    )
    # Only the projection on the XY plane is needed, not X and Y themselves
    xy_projection = (height + prime_vertical_radius) * np.cos(latitude_rad)
    z_cartesian = (
        height + (1 - e_squared) * prime_vertical_radius
    ) * np.sin(latitude_rad)
    radius = np.sqrt(xy_projection ** 2 + z_cartesian ** 2)
    spherical_latitude = np.degrees(np.arcsin(z_cartesian / radius))
    return longitude, spherical_latitude, radius


def vector_spherical_to_geodetic(latitude, spherical_latitude, vector):
    """
    Rotate a (north, east, down) vector from the geocentric to the geodetic frame.

    Parameters
    ----------
    latitude : float or array
        Geodetic latitude of the vector in degrees.
    spherical_latitude : float or array
        Geocentric spherical latitude of the vector in degrees.
    vector : tuple = (north, east, down)
        Components along the local spherical directions.

    Returns
    -------
    vector : tuple = (north, east, down)
        The rotated components. The east component is unchanged.
    """
    angle = np.radians(spherical_latitude - latitude)
    cos, sin = np.cos(angle), np.sin(angle)
    north_sph, east, down_sph = vector
    north = cos * north_sph - sin * down_sph
    down = sin * north_sph + cos * down_sph
    return north, east, down


def normalize_longitude(longitude):
    """
    Wrap longitudes into the (-180, 180] degree interval.

    Examples
    --------

    >>> print(normalize_longitude(190.0), normalize_longitude(-180.0))
    -170.0 180.0

    """
    wrapped = np.mod(np.asarray(longitude, dtype="float64") + 180, 360) - 180
    wrapped = np.where(wrapped == -180, 180.0, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def longitude_difference(longitude, longitude_ref):
    """
    Difference between two longitudes wrapped into (-180, 180] degrees.
    """
    return normalize_longitude(np.asarray(longitude) - np.asarray(longitude_ref))


@jit(nopython=True)
def haversine_core(longitude, latitude, longitude_p, latitude_p):
    """
    Central angle between two points given in radians (haversine formula).
    """
    sin_dlat = np.sin((latitude_p - latitude) / 2)
    sin_dlon = np.sin((longitude_p - longitude) / 2)
    aux = sin_dlat ** 2 + np.cos(latitude) * np.cos(latitude_p) * sin_dlon ** 2
    return 2 * np.arcsin(min(1.0, np.sqrt(aux)))


def great_circle_distance(
    longitude, latitude, longitude_p, latitude_p, radius=EARTH_RADIUS
):
    """
    Great-circle distance between points on a sphere.

    Parameters
    ----------
    longitude, latitude : float or array
        Coordinates of the first point(s) in degrees.
    longitude_p, latitude_p : float or array
        Coordinates of the second point(s) in degrees.
    radius : float
        Radius of the sphere in kilometers.

    Returns
    -------
    distance : float or array
        The distance in kilometers.

    Examples
    --------

    One degree of longitude along the equator:

    >>> print("{:.3f}".format(great_circle_distance(0, 0, 1, 0)))
    111.195

    """
    lon, lat, lon_p, lat_p = (
        np.radians(np.asarray(i, dtype="float64"))
        for i in (longitude, latitude, longitude_p, latitude_p)
    )
    aux = (
        np.sin((lat_p - lat) / 2) ** 2
        + np.cos(lat) * np.cos(lat_p) * np.sin((lon_p - lon) / 2) ** 2
    )
    distance = 2 * radius * np.arcsin(np.sqrt(np.clip(aux, 0, 1)))
    if distance.ndim == 0:
        return float(distance)
    return distance


def step_position(longitude, latitude, east, north, radius=EARTH_RADIUS):
    """
    Move a point by a displacement given in the local tangent plane.

    The local plane has x pointing east and y pointing north. Kilometers are
    converted to degrees with the spherical radius and the cosine of the
    starting latitude.

    Parameters
    ----------
    longitude, latitude : float
        Starting point in degrees.
    east, north : float
        Displacement in kilometers.
    radius : float
        Radius of the sphere in kilometers.

    Returns
    -------
    longitude, latitude : float
        The displaced point in degrees. The longitude is wrapped into
        (-180, 180].

    Examples
    --------

    >>> lon, lat = step_position(0, 0, east=111.19492664455873, north=0)
    >>> print("{:.6f} {:.6f}".format(lon, lat))
    1.000000 0.000000

    """
    dlat = np.degrees(north / radius)
    dlon = np.degrees(east / (radius * np.cos(np.radians(latitude))))
    return normalize_longitude(longitude + dlon), float(latitude + dlat)


def local_displacement(
    longitude, latitude, longitude_p, latitude_p, radius=EARTH_RADIUS
):
    """
    Local-plane (east, north) displacement in kilometers from one point to another.

    This is the inverse of :func:`step_position` and uses the cosine of the
    first point's latitude.
    """
    east = (
        np.radians(longitude_difference(longitude_p, longitude))
        * radius
        * np.cos(np.radians(latitude))
    )
    north = np.radians(latitude_p - latitude) * radius
    return float(east), float(north)


def _unit_vectors(longitude, latitude):
    "Cartesian unit vectors of points on the sphere"
    lon, lat = np.radians(longitude), np.radians(latitude)
    return np.stack(
        [np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)], axis=-1
    )


def _from_unit_vectors(vectors):
    "Longitude and latitude of Cartesian vectors (need not be normalized)"
    vectors = vectors / np.linalg.norm(vectors, axis=-1, keepdims=True)
    latitude = np.degrees(np.arcsin(np.clip(vectors[..., 2], -1, 1)))
    longitude = normalize_longitude(
        np.degrees(np.arctan2(vectors[..., 1], vectors[..., 0]))
    )
    return np.asarray(longitude, dtype="float64"), latitude


def _slerp(start, end, fractions):
    "Spherical linear interpolation between pairs of unit vectors"
    cos_angle = np.clip(np.sum(start * end, axis=-1), -1, 1)
    angle = np.arccos(cos_angle)[..., np.newaxis]
    fractions = fractions[..., np.newaxis]
    small = angle < 1e-12
    safe = np.where(small, 1, np.sin(angle))
    weight_start = np.where(
        small, 1 - fractions, np.sin((1 - fractions) * angle) / safe
    )
    weight_end = np.where(small, fractions, np.sin(fractions * angle) / safe)
    return weight_start * start + weight_end * end


def great_circle_points(longitude, latitude, longitude_p, latitude_p, n_points):
    """
    Points sampled at equal arc steps along the great circle between two points.

    Parameters
    ----------
    longitude, latitude : float
        Start of the arc in degrees.
    longitude_p, latitude_p : float
        End of the arc in degrees.
    n_points : int
        Number of points, including both end points. Must be at least 2.

    Returns
    -------
    longitude, latitude : 1d-arrays
        Coordinates of the points in degrees.
    """
    if n_points < 2:
        raise ValueError("Need at least 2 points, got {}.".format(n_points))
    start = np.broadcast_to(_unit_vectors(longitude, latitude), (n_points, 3))
    end = np.broadcast_to(_unit_vectors(longitude_p, latitude_p), (n_points, 3))
    points = _slerp(start, end, np.linspace(0, 1, n_points))
    lon, lat = _from_unit_vectors(points)
    # Keep the end points exact
    lon[0], lat[0] = normalize_longitude(longitude), latitude
    lon[-1], lat[-1] = normalize_longitude(longitude_p), latitude_p
    return lon, lat


def resample_path(longitude, latitude, n_points):
    """
    Resample a polyline to points equally spaced in great-circle arc length.

    Parameters
    ----------
    longitude, latitude : 1d-arrays
        Vertices of the path in degrees.
    n_points : int
        Number of points of the resampled path (at least 2).

    Returns
    -------
    longitude, latitude : 1d-arrays
        The resampled path. The first and last vertices are kept.
    """
    longitude = np.asarray(longitude, dtype="float64")
    latitude = np.asarray(latitude, dtype="float64")
    if n_points < 2:
        raise ValueError("Need at least 2 points, got {}.".format(n_points))
    if longitude.size < 2:
        raise ValueError("The path needs at least 2 vertices.")
    segments = great_circle_distance(
        longitude[:-1], latitude[:-1], longitude[1:], latitude[1:]
    )
    cumulative = np.concatenate([[0], np.cumsum(segments)])
    targets = np.linspace(0, cumulative[-1], n_points)
    index = np.searchsorted(cumulative, targets, side="right") - 1
    index = np.clip(index, 0, segments.size - 1)
    length = segments[index]
    fractions = np.where(
        length > 0, (targets - cumulative[index]) / np.where(length > 0, length, 1), 0
    )
    vectors = _unit_vectors(longitude, latitude)
    points = _slerp(vectors[index], vectors[index + 1], np.clip(fractions, 0, 1))
    lon, lat = _from_unit_vectors(points)
    lon[0], lat[0] = longitude[0], latitude[0]
    lon[-1], lat[-1] = longitude[-1], latitude[-1]
    return lon, lat


def path_length(longitude, latitude, radius=EARTH_RADIUS):
    """
    Length of a polyline as the sum of its great-circle segments [km].

    Examples
    --------

    >>> print("{:.3f}".format(path_length([0, 0.5, 1], [0, 0, 0])))
    111.195

    """
    longitude = np.asarray(longitude, dtype="float64")
    latitude = np.asarray(latitude, dtype="float64")
    if longitude.size < 2:
        raise ValueError("The path needs at least 2 vertices.")
    segments = great_circle_distance(
        longitude[:-1], latitude[:-1], longitude[1:], latitude[1:], radius=radius
    )
    return float(np.sum(segments))
