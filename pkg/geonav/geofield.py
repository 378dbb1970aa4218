"""
Main geomagnetic field from spherical harmonic coefficients and the seven
geomagnetic elements derived from it.
"""
import attr
import numpy as np
from numba import jit

from ._legendre import (
    associated_legendre_schmidt,
    associated_legendre_schmidt_derivative,
)
from .constants import (
    DIPOLE_G10,
    DIPOLE_G11,
    DIPOLE_H11,
    GEOMAGNETIC_REFERENCE_RADIUS,
)
from .coordinates import (
    geodetic_to_spherical,
    normalize_longitude,
    vector_spherical_to_geodetic,
)

#: Latitudes closer than this to the poles are rejected by the field evaluator
POLE_GUARD = 1e-6


def _check_coordinate_system(coordinate_system):
    "Raise an error if the coordinate system isn't known"
    if coordinate_system not in ("geodetic", "spherical"):
        raise ValueError(
            "Coordinate system '{}' not recognized. "
            "Use 'geodetic' or 'spherical'.".format(coordinate_system)
        )


def _coefficient_array(value):
    return np.atleast_2d(np.asarray(value, dtype="float64"))


@attr.s(frozen=True, eq=False)
class CoefficientSet:
    """
    Gauss coefficients of a main field model and their secular variation.

    Coefficient arrays are indexed as ``g[n, m]`` and have shape
    ``(max_degree + 1, max_degree + 1)``. Entries with ``n = 0`` or ``m > n``
    are zero. Instances are read-only.

    Parameters
    ----------
    epoch : float
        Reference epoch of the coefficients as a decimal year.
    g, h : 2d-arrays
        Main field coefficients [nT].
    g_dot, h_dot : 2d-arrays
        Secular variation of the coefficients [nT/year].
    name : str
        Name of the model, for example ``"WMM-2020"``.
    reference_radius : float
        Reference radius of the expansion [km].
    validity : float
        Number of years after the epoch for which the model is valid.
    """

    epoch = attr.ib(converter=float)
    g = attr.ib(converter=_coefficient_array)
    h = attr.ib(converter=_coefficient_array)
    g_dot = attr.ib(converter=_coefficient_array)
    h_dot = attr.ib(converter=_coefficient_array)
    name = attr.ib(default="")
    reference_radius = attr.ib(default=GEOMAGNETIC_REFERENCE_RADIUS)
    validity = attr.ib(default=5.0)

    @g.validator
    def _check_g(self, attribute, value):
        "Check that g is square and has at least degree 1"
        if value.ndim != 2 or value.shape[0] != value.shape[1] or value.shape[0] < 2:
            raise ValueError(
                "Invalid coefficient array shape {}. Must be (n + 1, n + 1) with "
                "n >= 1.".format(value.shape)
            )

    def __attrs_post_init__(self):
        for name in ("g", "h", "g_dot", "h_dot"):
            array = getattr(self, name)
            if array.shape != self.g.shape:
                raise ValueError(
                    "Coefficient array '{}' has shape {} but 'g' has shape "
                    "{}.".format(name, array.shape, self.g.shape)
                )
            if not np.all(np.isfinite(array)):
                raise ValueError(
                    "Non-finite values in coefficient array '{}'.".format(name)
                )
        if np.any(self.h[:, 0] != 0) or np.any(self.h_dot[:, 0] != 0):
            raise ValueError("Coefficients h[n, 0] must be zero.")

    @property
    def max_degree(self):
        "The maximum degree of the expansion"
        return self.g.shape[0] - 1

    @classmethod
    def dipole(cls, g10=DIPOLE_G10, g11=0, h11=0, epoch=2020.0, **kwargs):
        """
        Build a degree-one coefficient set (axial or tilted dipole).

        The secular variation is zero and the validity window is unlimited
        unless ``validity`` is passed.

        Examples
        --------

        >>> model = CoefficientSet.dipole()
        >>> print(model.max_degree, model.g[1, 0])
        1 -29404.8

        """
        g = np.zeros((2, 2))
        h = np.zeros((2, 2))
        g[1, 0], g[1, 1], h[1, 1] = g10, g11, h11
        kwargs.setdefault("validity", np.inf)
        kwargs.setdefault("name", "dipole")
        zeros = np.zeros((2, 2))
        return cls(epoch=epoch, g=g, h=h, g_dot=zeros, h_dot=zeros, **kwargs)

    @classmethod
    def tilted_dipole(cls, epoch=2020.0, **kwargs):
        "Degree-one part of the 2020 main field (the tilted dipole)"
        kwargs.setdefault("name", "tilted-dipole")
        return cls.dipole(
            g10=DIPOLE_G10, g11=DIPOLE_G11, h11=DIPOLE_H11, epoch=epoch, **kwargs
        )

    def coefficients(self, date):
        """
        Coefficients advanced linearly to the given date by the secular variation.

        Parameters
        ----------
        date : float
            Decimal year. Must be inside ``[epoch, epoch + validity]``.

        Returns
        -------
        g, h : 2d-arrays
            The coefficients at the given date [nT].
        """
        if not self.epoch <= date <= self.epoch + self.validity:
            raise ValueError(
                "Invalid date {} for model '{}'. The model is only valid between "
                "{} and {}.".format(
                    date, self.name, self.epoch, self.epoch + self.validity
                )
            )
        elapsed = date - self.epoch
        return self.g + elapsed * self.g_dot, self.h + elapsed * self.h_dot


@attr.s(frozen=True)
class GeoPosition:
    """
    A geographic position.

    Parameters
    ----------
    lon : float
        Longitude in degrees east. Normalized to (-180, 180].
    lat : float
        Latitude in degrees north, in [-90, 90].
    alt : float
        Height above the reference surface [km].
    """

    lon = attr.ib(converter=normalize_longitude)
    lat = attr.ib(converter=float)
    alt = attr.ib(default=0.0, converter=float)

    @lat.validator
    def _check_lat(self, attribute, value):
        "Check that the latitude is valid"
        if not -90 <= value <= 90:
            raise ValueError(
                "Invalid latitude {}. Must be in the [-90, 90] interval.".format(value)
            )


@attr.s(frozen=True)
class FieldVector:
    """
    Magnetic field vector in local north, east and down components [nT].
    """

    bx = attr.ib(converter=float)
    by = attr.ib(converter=float)
    bz = attr.ib(converter=float)


@attr.s(frozen=True)
class GeoElements:
    """
    The seven geomagnetic elements at a point.

    Components and intensities are in nT, declination ``d`` and inclination
    ``i`` in degrees.
    """

    bx = attr.ib()
    by = attr.ib()
    bz = attr.ib()
    bh = attr.ib()
    bf = attr.ib()
    d = attr.ib()
    i = attr.ib()


def parse_cof(text):
    """
    Parse the content of a coefficient file in the WMM ``.COF`` format.

    The first non-empty line is the header ``EPOCH MODEL_NAME RELEASE_DATE``.
    Every following line holds ``n m gnm hnm dgnm dhnm`` until a line starting
    with ``9999`` (or the end of the text). Every pair ``(n, m)`` with
    ``1 <= n <= max_degree`` and ``0 <= m <= n`` must appear exactly once.

    Parameters
    ----------
    text : str
        The content of the coefficient file.

    Returns
    -------
    model : :class:`geonav.CoefficientSet`

    Examples
    --------

    >>> text = '''
    ...     2020.0            DIPOLE        12/10/2019
    ...   1  0  -29404.8       0.0        6.7        0.0
    ...   1  1   -1450.9    4652.5        7.7      -25.1
    ... 999999999999999999999999999999999999999999999999
    ... '''
    >>> model = parse_cof(text)
    >>> print(model.epoch, model.name, model.max_degree)
    2020.0 DIPOLE 1

    """
    lines = [
        (number, line.split())
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip()
    ]
    if not lines:
        raise IOError("Empty coefficient file.")
    header_number, header = lines[0]
    try:
        epoch = float(header[0])
    except ValueError:
        raise IOError(
            "Malformed header in line {}: couldn't read the epoch from '{}'.".format(
                header_number, " ".join(header)
            )
        )
    if len(header) < 2:
        raise IOError(
            "Malformed header in line {}: expected "
            "'EPOCH MODEL_NAME RELEASE_DATE'.".format(header_number)
        )
    name = header[1]
    rows = {}
    for number, parts in lines[1:]:
        if parts[0].startswith("9999"):
            break
        if len(parts) < 6:
            raise IOError(
                "Expected 6 columns in line {} but found {}.".format(number, len(parts))
            )
        try:
            degree, order = int(parts[0]), int(parts[1])
            values = [float(value) for value in parts[2:6]]
        except ValueError:
            raise IOError("Non-numeric value in line {}.".format(number))
        if degree < 1 or not 0 <= order <= degree:
            raise IOError(
                "Invalid degree and order ({}, {}) in line {}.".format(
                    degree, order, number
                )
            )
        if (degree, order) in rows:
            raise IOError(
                "Duplicate coefficient ({}, {}) in line {}.".format(
                    degree, order, number
                )
            )
        if order == 0 and (values[1] != 0 or values[3] != 0):
            raise IOError(
                "Coefficient h({}, 0) must be zero in line {}.".format(degree, number)
            )
        rows[(degree, order)] = values
    if not rows:
        raise IOError("No coefficients found in the coefficient file.")
    max_degree = max(degree for degree, _ in rows)
    missing = [
        (n, m)
        for n in range(1, max_degree + 1)
        for m in range(n + 1)
        if (n, m) not in rows
    ]
    if missing:
        raise IOError(
            "Missing coefficient rows for (n, m) = {} in the coefficient file.".format(
                ", ".join("({}, {})".format(*pair) for pair in missing)
            )
        )
    arrays = np.zeros((4, max_degree + 1, max_degree + 1))
    for (n, m), values in rows.items():
        arrays[:, n, m] = values
    return CoefficientSet(
        epoch=epoch,
        g=arrays[0],
        h=arrays[1],
        g_dot=arrays[2],
        h_dot=arrays[3],
        name=name,
    )


def load_cof(fname):
    """
    Read a coefficient file in the WMM ``.COF`` format from disk.

    Parameters
    ----------
    fname : str or :class:`pathlib.Path`
        Path to the coefficient file.

    Returns
    -------
    model : :class:`geonav.CoefficientSet`
    """
    with open(fname) as cof_file:
        return parse_cof(cof_file.read())


def evaluate_field(model, pos, date, coordinate_system="geodetic"):
    """
    Evaluate the main magnetic field of a spherical harmonic model at a point.

    The field is the negative gradient of the potential expansion. The
    coefficients are advanced linearly from the model epoch to ``date`` with
    the secular variation.

    With ``coordinate_system="geodetic"`` (the default) the position is
    taken as geodetic on the WGS84 ellipsoid, converted to geocentric
    spherical coordinates and the resulting vector rotated back to the
    geodetic north and down directions. With ``"spherical"`` the latitude is
    taken as geocentric on a sphere of radius ``reference_radius + alt``.

    Parameters
    ----------
    model : :class:`geonav.CoefficientSet`
        The field model.
    pos : :class:`geonav.GeoPosition`
        Where to evaluate the field.
    date : float
        Decimal year.
    coordinate_system : str
        ``"geodetic"`` or ``"spherical"``.

    Returns
    -------
    field : :class:`geonav.FieldVector`
        North, east and down components [nT].
    """
    _check_coordinate_system(coordinate_system)
    if abs(pos.lat) >= 90 - POLE_GUARD:
        raise ValueError(
            "Can't evaluate the field at latitude {}: the east component is "
            "singular at the geographic poles.".format(pos.lat)
        )
    g, h = model.coefficients(date)
    if coordinate_system == "geodetic":
        _, latitude_sph, radius = geodetic_to_spherical(pos.lon, pos.lat, pos.alt)
    else:
        latitude_sph, radius = pos.lat, model.reference_radius + pos.alt
    b_north_sph, b_east, b_radial = (np.zeros(1) for _ in range(3))
    spherical_harmonics_field(
        np.radians(np.atleast_1d(pos.lon)),
        np.radians(90 - np.atleast_1d(latitude_sph)),
        np.atleast_1d(model.reference_radius / radius),
        g,
        h,
        model.max_degree,
        b_north_sph,
        b_east,
        b_radial,
    )
    vector = (b_north_sph[0], b_east[0], -b_radial[0])
    if coordinate_system == "geodetic":
        vector = vector_spherical_to_geodetic(pos.lat, latitude_sph, vector)
    return FieldVector(*vector)


@jit(nopython=True)
def spherical_harmonics_field(
    longitude,
    colatitude,
    normalized_radius,
    g,
    h,
    max_degree,
    b_north,
    b_east,
    b_radial,
):
    """
    Sum the spherical harmonic expansion of the field in spherical components.

    Angles are in radians and ``normalized_radius`` is the reference radius
    divided by the radius of each point. The outputs are accumulated in
    place.
    """
    for i in range(longitude.size):
        p = np.zeros((max_degree + 1, max_degree + 1))
        p_deriv = np.zeros((max_degree + 1, max_degree + 1))
        associated_legendre_schmidt(np.cos(colatitude[i]), max_degree, p)
        associated_legendre_schmidt_derivative(max_degree, p, p_deriv)
        # cos(m lon) and sin(m lon) through the Chebyshev recursion
        cos_mlon = np.empty(max_degree + 1)
        sin_mlon = np.empty(max_degree + 1)
        cos_mlon[0] = 1
        sin_mlon[0] = 0
        cos_mlon[1] = np.cos(longitude[i])
        sin_mlon[1] = np.sin(longitude[i])
        for m in range(2, max_degree + 1):
            cos_mlon[m] = 2 * cos_mlon[1] * cos_mlon[m - 1] - cos_mlon[m - 2]
            sin_mlon[m] = 2 * cos_mlon[1] * sin_mlon[m - 1] - sin_mlon[m - 2]
        r_frac = normalized_radius[i] ** 2
        for n in range(1, max_degree + 1):
            r_frac *= normalized_radius[i]
            for m in range(n + 1):
                harmonic = g[n, m] * cos_mlon[m] + h[n, m] * sin_mlon[m]
                derivative_lon = m * (h[n, m] * cos_mlon[m] - g[n, m] * sin_mlon[m])
                b_east[i] += r_frac * derivative_lon * p[n, m]
                b_north[i] += r_frac * harmonic * p_deriv[n, m]
                b_radial[i] += (n + 1) * r_frac * harmonic * p[n, m]
        b_east[i] *= -1 / np.sin(colatitude[i])


def dipole_field(
    pos, g10=DIPOLE_G10, reference_radius=None, coordinate_system="geodetic"
):
    """
    Closed-form field of an axial dipole.

    Uses the same coordinate handling as :func:`geonav.evaluate_field`, so the
    two agree for a dipole-only coefficient set. Valid everywhere including
    the poles.

    Parameters
    ----------
    pos : :class:`geonav.GeoPosition`
        Where to evaluate the field.
    g10 : float
        The axial dipole coefficient [nT].
    reference_radius : float or None
        Reference radius [km]. Defaults to
        :data:`geonav.constants.GEOMAGNETIC_REFERENCE_RADIUS`.
    coordinate_system : str
        ``"geodetic"`` or ``"spherical"``.

    Returns
    -------
    field : :class:`geonav.FieldVector`

    Examples
    --------

    >>> field = dipole_field(GeoPosition(lon=10, lat=0), coordinate_system="spherical")
    >>> print("{:.1f} {:.1f} {:.1f}".format(field.bx, field.by, field.bz))
    29404.8 0.0 0.0

    """
    _check_coordinate_system(coordinate_system)
    if reference_radius is None:
        reference_radius = GEOMAGNETIC_REFERENCE_RADIUS
    if coordinate_system == "geodetic":
        _, latitude_sph, radius = geodetic_to_spherical(pos.lon, pos.lat, pos.alt)
    else:
        latitude_sph, radius = pos.lat, reference_radius + pos.alt
    colatitude = np.radians(90 - latitude_sph)
    r_cube = (reference_radius / radius) ** 3
    b_north_sph = -g10 * r_cube * np.sin(colatitude)
    b_down_sph = -2 * g10 * r_cube * np.cos(colatitude)
    vector = (b_north_sph, 0.0, b_down_sph)
    if coordinate_system == "geodetic":
        vector = vector_spherical_to_geodetic(pos.lat, latitude_sph, vector)
    return FieldVector(*vector)


def elements_from_field(field):
    """
    Compute the seven geomagnetic elements of a field vector.

    The declination uses the two-argument arctangent so that the quadrant is
    preserved.

    Parameters
    ----------
    field : :class:`geonav.FieldVector`

    Returns
    -------
    elements : :class:`geonav.GeoElements`

    Examples
    --------

    >>> elements = elements_from_field(FieldVector(bx=3, by=4, bz=5))
    >>> print("{:.4f} {:.4f} {:.1f}".format(elements.d, elements.i, elements.bh))
    53.1301 45.0000 5.0

    """
    horizontal = np.hypot(field.bx, field.by)
    if horizontal == 0:
        raise ValueError(
            "Declination is undefined for a field with no horizontal component."
        )
    declination = np.degrees(np.arctan2(field.by, field.bx))
    if declination <= -180:
        declination += 360
    inclination = np.degrees(np.arctan2(field.bz, horizontal))
    total = np.sqrt(field.bx ** 2 + field.by ** 2 + field.bz ** 2)
    return GeoElements(
        bx=field.bx,
        by=field.by,
        bz=field.bz,
        bh=float(horizontal),
        bf=float(total),
        d=float(declination),
        i=float(inclination),
    )


def field_from_elements(elements):
    """
    Rebuild the field vector from the horizontal intensity, total intensity,
    declination and inclination.
    """
    declination = np.radians(elements.d)
    return FieldVector(
        bx=elements.bh * np.cos(declination),
        by=elements.bh * np.sin(declination),
        bz=elements.bf * np.sin(np.radians(elements.i)),
    )


def field_elements(model, pos, date, **kwargs):
    "Evaluate the field model and return the seven elements at the point"
    return elements_from_field(evaluate_field(model, pos, date, **kwargs))


def apply_anomaly(field, anomaly):
    """
    Superimpose a disturbance on a field vector.

    Parameters
    ----------
    field : :class:`geonav.FieldVector`
    anomaly : :class:`geonav.AnomalySample`
        Any object with ``dbx``, ``dby`` and ``dbz`` attributes [nT].

    Returns
    -------
    field : :class:`geonav.FieldVector`
        The disturbed field.

    Examples
    --------

    >>> from geonav import AnomalySample
    >>> field = apply_anomaly(FieldVector(100, 0, 0), AnomalySample(dbx=-3, dby=4))
    >>> print(field.bx, field.by, field.bz)
    97.0 4.0 0.0

    """
    for value in (anomaly.dbx, anomaly.dby, anomaly.dbz):
        if not np.isfinite(value):
            raise ValueError("Non-finite anomaly component {}.".format(value))
    return FieldVector(
        bx=field.bx + anomaly.dbx, by=field.by + anomaly.dby, bz=field.bz + anomaly.dbz
    )
