"""
The reference ellipsoid of the geodetic positions given to the field models.
"""
import attr


# Read-only so that the datum can't change halfway through a simulation
@attr.s(frozen=True)
class ReferenceEllipsoid:
    """
    Geometry of an oblate ellipsoid of revolution.

    Parameters
    ----------
    name : str
        Short name used in messages, for example ``'WGS84'``.
    semimajor_axis : float
        Equatorial radius [meters].
    inverse_flattening : float
        The reciprocal of the flattening [adimensional].

    Examples
    --------

    >>> print("{:.4f}".format(WGS84.semiminor_axis))
    6356752.3142
    >>> print("{:.11e}".format(WGS84.eccentricity_squared))
    6.69437999014e-03

    """

    name = attr.ib()
    semimajor_axis = attr.ib(converter=float)
    inverse_flattening = attr.ib(converter=float)

    @property
    def flattening(self):
        "(a - b) / a"
        return 1 / self.inverse_flattening

    @property
    def semiminor_axis(self):
        "Polar radius [meters]"
        return self.semimajor_axis * (1 - self.flattening)

    @property
    def eccentricity_squared(self):
        "Square of the first eccentricity, f (2 - f)"
        return self.flattening * (2 - self.flattening)


#: Datum of the World Magnetic Model and of GPS positions
WGS84 = ReferenceEllipsoid(
    name="WGS84", semimajor_axis=6378137, inverse_flattening=298.257223563
)
