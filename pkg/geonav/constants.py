"""
Fundamental constants used throughout the library.
"""

#: Mean radius of the spherical Earth used for local-plane steps and great-circle
#: distances [km]
EARTH_RADIUS = 6371.0

#: Reference radius of the geomagnetic spherical harmonic models [km]
GEOMAGNETIC_REFERENCE_RADIUS = 6371.2

#: Axial dipole Gauss coefficient :math:`g_1^0` of the 2020 main field [nT]
DIPOLE_G10 = -29404.8

#: Number of seconds in one hour
SECONDS_PER_HOUR = 3600.0

#: Degree-one equatorial Gauss coefficients :math:`g_1^1` and :math:`h_1^1` of the
#: 2020 main field [nT]. Together with :data:`DIPOLE_G10` they define the tilted
#: dipole.
DIPOLE_G11 = -1450.9
DIPOLE_H11 = 4652.5
