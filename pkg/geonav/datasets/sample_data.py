"""
Functions to fetch the main field coefficients used by the navigation scenarios.
"""
import os

import pooch

from ..geofield import load_cof

#: Archive with the coefficients of the World Magnetic Model 2020
WMM2020_ARCHIVE = "WMM2020COF.zip"

POOCH = pooch.create(
    path=["~", ".geonav", "data"],
    base_url="https://www.ngdc.noaa.gov/geomag/WMM/data/WMM2020/",
    # The archive is published without a checksum
    registry={WMM2020_ARCHIVE: None},
    env="GEONAV_DATA_DIR",
)


def locate_wmm2020():
    """
    Path of the WMM2020 coefficient file.

    If the environmental variable ``GEONAV_WMM_FILE`` is set, its value is
    returned. Otherwise the official archive is downloaded (if it isn't
    already in the data directory) and unpacked.

    Returns
    -------
    fname : str
        Path to the ``WMM.COF`` file.
    """
    fname = os.environ.get("GEONAV_WMM_FILE")
    if fname:
        if not os.path.isfile(fname):
            raise IOError(
                "GEONAV_WMM_FILE points to '{}', which doesn't exist.".format(fname)
            )
        return fname
    members = POOCH.fetch(WMM2020_ARCHIVE, processor=pooch.Unzip())
    for member in members:
        if member.upper().endswith(".COF"):
            return member
    raise IOError("No coefficient file found in '{}'.".format(WMM2020_ARCHIVE))


def fetch_wmm2020():
    """
    Fetch the coefficients of the World Magnetic Model 2020.

    The model is valid from 2020.0 to 2025.0. If the file isn't already in
    your data directory (or given by ``GEONAV_WMM_FILE``), it will be
    downloaded automatically.

    Returns
    -------
    model : :class:`geonav.CoefficientSet`
        Coefficients up to degree 12 with their secular variation.
    """
    return load_cof(locate_wmm2020())
