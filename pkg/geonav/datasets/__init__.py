# pylint: disable=missing-docstring
from .sample_data import fetch_wmm2020, locate_wmm2020
