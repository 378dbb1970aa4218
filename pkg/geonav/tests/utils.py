"""
Decorators and useful functions for running tests
"""
import os

import pytest

from ..controller import ControllerConfig
from ..navigator import Scenario


def require_numba(function):  # pylint: disable=unused-argument
    """
    Decorator to tell pytest to run the test function only if Numba jit is enabled.

    To disable Numba jit the environmental variable ```NUMBA_DISABLE_JIT``` must be set
    to a value different than 0.

    Use it on tests that evaluate the field or the gridders on many points and would
    take too long in pure Python. Lighter tests of jitted code should use
    ``@pytest.mark.use_numba`` instead so that they run with and without the jit.
    """
    # If NUMBA_DISABLE_JIT is not defined, Numba jit is enabled
    numba_is_disabled = bool(os.environ.get("NUMBA_DISABLE_JIT", default="0") != "0")

    @pytest.mark.use_numba
    @pytest.mark.skipif(numba_is_disabled, reason="Numba jit is disabled")
    def function_wrapper():
        function()

    return function_wrapper


def require_network(function):
    """
    Decorator to run a test only if GEONAV_NETWORK_TESTS is set to a value
    different than 0 (the test downloads data).
    """
    enabled = bool(os.environ.get("GEONAV_NETWORK_TESTS", default="0") != "0")

    @pytest.mark.network
    @pytest.mark.skipif(not enabled, reason="Network tests are disabled")
    def function_wrapper():
        function()

    return function_wrapper


def short_scenario(**kwargs):
    """
    A scenario with a nearby destination that every variant reaches in a few
    dozen steps. The destination lies to the south-east, so the command box is
    signed. Keyword arguments replace the defaults.
    """
    settings = dict(
        start=(152.0, 33.0),
        destination=(152.3, 32.8),
        max_iterations=200,
        noise=0.0,
        controller=ControllerConfig(u_min=(-40, -40), u_max=(40, 40)),
    )
    settings.update(kwargs)
    return Scenario(**settings)


def require_wmm(function):
    """
    Decorator to run a test only if GEONAV_WMM_FILE points to the official
    WMM2020 coefficient file.
    """
    available = bool(os.environ.get("GEONAV_WMM_FILE"))

    @pytest.mark.skipif(not available, reason="GEONAV_WMM_FILE is not set")
    def function_wrapper():
        function()

    return function_wrapper
