"""
Test the spherical interpolators.
"""
import numpy as np
import numpy.testing as npt
import pytest
import verde as vd
from sklearn.exceptions import NotFittedError

from ..interpolation import IdwGridder, KrigingGridder

NODES = (
    np.array([145.0, 165.0, 145.0, 165.0, 152.0, 158.0]),
    np.array([27.0, 27.0, 34.0, 34.0, 30.0, 32.5]),
)
DATA = np.array([-10.0, 4.0, 7.0, -2.0, 1.5, 12.0])


@pytest.mark.use_numba
def test_idw_exact_at_nodes():
    "The prediction on a data point is the data value"
    gridder = IdwGridder().fit(NODES, DATA)
    npt.assert_allclose(gridder.predict(NODES), DATA)


@pytest.mark.use_numba
def test_idw_inside_data_range():
    "Weights are positive and sum to one"
    gridder = IdwGridder(power=3).fit(NODES, DATA)
    coordinates = vd.grid_coordinates((145, 165, 27, 34), spacing=0.5)
    predicted = gridder.predict(coordinates)
    assert predicted.shape == coordinates[0].shape
    assert predicted.min() >= DATA.min()
    assert predicted.max() <= DATA.max()


@pytest.mark.use_numba
def test_idw_constant_data():
    "Constant data give a constant field"
    gridder = IdwGridder().fit(NODES, np.full(DATA.size, 3.3))
    npt.assert_allclose(gridder.predict((150.2, 31.1)), 3.3)


@pytest.mark.use_numba
def test_idw_midpoint_of_two_nodes():
    "Equidistant from two points is their mean"
    gridder = IdwGridder().fit(([0.0, 2.0], [0.0, 0.0]), [1.0, 3.0])
    npt.assert_allclose(gridder.predict(([1.0], [0.0])), [2.0])


def test_kriging_exact_at_nodes():
    "Without a nugget the interpolation goes through the data"
    gridder = KrigingGridder().fit(NODES, DATA)
    npt.assert_allclose(gridder.predict(NODES), DATA, atol=1e-8)
    assert gridder.sill_ == pytest.approx(np.var(DATA))


def test_kriging_constant_data():
    "Weights sum to one so constant data are reproduced"
    gridder = KrigingGridder(sill=2.0, length_scale=300.0).fit(
        NODES, np.full(DATA.size, -4.0)
    )
    coordinates = vd.grid_coordinates((146, 164, 28, 33), spacing=2)
    npt.assert_allclose(gridder.predict(coordinates), -4.0)


def test_kriging_variogram():
    "Zero at the origin and rising towards the sill"
    gridder = KrigingGridder(sill=2.0, length_scale=100.0, nugget=0.5).fit(
        NODES, DATA
    )
    gamma = gridder.variogram([0, 100, 1e6])
    npt.assert_allclose(gamma, [0, 0.5 + 2 * (1 - np.exp(-1)), 2.5])


def test_kriging_colocated_stations():
    "Stations at the same place are merged into one node with their mean"
    coordinates = ([150.0, 150.0, 155.0], [30.0, 30.0, 31.0])
    gridder = KrigingGridder().fit(coordinates, [1.0, 3.0, 5.0])
    assert gridder.data_.size == 2
    npt.assert_allclose(gridder.predict(([150.0, 155.0], [30.0, 31.0])), [2, 5])
    assert np.all(np.isfinite(gridder.predict((152.5, 30.5))))


@pytest.mark.parametrize("gridder", [IdwGridder(), KrigingGridder()])
def test_predict_before_fit(gridder):
    "Gridders must be fitted first"
    with pytest.raises(NotFittedError):
        gridder.predict(NODES)
