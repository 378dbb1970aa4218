"""
Spherical interpolators for scattered observatory data.
"""
import numpy as np
import scipy.linalg
from numba import jit
from sklearn.utils.validation import check_is_fitted
import verde as vd
import verde.base as vdb

from .constants import EARTH_RADIUS
from .coordinates import great_circle_distance, haversine_core, normalize_longitude


def _check_geographic(coordinates):
    "Return longitude and latitude as float 1d-arrays"
    longitude, latitude = vdb.n_1d_arrays(coordinates, 2)
    return longitude.astype("float64"), latitude.astype("float64")


def _merge_colocated(longitude, latitude, data):
    """
    Average the data of points at the same location.

    Returns the (longitude, latitude) of the distinct points and their mean
    values, ordered by longitude and then latitude.
    """
    points = np.column_stack([normalize_longitude(longitude), latitude])
    points, inverse = np.unique(points, axis=0, return_inverse=True)
    inverse = np.ravel(inverse)
    counts = np.bincount(inverse)
    means = np.bincount(inverse, weights=data) / counts
    return (points[:, 0].copy(), points[:, 1].copy()), means


class IdwGridder(vdb.BaseGridder):
    r"""
    Inverse distance weighting on the sphere.

    The prediction at a point is the weighted mean of the data with weights
    :math:`w_i = d_i^{-p}` where :math:`d_i` is the great-circle distance to
    the i-th data point. Points that coincide with a data point (closer than
    ``tolerance``) take the value of that data point, so the interpolation is
    exact at the nodes. The weights sum to one and the prediction never leaves
    the range of the data.

    Coordinates are (``longitude``, ``latitude``) in degrees.

    Parameters
    ----------
    power : float
        The power :math:`p` of the inverse distance.
    tolerance : float
        Distance below which a point is considered to be on a data point [km].

    Attributes
    ----------
    nodes_ : tuple of 1d-arrays
        Longitude and latitude of the data points.
    data_ : 1d-array
        The data values.
    region_ : tuple
        The boundaries (``[W, E, S, N]``) of the data.
    """

    def __init__(self, power=2, tolerance=1e-9):
        self.power = power
        self.tolerance = tolerance

    def fit(self, coordinates, data, weights=None):
        """
        Store the data points.

        Parameters
        ----------
        coordinates : tuple of arrays
            Arrays with the longitude and latitude of each data point.
        data : array
            The data values of each data point.
        weights : None
            Not used. Kept for compatibility with the verde gridders.

        Returns
        -------
        self
            Returns this estimator instance for chaining operations.
        """
        coordinates, data, weights = vdb.check_fit_input(coordinates, data, weights)
        self.region_ = vd.get_region(coordinates[:2])
        self.nodes_ = _check_geographic(coordinates)
        self.data_ = np.ravel(data).astype("float64")
        if self.data_.size == 0:
            raise ValueError("Can't fit an interpolator without data.")
        return self

    def predict(self, coordinates):
        """
        Interpolate the data on the given points.

        Parameters
        ----------
        coordinates : tuple of arrays
            Arrays with the longitude and latitude of the points.

        Returns
        -------
        data : array
            The interpolated values, with the shape of the coordinates.
        """
        check_is_fitted(self, ["data_"])
        shape = np.broadcast(*coordinates[:2]).shape
        longitude, latitude = (
            np.radians(np.atleast_1d(i).ravel().astype("float64"))
            for i in np.broadcast_arrays(*coordinates[:2])
        )
        result = np.zeros(longitude.size)
        idw_numba(
            longitude,
            latitude,
            np.radians(self.nodes_[0]),
            np.radians(self.nodes_[1]),
            self.data_,
            self.power,
            self.tolerance / EARTH_RADIUS,
            result,
        )
        return result.reshape(shape)


@jit(nopython=True)
def idw_numba(
    longitude, latitude, node_lon, node_lat, data, power, tolerance, result
):
    """
    Inverse distance weighted means using numba. Angles in radians.
    """
    for i in range(longitude.size):
        weight_sum = 0.0
        value = 0.0
        exact = -1
        for j in range(node_lon.size):
            angle = haversine_core(longitude[i], latitude[i], node_lon[j], node_lat[j])
            if angle <= tolerance:
                exact = j
                break
            weight = angle ** (-power)
            weight_sum += weight
            value += weight * data[j]
        if exact >= 0:
            result[i] = data[exact]
        else:
            result[i] = value / weight_sum


class KrigingGridder(vdb.BaseGridder):
    r"""
    Ordinary Kriging on the sphere with an exponential variogram.

    The semivariogram is

    .. math::

        \gamma(d) = c_0 + s \left(1 - e^{-d / r}\right), \quad d > 0

    with :math:`\gamma(0) = 0`, where :math:`d` is the great-circle distance
    [km], :math:`s` the partial sill, :math:`r` the range and :math:`c_0` the
    nugget. The weights solve the augmented system with a Lagrange multiplier
    that forces them to sum to one. The interpolation is exact at the data
    points. A nugget makes the surface jump there. Data points at the same
    location are merged into one node with their mean value.

    Parameters
    ----------
    sill : None or float
        Partial sill. If None, the variance of the data is used (1 when the
        data are constant).
    length_scale : None or float
        Range of the variogram [km]. If None, a third of the largest distance
        between data points is used (1 km for a single point).
    nugget : float
        Nugget of the variogram.

    Attributes
    ----------
    nodes_ : tuple of 1d-arrays
        Longitude and latitude of the data points.
    data_ : 1d-array
        The data values.
    sill_, length_scale_ : float
        The variogram parameters used.
    region_ : tuple
        The boundaries (``[W, E, S, N]``) of the data.
    """

    def __init__(self, sill=None, length_scale=None, nugget=0.0):
        self.sill = sill
        self.length_scale = length_scale
        self.nugget = nugget

    def fit(self, coordinates, data, weights=None):
        """
        Build and factor the Kriging system for the data points.

        Parameters
        ----------
        coordinates : tuple of arrays
            Arrays with the longitude and latitude of each data point.
        data : array
            The data values of each data point.
        weights : None
            Not used. Kept for compatibility with the verde gridders.

        Returns
        -------
        self
            Returns this estimator instance for chaining operations.
        """
        coordinates, data, weights = vdb.check_fit_input(coordinates, data, weights)
        self.region_ = vd.get_region(coordinates[:2])
        longitude, latitude = _check_geographic(coordinates)
        data = np.ravel(data).astype("float64")
        if data.size == 0:
            raise ValueError("Can't fit an interpolator without data.")
        self.nodes_, self.data_ = _merge_colocated(longitude, latitude, data)
        distances = great_circle_distance(
            self.nodes_[0][:, np.newaxis],
            self.nodes_[1][:, np.newaxis],
            self.nodes_[0][np.newaxis, :],
            self.nodes_[1][np.newaxis, :],
        )
        self.sill_ = self.sill
        if self.sill_ is None:
            self.sill_ = np.var(self.data_) if np.var(self.data_) > 0 else 1.0
        self.length_scale_ = self.length_scale
        if self.length_scale_ is None:
            self.length_scale_ = distances.max() / 3 if distances.max() > 0 else 1.0
        n_data = self.data_.size
        system = np.ones((n_data + 1, n_data + 1))
        system[:n_data, :n_data] = self.variogram(distances)
        system[n_data, n_data] = 0
        self.system_ = scipy.linalg.lu_factor(system)
        return self

    def variogram(self, distance):
        "Evaluate the exponential semivariogram at the given distances [km]"
        distance = np.asarray(distance, dtype="float64")
        gamma = self.nugget + self.sill_ * (1 - np.exp(-distance / self.length_scale_))
        return np.where(distance > 0, gamma, 0.0)

    def predict(self, coordinates):
        """
        Interpolate the data on the given points.

        Parameters
        ----------
        coordinates : tuple of arrays
            Arrays with the longitude and latitude of the points.

        Returns
        -------
        data : array
            The interpolated values, with the shape of the coordinates.
        """
        check_is_fitted(self, ["system_"])
        shape = np.broadcast(*coordinates[:2]).shape
        longitude, latitude = (
            np.atleast_1d(i).ravel().astype("float64")
            for i in np.broadcast_arrays(*coordinates[:2])
        )
        distances = great_circle_distance(
            self.nodes_[0][:, np.newaxis],
            self.nodes_[1][:, np.newaxis],
            longitude[np.newaxis, :],
            latitude[np.newaxis, :],
        )
        rhs = np.ones((self.data_.size + 1, longitude.size))
        rhs[:-1] = self.variogram(distances)
        weights = scipy.linalg.lu_solve(self.system_, rhs)
        return (self.data_ @ weights[:-1]).reshape(shape)
