"""
Spatial gradients of declination and inclination in the local plane.
"""
import attr
import numpy as np

#: Displacements below this along x or y freeze the gradient update [km]
EPSILON_V = 1e-6


@attr.s(frozen=True)
class GradientMatrix:
    """
    The 2x2 gradient of declination and inclination [degrees/km].

    The rows are D and I and the columns are the local x (east) and y (north)
    directions::

        | g_dx  g_dy |
        | g_ix  g_iy |

    Examples
    --------

    >>> g = GradientMatrix.from_array([[1, 2], [3, 4]])
    >>> print(g.g_dy, g.g_ix)
    2.0 3.0
    >>> print(g.as_array())
    [[1. 2.]
     [3. 4.]]

    """

    g_dx = attr.ib(converter=float)
    g_dy = attr.ib(converter=float)
    g_ix = attr.ib(converter=float)
    g_iy = attr.ib(converter=float)

    def __attrs_post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError("Non-finite gradient {}.".format(self.as_array()))

    @classmethod
    def from_array(cls, array):
        "Build the gradient from a 2x2 array"
        array = np.asarray(array, dtype="float64")
        if array.shape != (2, 2):
            raise ValueError("Invalid gradient array shape {}.".format(array.shape))
        return cls(
            g_dx=array[0, 0], g_dy=array[0, 1], g_ix=array[1, 0], g_iy=array[1, 1]
        )

    def as_array(self):
        "The gradient as a 2x2 array"
        return np.array([[self.g_dx, self.g_dy], [self.g_ix, self.g_iy]])

    def min_abs_entry(self):
        "Smallest absolute value among the four entries"
        return float(np.min(np.abs(self.as_array())))

    def min_singular_value(self):
        "Smallest singular value of the matrix"
        return float(np.linalg.svd(self.as_array(), compute_uv=False)[-1])


@attr.s(frozen=True)
class DiSample:
    """
    Declination and inclination [degrees] measured at a point of the local
    plane (x east and y north) [km].
    """

    d = attr.ib(converter=float)
    i = attr.ib(converter=float)
    x = attr.ib(converter=float)
    y = attr.ib(converter=float)


def init_gradient(s0, s1, s2):
    """
    Estimate the gradient from a three-point stencil.

    The first leg (from ``s0`` to ``s1``) gives the x derivatives and the
    second leg (from ``s1`` to ``s2``) gives the y derivatives. The estimate
    is exact for fields that vary linearly along each leg.

    Parameters
    ----------
    s0, s1, s2 : :class:`geonav.DiSample`
        Samples at the start and the end of each leg.

    Returns
    -------
    gradient : :class:`geonav.GradientMatrix`

    Examples
    --------

    >>> s0 = DiSample(d=0, i=0, x=0, y=0)
    >>> s1 = DiSample(d=2, i=1, x=1, y=0)
    >>> s2 = DiSample(d=5, i=0, x=1, y=1)
    >>> print(init_gradient(s0, s1, s2).as_array())
    [[ 2.  3.]
     [ 1. -1.]]

    """
    step_x = s1.x - s0.x
    step_y = s2.y - s1.y
    if step_x == 0 or step_y == 0:
        raise ValueError(
            "Degenerate gradient stencil: the steps along x ({}) and y ({}) must "
            "not be zero.".format(step_x, step_y)
        )
    return GradientMatrix(
        g_dx=(s1.d - s0.d) / step_x,
        g_dy=(s2.d - s1.d) / step_y,
        g_ix=(s1.i - s0.i) / step_x,
        g_iy=(s2.i - s1.i) / step_y,
    )


def fit_gradient(s0, s1, s2):
    """
    Estimate the gradient from two arbitrary consecutive legs.

    Solves :math:`G [\\Delta x_1 \\, \\Delta x_2] = [\\Delta S_1 \\, \\Delta S_2]`
    for the displacements and changes of D and I along the legs ``s0 -> s1``
    and ``s1 -> s2``. When the first leg runs along x and the second along y
    this is :func:`geonav.init_gradient`.

    Examples
    --------

    >>> s0 = DiSample(d=0, i=0, x=0, y=0)
    >>> s1 = DiSample(d=3, i=1, x=1, y=1)
    >>> s2 = DiSample(d=4, i=2, x=1, y=2)
    >>> print(fit_gradient(s0, s1, s2).as_array())
    [[2. 1.]
     [0. 1.]]

    """
    legs = np.array([[s1.x - s0.x, s2.x - s1.x], [s1.y - s0.y, s2.y - s1.y]])
    if legs[1, 0] == 0 and legs[0, 1] == 0:
        return init_gradient(s0, s1, s2)
    changes = np.array([[s1.d - s0.d, s2.d - s1.d], [s1.i - s0.i, s2.i - s1.i]])
    if abs(np.linalg.det(legs)) <= EPSILON_V ** 2:
        raise ValueError(
            "Degenerate gradient stencil: the legs {} and {} are parallel.".format(
                legs[:, 0], legs[:, 1]
            )
        )
    return GradientMatrix.from_array(np.linalg.solve(legs.T, changes.T).T)


def update_gradient(
    g, d_d, d_i, theta, vx, vy, t, epsilon_v=EPSILON_V, form="literal", gain=1.0
):
    r"""
    Update the gradient with the changes of D and I measured over one step.

    The ``"literal"`` form adds the outer product of the measured changes with
    the row vector :math:`(\cos\theta / (v_x t), \sin\theta / (v_y t))`. Note
    that for :math:`v_x = v\cos\theta` and :math:`v_y = v\sin\theta` the row
    reduces to :math:`(1/(vt), 1/(vt))`, so the measured change is added to the
    gradient at every step.

    The ``"secant"`` form corrects the gradient only by the part of the
    change that it doesn't predict:

    .. math::

        G' = G + \kappa \frac{(\Delta S - G \Delta x) \Delta x^T}{|\Delta x|^2}

    where :math:`\Delta x = (v_x t, v_y t)` and :math:`\kappa` is the ``gain``.

    Parameters
    ----------
    g : :class:`geonav.GradientMatrix`
        The current gradient.
    d_d, d_i : float
        Measured change of declination and inclination over the step
        [degrees].
    theta : float
        Heading of the step, counter-clockwise from east [degrees].
    vx, vy : float
        Velocity components of the step [km/h].
    t : float
        Duration of the step [h].
    epsilon_v : float
        Displacements smaller than this freeze the update [km]. The literal
        form needs both components above it. The secant form needs the length
        of the displacement above it.
    form : str
        ``"literal"`` or ``"secant"``.
    gain : float
        Gain of the secant update. Ignored by the literal form.

    Returns
    -------
    gradient : :class:`geonav.GradientMatrix`
        The updated gradient (``g`` itself if frozen).
    frozen : bool
        True if the step was too short to update the gradient.

    Examples
    --------

    >>> g, frozen = update_gradient(
    ...     GradientMatrix(1, 0, 0, 1), d_d=0.1, d_i=0.2, theta=0, vx=1, vy=1, t=1
    ... )
    >>> print(g.as_array(), frozen)
    [[1.1 0. ]
     [0.2 1. ]] False

    """
    step = np.array([vx * t, vy * t], dtype="float64")
    change = np.array([d_d, d_i], dtype="float64")
    if form == "literal":
        if np.any(np.abs(step) <= epsilon_v):
            return g, True
        theta = np.radians(theta)
        row = np.array([np.cos(theta) / step[0], np.sin(theta) / step[1]])
        increment = np.outer(change, row)
    elif form == "secant":
        length2 = step @ step
        if np.sqrt(length2) <= epsilon_v:
            return g, True
        residual = change - g.as_array() @ step
        increment = gain * np.outer(residual, step) / length2
    else:
        raise ValueError(
            "Unknown gradient update form '{}'. Use 'literal' or 'secant'.".format(form)
        )
    return GradientMatrix.from_array(g.as_array() + increment), False
