"""
Schmidt semi-normalized associated Legendre functions and their derivatives.
"""
import numpy as np
from numba import jit


@jit(nopython=True)
def associated_legendre_schmidt(x, max_degree, p):
    """
    Compute Schmidt semi-normalized associated Legendre functions of cos(colatitude).

    Uses the standard three-term recursion in degree for the off-diagonal
    terms and the sectoral recursion for the diagonal. Values with m > n are
    left untouched.

    Parameters
    ----------
    x : float
        Argument of the functions. Must be the cosine of the colatitude.
    max_degree : int
        Maximum degree of the functions.
    p : 2d-array
        Array of shape ``(max_degree + 1, max_degree + 1)`` to be filled in
        place. It must be initialized with zeros.
    """
    sin_colat = np.sqrt(1 - x ** 2)
    p[0, 0] = 1
    if max_degree < 1:
        return
    p[1, 0] = x
    p[1, 1] = sin_colat
    for n in range(2, max_degree + 1):
        p[n, n] = np.sqrt((2 * n - 1) / (2 * n)) * sin_colat * p[n - 1, n - 1]
        for m in range(n):
            p[n, m] = (
                (2 * n - 1) * x * p[n - 1, m]
                - np.sqrt((n - 1) ** 2 - m ** 2) * p[n - 2, m]
            ) / np.sqrt(n ** 2 - m ** 2)


@jit(nopython=True)
def associated_legendre_schmidt_derivative(max_degree, p, p_deriv):
    """
    Derivatives of the Schmidt functions with respect to colatitude.

    Parameters
    ----------
    max_degree : int
        Maximum degree of the functions.
    p : 2d-array
        The functions computed by :func:`associated_legendre_schmidt`.
    p_deriv : 2d-array
        Array of the same shape as ``p`` to be filled in place.
    """
    p_deriv[0, 0] = 0
    for n in range(1, max_degree + 1):
        p_deriv[n, 0] = -np.sqrt(n * (n + 1) / 2) * p[n, 1]
        # P[n, n + 1] is zero by definition
        upper = 0.0
        if n >= 2:
            upper = p[n, 2]
        p_deriv[n, 1] = 0.5 * (
            np.sqrt(2 * n * (n + 1)) * p[n, 0] - np.sqrt((n + 2) * (n - 1)) * upper
        )
        for m in range(2, n + 1):
            upper = 0.0
            if m < n:
                upper = p[n, m + 1]
            p_deriv[n, m] = 0.5 * (
                np.sqrt((n + m) * (n - m + 1)) * p[n, m - 1]
                - np.sqrt((n + m + 1) * (n - m)) * upper
            )
