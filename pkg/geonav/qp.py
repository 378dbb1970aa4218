"""
Small dense convex quadratic programs of the receding-horizon controllers.

The problems have the form

.. math::

    \\min_u \\tfrac{1}{2} u^T H u + h^T u \\quad \\text{s.t.} \\quad W u \\le w

and are solved with a primal active-set method that returns the Lagrange
multipliers and a KKT residual as an optimality certificate.
"""
import attr
import numpy as np
import scipy.optimize

#: Tolerance on constraint activity and feasibility
FEASIBILITY_TOL = 1e-9


class InfeasibleProblemError(ValueError):
    """
    The constraints of a quadratic program have no common point.

    ``certificate`` is the smallest achievable maximum constraint violation,
    which is positive for an infeasible problem.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class ConvergenceError(RuntimeError):
    """
    The active-set iterations did not converge.

    ``residual`` is the best KKT residual reached.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _float_array(value):
    return np.asarray(value, dtype="float64")


@attr.s(frozen=True, eq=False)
class PredictionMatrices:
    """
    Stacked prediction :math:`\\bar{S} = M S + C \\bar{U}` over the horizon.

    Parameters
    ----------
    m_mat : 2d-array
        The (2N, 2) stack of the powers of the state matrix.
    c_mat : 2d-array
        The (2N, 2N) lower block-triangular input map.
    """

    m_mat = attr.ib(converter=_float_array)
    c_mat = attr.ib(converter=_float_array)

    @property
    def horizon(self):
        "Number of steps of the horizon"
        return self.m_mat.shape[0] // 2


@attr.s(frozen=True, eq=False)
class Bounds:
    """
    Box bounds on the inputs and on the predicted states.

    Each bound is a 2-vector. Defaults are unbounded.
    """

    u_min = attr.ib(default=(-np.inf, -np.inf), converter=_float_array)
    u_max = attr.ib(default=(np.inf, np.inf), converter=_float_array)
    s_min = attr.ib(default=(-np.inf, -np.inf), converter=_float_array)
    s_max = attr.ib(default=(np.inf, np.inf), converter=_float_array)

    def __attrs_post_init__(self):
        for lower, upper in [("u_min", "u_max"), ("s_min", "s_max")]:
            if np.any(getattr(self, lower) > getattr(self, upper)):
                raise ValueError(
                    "Invalid bounds: {} = {} is larger than {} = {}.".format(
                        lower, getattr(self, lower), upper, getattr(self, upper)
                    )
                )


@attr.s(frozen=True, eq=False)
class QpProblem:
    """
    A convex quadratic program in standard form.

    Parameters
    ----------
    h_mat : 2d-array
        Symmetric positive definite Hessian H.
    h_vec : 1d-array
        Linear cost h.
    w_mat : 2d-array
        Inequality matrix W. May have zero rows.
    w_vec : 1d-array
        Inequality bounds w.
    """

    h_mat = attr.ib(converter=_float_array)
    h_vec = attr.ib(converter=_float_array)
    w_mat = attr.ib(converter=_float_array)
    w_vec = attr.ib(converter=_float_array)

    def __attrs_post_init__(self):
        n_vars = self.h_vec.size
        if self.h_mat.shape != (n_vars, n_vars):
            raise ValueError(
                "Hessian shape {} doesn't match {} variables.".format(
                    self.h_mat.shape, n_vars
                )
            )
        if not np.allclose(self.h_mat, self.h_mat.T, rtol=0, atol=1e-10):
            raise ValueError("The Hessian must be symmetric.")
        if self.w_mat.ndim != 2 or self.w_mat.shape != (self.w_vec.size, n_vars):
            raise ValueError(
                "Inequality matrix shape {} doesn't match {} bounds and {} "
                "variables.".format(self.w_mat.shape, self.w_vec.size, n_vars)
            )

    @property
    def n_vars(self):
        "Number of variables"
        return self.h_vec.size

    def objective(self, u):
        "Value of the quadratic cost at u"
        return float(0.5 * u @ self.h_mat @ u + self.h_vec @ u)


@attr.s(frozen=True, eq=False)
class QpSolution:
    """
    Solution of a quadratic program with its optimality certificate.

    Attributes
    ----------
    u_opt : 1d-array
        The minimizer.
    objective : float
        The cost at the minimizer.
    active_set : tuple of int
        Indices of the constraints in the final working set, increasing.
    kkt_residual : float
        KKT residual of the solution (see :func:`geonav.kkt_residual`).
    multipliers : 1d-array
        Lagrange multipliers of all constraints (zero outside the active set).
    iterations : int
        Number of active-set iterations.
    """

    u_opt = attr.ib()
    objective = attr.ib()
    active_set = attr.ib()
    kkt_residual = attr.ib()
    multipliers = attr.ib()
    iterations = attr.ib(default=0)


def build_prediction(a_mat, b_mat, n):
    """
    Stack the state and input matrices over the prediction horizon.

    The input matrix is constant over the horizon so the (i, j) block of C is
    :math:`A^{i-j} B` for :math:`i \\ge j`.

    Parameters
    ----------
    a_mat, b_mat : 2d-arrays
        The 2x2 state and input matrices.
    n : int
        The horizon. Must be at least 1.

    Returns
    -------
    prediction : :class:`geonav.PredictionMatrices`

    Examples
    --------

    >>> pred = build_prediction(np.eye(2), 2 * np.eye(2), n=2)
    >>> print(pred.c_mat)
    [[2. 0. 0. 0.]
     [0. 2. 0. 0.]
     [2. 0. 2. 0.]
     [0. 2. 0. 2.]]

    """
    if n < 1:
        raise ValueError("Invalid horizon {}. Must be at least 1.".format(n))
    a_mat = np.asarray(a_mat, dtype="float64")
    b_mat = np.asarray(b_mat, dtype="float64")
    powers = [np.eye(2)]
    for _ in range(n):
        powers.append(powers[-1] @ a_mat)
    m_mat = np.vstack(powers[1:])
    c_mat = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(i + 1):
            c_mat[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = powers[i - j] @ b_mat
    return PredictionMatrices(m_mat=m_mat, c_mat=c_mat)


def stack_weights(q_weight, f_weight, r_weight, n):
    """
    Block-diagonal stacked weights over the horizon.

    The state weight uses ``q_weight`` for the first N - 1 steps and the
    terminal weight ``f_weight`` for the last one.

    Returns
    -------
    q_bar, r_bar : 2d-arrays
        The (2N, 2N) stacked state and input weights.
    """
    if n < 1:
        raise ValueError("Invalid horizon {}. Must be at least 1.".format(n))
    q_bar = np.zeros((2 * n, 2 * n))
    r_bar = np.zeros((2 * n, 2 * n))
    for i in range(n):
        block = slice(2 * i, 2 * i + 2)
        q_bar[block, block] = f_weight if i == n - 1 else q_weight
        r_bar[block, block] = r_weight
    return q_bar, r_bar


def build_qp(pred, s, s_d, q_weight, r_weight, f_weight, bounds=None, literal=False):
    """
    Build the quadratic program of one receding-horizon step.

    The cost is the weighted distance of the predicted states to the
    reference plus the weighted input energy. With
    :math:`E = M S - \\bar{S}_d`:

    .. math::

        H = 2 (C^T \\bar{Q} C + \\bar{R}), \\quad h = 2 C^T \\bar{Q} E

    ``literal=True`` drops the factor 2 from h. The first 4N rows of the
    constraints bound the inputs (upper bounds then lower bounds) and the
    last 4N rows bound the predicted states. Infinite bounds are kept as
    rows with infinite right-hand sides and never become active.

    Parameters
    ----------
    pred : :class:`geonav.PredictionMatrices`
    s, s_d : 2-vectors
        Current state and reference (D, I) [degrees].
    q_weight, r_weight, f_weight : 2d-arrays
        State, input and terminal 2x2 weights.
    bounds : :class:`geonav.Bounds` or None
        Box bounds. Unbounded if None.
    literal : bool
        Drop the factor 2 of the linear cost.

    Returns
    -------
    problem : :class:`geonav.QpProblem`
    """
    if bounds is None:
        bounds = Bounds()
    n = pred.horizon
    q_bar, r_bar = stack_weights(q_weight, f_weight, r_weight, n)
    c_mat = pred.c_mat
    free = pred.m_mat @ np.asarray(s, dtype="float64")
    error = free - np.tile(np.asarray(s_d, dtype="float64"), n)
    h_mat = 2 * (c_mat.T @ q_bar @ c_mat + r_bar)
    h_mat = (h_mat + h_mat.T) / 2
    h_vec = (1 if literal else 2) * c_mat.T @ q_bar @ error
    identity = np.eye(2 * n)
    w_mat = np.vstack([identity, -identity, c_mat, -c_mat])
    w_vec = np.concatenate(
        [
            np.tile(bounds.u_max, n),
            -np.tile(bounds.u_min, n),
            np.tile(bounds.s_max, n) - free,
            -np.tile(bounds.s_min, n) + free,
        ]
    )
    return QpProblem(h_mat=h_mat, h_vec=h_vec, w_mat=w_mat, w_vec=w_vec)


def soften_state_constraints(problem, n_hard, penalty=1e6):
    """
    Relax the constraints after the first ``n_hard`` rows with a shared slack.

    A slack variable :math:`\\epsilon \\ge 0` is appended to the unknowns. The
    soft rows become :math:`W_i u - \\epsilon \\le w_i` and the cost gains
    :math:`\\tfrac{1}{2} p \\epsilon^2 + p \\epsilon`, where p is the penalty.

    Returns
    -------
    problem : :class:`geonav.QpProblem`
        The relaxed problem with one extra variable (the last one).
    """
    n_vars = problem.n_vars
    n_rows = problem.w_vec.size
    h_mat = np.zeros((n_vars + 1, n_vars + 1))
    h_mat[:n_vars, :n_vars] = problem.h_mat
    h_mat[n_vars, n_vars] = penalty
    h_vec = np.append(problem.h_vec, penalty)
    w_mat = np.zeros((n_rows + 1, n_vars + 1))
    w_mat[:n_rows, :n_vars] = problem.w_mat
    w_mat[n_hard:n_rows, n_vars] = -1
    w_mat[n_rows, n_vars] = -1
    w_vec = np.append(problem.w_vec, 0)
    return QpProblem(h_mat=h_mat, h_vec=h_vec, w_mat=w_mat, w_vec=w_vec)


def kkt_residual(problem, solution):
    """
    Largest violation of the KKT conditions.

    The maximum of the stationarity error
    :math:`\\|H u + h + W^T \\lambda\\|_\\infty`, the primal violation
    :math:`\\max(W u - w)^+`, the dual violation :math:`\\max(-\\lambda)^+` and
    the complementarity :math:`\\max |\\lambda_i (W_i u - w_i)|`.

    Parameters
    ----------
    problem : :class:`geonav.QpProblem`
    solution : :class:`geonav.QpSolution`
        Only ``u_opt`` and ``multipliers`` are used.

    Returns
    -------
    residual : float
    """
    u = np.asarray(solution.u_opt, dtype="float64")
    multipliers = np.asarray(solution.multipliers, dtype="float64")
    if u.size != problem.n_vars or multipliers.size != problem.w_vec.size:
        raise ValueError("Solution dimensions don't match the problem.")
    stationarity = problem.h_mat @ u + problem.h_vec + problem.w_mat.T @ multipliers
    terms = [np.max(np.abs(stationarity), initial=0)]
    if problem.w_vec.size:
        finite = np.isfinite(problem.w_vec)
        slack = problem.w_mat[finite] @ u - problem.w_vec[finite]
        terms.append(max(0.0, np.max(slack, initial=0)))
        terms.append(max(0.0, np.max(-multipliers, initial=0)))
        terms.append(np.max(np.abs(multipliers[finite] * slack), initial=0))
        # Multipliers of rows that can never be active must vanish
        terms.append(np.max(np.abs(multipliers[~finite]), initial=0))
    return float(max(terms))


def _is_feasible(problem, u, tol=FEASIBILITY_TOL):
    return bool(np.all(problem.w_mat @ u <= problem.w_vec + tol))


def _phase_one(problem):
    """
    Find a feasible point by minimizing the largest constraint violation.
    """
    n_vars = problem.n_vars
    finite = np.isfinite(problem.w_vec)
    w_mat, w_vec = problem.w_mat[finite], problem.w_vec[finite]
    # Unknowns are (u, t): minimize t subject to W u - t <= w
    cost = np.zeros(n_vars + 1)
    cost[-1] = 1
    a_ub = np.hstack([w_mat, -np.ones((w_vec.size, 1))])
    bounds = [(None, None)] * n_vars + [(0, None)]
    result = scipy.optimize.linprog(
        cost, A_ub=a_ub, b_ub=w_vec, bounds=bounds, method="highs"
    )
    if result.status != 0:
        raise InfeasibleProblemError(
            "Couldn't find a feasible point: {}".format(result.message)
        )
    violation = result.x[-1]
    if violation > FEASIBILITY_TOL:
        raise InfeasibleProblemError(
            "The constraints are infeasible. The smallest achievable violation "
            "is {:.3e}.".format(violation),
            certificate=violation,
        )
    return result.x[:n_vars]


def _initial_working_set(problem, u):
    "Active constraints in index order, skipping linearly dependent rows"
    working = []
    for index in np.flatnonzero(
        np.abs(problem.w_mat @ u - problem.w_vec) <= FEASIBILITY_TOL
    ):
        if len(working) == problem.n_vars:
            break
        candidate = problem.w_mat[working + [index]]
        if np.linalg.matrix_rank(candidate) == len(working) + 1:
            working.append(int(index))
    return working


def _solve_kkt(h_mat, a_mat, rhs_top, rhs_bottom):
    "Solve the equality-constrained KKT system"
    n_vars = h_mat.shape[0]
    n_active = a_mat.shape[0]
    kkt = np.zeros((n_vars + n_active, n_vars + n_active))
    kkt[:n_vars, :n_vars] = h_mat
    kkt[:n_vars, n_vars:] = a_mat.T
    kkt[n_vars:, :n_vars] = a_mat
    solution = np.linalg.solve(kkt, np.concatenate([rhs_top, rhs_bottom]))
    return solution[:n_vars], solution[n_vars:]


def _make_solution(problem, u, working, iterations):
    "Polish the solution on the working set and compute the certificate"
    multipliers = np.zeros(problem.w_vec.size)
    a_mat = problem.w_mat[working]
    polished, lambdas = _solve_kkt(
        problem.h_mat, a_mat, -problem.h_vec, problem.w_vec[working]
    )
    if _is_feasible(problem, polished):
        u = polished
    else:
        gradient = problem.h_mat @ u + problem.h_vec
        _, lambdas = _solve_kkt(
            problem.h_mat, a_mat, -gradient, np.zeros(len(working))
        )
    multipliers[working] = lambdas
    solution = QpSolution(
        u_opt=u,
        objective=problem.objective(u),
        active_set=tuple(working),
        kkt_residual=0.0,
        multipliers=multipliers,
        iterations=iterations,
    )
    return attr.evolve(solution, kkt_residual=kkt_residual(problem, solution))


def solve_qp(problem, warm_start=None, max_iter=None):
    """
    Solve a strictly convex quadratic program with a primal active-set method.

    The starting point is ``warm_start`` if given and feasible, otherwise the
    origin if feasible, otherwise a point from a linear feasibility problem.
    At every iteration the equality-constrained problem on the working set is
    solved. The constraint with the most negative multiplier leaves the
    working set and the first blocking constraint enters it. Ties go to the
    lowest constraint index. The final point is refined by solving the KKT
    system of the final working set.

    Parameters
    ----------
    problem : :class:`geonav.QpProblem`
    warm_start : None or 1d-array
        Optional starting point.
    max_iter : None or int
        Maximum number of iterations. Defaults to ``10 * (n_vars + n_rows)``.

    Returns
    -------
    solution : :class:`geonav.QpSolution`

    Examples
    --------

    Minimize :math:`u^2/2 - u` with :math:`u \\le 0.5`:

    >>> problem = QpProblem(h_mat=[[1]], h_vec=[-1], w_mat=[[1]], w_vec=[0.5])
    >>> solution = solve_qp(problem)
    >>> print(solution.u_opt, solution.multipliers, solution.active_set)
    [0.5] [0.5] (0,)

    """
    n_vars = problem.n_vars
    if max_iter is None:
        max_iter = 10 * (n_vars + problem.w_vec.size)
    u = None
    if warm_start is not None:
        warm_start = np.asarray(warm_start, dtype="float64")
        if _is_feasible(problem, warm_start):
            u = warm_start.copy()
    if u is None:
        if _is_feasible(problem, np.zeros(n_vars)):
            u = np.zeros(n_vars)
        else:
            u = _phase_one(problem)
    working = _initial_working_set(problem, u)
    best = None
    for iteration in range(1, max_iter + 1):
        gradient = problem.h_mat @ u + problem.h_vec
        step, lambdas = _solve_kkt(
            problem.h_mat, problem.w_mat[working], -gradient, np.zeros(len(working))
        )
        scale = max(1.0, np.max(np.abs(u)))
        if np.max(np.abs(step), initial=0) <= 1e-12 * scale:
            if not working or np.min(lambdas) >= -1e-12:
                return _make_solution(problem, u, working, iteration)
            # Remove the most negative multiplier (argmin picks the lowest index)
            working.pop(int(np.argmin(lambdas)))
            continue
        # Step length limited by the first blocking constraint
        alpha, blocking = 1.0, None
        directional = problem.w_mat @ step
        for index in np.flatnonzero(directional > 0):
            if index in working:
                continue
            gap = problem.w_vec[index] - problem.w_mat[index] @ u
            ratio = max(gap / directional[index], 0.0)
            if ratio < alpha:
                alpha, blocking = ratio, int(index)
        u = u + alpha * step
        if blocking is not None:
            working = sorted(working + [blocking])
        residual = _make_solution(problem, u, working, iteration).kkt_residual
        best = residual if best is None else min(best, residual)
    raise ConvergenceError(
        "Active-set iterations didn't converge in {} iterations. Best KKT residual "
        "{}.".format(max_iter, best),
        residual=best,
    )
