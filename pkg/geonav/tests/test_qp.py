"""
Test the quadratic programs of the receding-horizon controller.
"""
import numpy as np
import numpy.testing as npt
import pytest

from ..qp import (
    Bounds,
    ConvergenceError,
    InfeasibleProblemError,
    QpProblem,
    QpSolution,
    build_prediction,
    build_qp,
    kkt_residual,
    soften_state_constraints,
    solve_qp,
    stack_weights,
)

BOX = QpProblem(
    h_mat=2 * np.eye(2),
    h_vec=[-4, 6],
    w_mat=np.vstack([np.eye(2), -np.eye(2)]),
    w_vec=np.ones(4),
)


def test_build_prediction_general():
    "Blocks of C are powers of A times B"
    a_mat = np.array([[1, 0.5], [0, 1]])
    b_mat = np.array([[2, 0], [1, 1]])
    pred = build_prediction(a_mat, b_mat, n=3)
    assert pred.horizon == 3
    npt.assert_allclose(pred.m_mat[4:], a_mat @ a_mat @ a_mat)
    npt.assert_allclose(pred.c_mat[4:, :2], a_mat @ a_mat @ b_mat)
    npt.assert_allclose(pred.c_mat[2:4, 2:4], b_mat)
    npt.assert_allclose(pred.c_mat[:2, 2:], 0)
    with pytest.raises(ValueError):
        build_prediction(a_mat, b_mat, n=0)


def test_stack_weights_terminal():
    "The last block holds the terminal weight"
    q_bar, r_bar = stack_weights(np.eye(2), 5 * np.eye(2), 3 * np.eye(2), n=3)
    npt.assert_allclose(np.diag(q_bar), [1, 1, 1, 1, 5, 5])
    npt.assert_allclose(np.diag(r_bar), 3)


def test_build_qp_cost_and_rows():
    "Hessian, linear cost and constraint layout"
    b_mat = 0.01 * np.eye(2)
    pred = build_prediction(np.eye(2), b_mat, n=2)
    s, s_d = np.array([4.0, 50.0]), np.array([5.0, 49.0])
    bounds = Bounds(u_min=(-40, -40), u_max=(40, 40), s_min=(-10, 10), s_max=(100, 100))
    problem = build_qp(pred, s, s_d, np.eye(2), 10 * np.eye(2), np.eye(2), bounds)
    npt.assert_allclose(
        problem.h_mat, 2 * (pred.c_mat.T @ pred.c_mat + 10 * np.eye(4))
    )
    error = np.tile(s - s_d, 2)
    npt.assert_allclose(problem.h_vec, 2 * pred.c_mat.T @ error)
    assert problem.w_mat.shape == (16, 4)
    npt.assert_allclose(problem.w_vec[:8], 40)
    npt.assert_allclose(problem.w_vec[8:10], [100 - 4, 100 - 50])
    npt.assert_allclose(problem.w_vec[12:14], [10 + 4, -10 + 50])
    literal = build_qp(
        pred, s, s_d, np.eye(2), 10 * np.eye(2), np.eye(2), bounds, literal=True
    )
    npt.assert_allclose(literal.h_vec, problem.h_vec / 2)


def test_qp_problem_invalid():
    "Shapes and symmetry are checked"
    no_rows = np.zeros((0, 2))
    with pytest.raises(ValueError):
        QpProblem(h_mat=[[1, 1], [0, 1]], h_vec=[0, 0], w_mat=no_rows, w_vec=[])
    with pytest.raises(ValueError):
        QpProblem(h_mat=np.eye(3), h_vec=[0, 0], w_mat=no_rows, w_vec=[])
    with pytest.raises(ValueError):
        QpProblem(h_mat=np.eye(2), h_vec=[0, 0], w_mat=np.eye(2), w_vec=[1])
    with pytest.raises(ValueError):
        Bounds(u_min=(1, 1), u_max=(0, 2))


def test_solve_qp_unconstrained():
    "Without constraints the solution is the Newton step"
    h_mat = np.array([[4.0, 1.0], [1.0, 3.0]])
    h_vec = np.array([1.0, -2.0])
    problem = QpProblem(h_mat=h_mat, h_vec=h_vec, w_mat=np.zeros((0, 2)), w_vec=[])
    solution = solve_qp(problem)
    npt.assert_allclose(solution.u_opt, -np.linalg.solve(h_mat, h_vec))
    assert solution.active_set == ()
    assert solution.kkt_residual < 1e-10


def test_solve_qp_box():
    "Both active constraints and their multipliers"
    solution = solve_qp(BOX)
    npt.assert_allclose(solution.u_opt, [1, -1])
    assert solution.active_set == (0, 3)
    npt.assert_allclose(solution.multipliers, [2, 0, 0, 4], atol=1e-10)
    npt.assert_allclose(solution.objective, BOX.objective(np.array([1.0, -1.0])))
    assert solution.kkt_residual < 1e-9


def test_solve_qp_better_than_feasible_points():
    "The solution of a controller problem beats every feasible sample"
    pred = build_prediction(np.eye(2), np.array([[0.02, -0.01], [0.004, 0.03]]), n=2)
    bounds = Bounds(u_min=(-40, -40), u_max=(40, 40), s_min=(-10, 10), s_max=(100, 100))
    problem = build_qp(
        pred, [4.0, 50.0], [9.0, 44.0], np.eye(2), 1e-4 * np.eye(2), np.eye(2), bounds
    )
    solution = solve_qp(problem)
    assert solution.kkt_residual < 1e-8
    assert np.all(problem.w_mat @ solution.u_opt <= problem.w_vec + 1e-9)
    samples = np.random.default_rng(0).uniform(-40, 40, size=(500, 4))
    feasible = [u for u in samples if np.all(problem.w_mat @ u <= problem.w_vec)]
    assert feasible
    for u in feasible:
        assert solution.objective <= problem.objective(u) + 1e-9


def test_solve_qp_warm_start():
    "Infeasible warm starts are ignored, feasible ones give the same solution"
    for warm_start in ([5, 5], [0.5, -0.5], [1, -1]):
        solution = solve_qp(BOX, warm_start=warm_start)
        npt.assert_allclose(solution.u_opt, [1, -1])


def test_solve_qp_origin_infeasible():
    "A feasible start is found when the origin violates the constraints"
    problem = QpProblem(
        h_mat=[[2.0]], h_vec=[-10.0], w_mat=[[-1.0], [1.0]], w_vec=[-2.0, 3.0]
    )
    solution = solve_qp(problem)
    npt.assert_allclose(solution.u_opt, [3])
    assert solution.active_set == (1,)


def test_solve_qp_infeasible():
    "Contradicting constraints raise with a certificate"
    problem = QpProblem(
        h_mat=[[1.0]], h_vec=[0.0], w_mat=[[1.0], [-1.0]], w_vec=[-1.0, -1.0]
    )
    with pytest.raises(InfeasibleProblemError) as error:
        solve_qp(problem)
    npt.assert_allclose(error.value.certificate, 1, rtol=1e-6)


def test_solve_qp_max_iter():
    "Running out of iterations raises with the best residual"
    with pytest.raises(ConvergenceError) as error:
        solve_qp(BOX, max_iter=1)
    assert error.value.residual > 0


def test_soften_state_constraints():
    "A slack variable absorbs the violation of the soft rows"
    problem = QpProblem(
        h_mat=[[1.0]], h_vec=[0.0], w_mat=[[-1.0], [1.0]], w_vec=[-1.0, -1.0]
    )
    soft = soften_state_constraints(problem, n_hard=1, penalty=100.0)
    assert soft.n_vars == 2
    assert soft.w_vec.size == 3
    solution = solve_qp(soft)
    npt.assert_allclose(solution.u_opt, [1, 2], atol=1e-8)


def test_kkt_residual():
    "Zero at the optimum, positive elsewhere, and dimensions are checked"
    exact = QpSolution(
        u_opt=np.array([1.0, -1.0]),
        objective=0,
        active_set=(0, 3),
        kkt_residual=0,
        multipliers=np.array([2.0, 0, 0, 4.0]),
    )
    npt.assert_allclose(kkt_residual(BOX, exact), 0, atol=1e-12)
    wrong = QpSolution(
        u_opt=np.array([0.0, 0.0]),
        objective=0,
        active_set=(),
        kkt_residual=0,
        multipliers=np.zeros(4),
    )
    npt.assert_allclose(kkt_residual(BOX, wrong), 6)
    with pytest.raises(ValueError):
        kkt_residual(BOX, QpSolution([0.0], 0, (), 0, np.zeros(4)))


def _projected_gradient(h_mat, h_vec, lower, upper, n_iter=2000):
    "Minimize over a box with projected gradient steps"
    step = 1 / np.linalg.eigvalsh(h_mat).max()
    u = np.clip(np.zeros(h_vec.size), lower, upper)
    for _ in range(n_iter):
        u = np.clip(u - step * (h_mat @ u + h_vec), lower, upper)
    return u


def test_solve_qp_matches_projected_gradient():
    "200 random box-constrained problems agree with projected gradient"
    rng = np.random.default_rng(3)
    for _ in range(200):
        n_vars = rng.integers(1, 5)
        rotation = np.linalg.qr(rng.normal(size=(n_vars, n_vars)))[0]
        h_mat = rotation @ np.diag(rng.uniform(1, 10, n_vars)) @ rotation.T
        h_mat = (h_mat + h_mat.T) / 2
        h_vec = rng.normal(0, 10, n_vars)
        center = rng.normal(0, 1, n_vars)
        half_width = rng.uniform(0.1, 2, n_vars)
        lower, upper = center - half_width, center + half_width
        problem = QpProblem(
            h_mat=h_mat,
            h_vec=h_vec,
            w_mat=np.vstack([np.eye(n_vars), -np.eye(n_vars)]),
            w_vec=np.concatenate([upper, -lower]),
        )
        solution = solve_qp(problem)
        expected = _projected_gradient(h_mat, h_vec, lower, upper)
        npt.assert_allclose(solution.u_opt, expected, atol=1e-7)
        npt.assert_allclose(
            solution.objective, problem.objective(expected), rtol=1e-9, atol=1e-9
        )
        assert solution.kkt_residual < 1e-8
