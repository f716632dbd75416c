from math import comb

import numpy as np
import pytest

from mhessian.domain import Domain
from mhessian.errors import ArgumentError, ConvergenceError
from mhessian.field import RadialFunction, radial_m_hessian
from mhessian.solver import (DirichletProblem, quadratic_coefficient, quotient_solution_residual,
                             solve, solve_grid_newton, solve_radial_ode, solve_radial_quadratic)

DISC = Domain.disc(1.0)
C = 0.5


def quartic(r):
    return (r ** 2 - 1) / 2 + C * (r ** 4 - 1) / 4


def quartic_eigs(r):
    return 1 + 3 * C * r ** 2, 1 + C * r ** 2


@pytest.mark.parametrize("n,m,l,a", [(3, 1, 0, 1 / 3), (3, 2, 1, 1.0), (3, 3, 2, 3.0)])
def test_quadratic_table(n, m, l, a):
    got, w = solve_radial_quadratic(n, m, l)
    assert got == pytest.approx(a, rel=1e-14)
    assert w.values[0] == pytest.approx(-a / 2, rel=1e-14)
    assert w.values[-1] == 0.0
    assert quotient_solution_residual(w, m, l) <= 1e-10


def test_quadratic_coefficient_l0():
    for n in range(2, 7):
        for m in range(1, n + 1):
            assert quadratic_coefficient(n, m, 0) == pytest.approx(comb(n, m) ** (-1 / m))


def test_quadratic_errors():
    with pytest.raises(ArgumentError):
        solve_radial_quadratic(3, 2, 2)
    with pytest.raises(ArgumentError):
        solve_radial_quadratic(3, 4, 0)
    with pytest.raises(ArgumentError):
        solve_radial_quadratic(3, 2, 0, R=0.0)


def test_radial_ode_matches_closed_form():
    for n, m in ((2, 1), (3, 2), (4, 3), (3, 3)):
        sol = solve_radial_ode(n, m, initial=None, N=129,
                               psi=1.0)
        _, w = solve_radial_quadratic(n, m, 0)
        assert np.abs(sol.w.values - w.values).max() <= 1e-8
        assert sol.residual_inf <= 1e-9
        assert sol.admissibility.admissible
        assert sol.w.values.max() <= 1e-12


def test_radial_poisson():
    sol = solve_radial_ode(2, 1, N=65)
    np.testing.assert_allclose(sol.w.values, (sol.w.r ** 2 - 1) / 4, atol=1e-12)


def test_radial_variable_psi():
    sol = solve_radial_ode(3, 2, psi=lambda r: 1 + r ** 2)
    assert sol.residual_inf <= 1e-9 and sol.admissibility.admissible
    T = radial_m_hessian(sol.w, 3, 2).values
    assert np.abs(T - (1 + sol.w.r ** 2))[:-1].max() <= 1e-9


def test_radial_start_from_far_iterate():
    proto = RadialFunction.from_callable(lambda r: 5.0 * (r ** 2 - 1), N=129)
    sol = solve_radial_ode(3, 2, initial=proto)
    _, w = solve_radial_quadratic(3, 2, 0)
    assert np.abs(sol.w.values - w.values).max() <= 1e-8


def test_radial_quotient():
    sol = solve_radial_ode(3, 3, l=1, N=129)
    _, w = solve_radial_quadratic(3, 3, 1)
    assert np.abs(sol.w.values - w.values).max() <= 1e-8


def test_radial_manufactured_second_order():
    errs = []
    for N in (33, 65, 129):
        def psi(r):
            lr, lt = quartic_eigs(r)
            return 2 * lr * lt + lt ** 2
        sol = solve_radial_ode(3, 2, psi=psi, N=N)
        errs.append(np.abs(sol.w.values - quartic(sol.w.r)).max())
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_radial_errors():
    with pytest.raises(ArgumentError):
        solve_radial_ode(3, 2, psi=-1.0)
    with pytest.raises(ArgumentError):
        solve_radial_ode(3, 2, psi=lambda r: r - 0.5)
    with pytest.raises(ConvergenceError):
        solve_radial_ode(3, 2, tol=1e-30)


@pytest.mark.parametrize("l,a", [(0, 1.0), (1, 2.0)])
def test_grid_closed_form(l, a):
    sol = solve_grid_newton(DirichletProblem(DISC, 2, l), 48, 48)
    x, y = sol.w.grid.xy()
    assert np.abs(sol.w.values - a * (x ** 2 + y ** 2 - 1) / 2).max() <= 1e-10
    assert sol.residual_inf <= 1e-7 and sol.admissibility.admissible


def test_grid_laplace():
    sol = solve_grid_newton(DirichletProblem(DISC, 1, 0, psi=lambda x, y: 4.0 + 0 * x), 32, 32)
    x, y = sol.w.grid.xy()
    assert np.abs(sol.w.values - (x ** 2 + y ** 2 - 1)).max() <= 1e-10


@pytest.mark.parametrize("l", [0, 1])
def test_grid_manufactured_second_order(l):
    def psi(x, y):
        lr, lt = quartic_eigs(np.hypot(x, y))
        return lr * lt if l == 0 else lr * lt / (lr + lt)
    errs = []
    for N in (24, 48):
        sol = solve_grid_newton(DirichletProblem(DISC, 2, l, psi), N, N)
        x, y = sol.w.grid.xy()
        errs.append(np.abs(sol.w.values - quartic(np.hypot(x, y))).max())
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_grid_angular_psi_quadratic_tail():
    prob = DirichletProblem(DISC, 2, 0, lambda x, y: 1 + 0.1 * x)
    sol = solve_grid_newton(prob, 32, 32)
    h = [r for r in sol.history if r > 1e-14]
    assert sol.residual_inf <= 1e-7
    # quadratic convergence: e_{k+1} ~ e_k^2 on the tail
    assert np.log(h[-1]) / np.log(h[-2]) > 1.6


def test_grid_uniqueness_three_starts():
    prob = DirichletProblem(DISC, 2, 0, lambda x, y: 1 + 0.1 * x)
    starts = [None, lambda x, y: 2.0 * (x ** 2 + y ** 2 - 1),
              lambda x, y: 0.7 * (x ** 2 + y ** 2 - 1) * (1 + 0.1 * y)]
    sols = [solve_grid_newton(prob, 32, 32, initial=s).w.values for s in starts]
    for s in sols[1:]:
        assert np.abs(s - sols[0]).max() <= 1e-7


def test_grid_scaling():
    mu = 3.0
    for l in (0, 1):
        w1 = solve_grid_newton(DirichletProblem(DISC, 2, l), 24, 24).w
        wm = solve_grid_newton(DirichletProblem(DISC, 2, l, mu ** (2 - l)), 24, 24).w
        assert np.abs(wm.values - mu * w1.values).max() <= 1e-8


def test_ellipse_experimental():
    sol = solve_grid_newton(DirichletProblem(Domain.ellipse(1.5, 1.0), 2, 0), 32, 32)
    x, y = sol.w.grid.xy()
    # exact: quadratic vanishing on the ellipse
    k = (1 / (1.5 ** 2 * 1.0)) ** 0.5
    exact = 0.5 * (x ** 2 / 1.5 ** 2 + y ** 2 - 1) / k
    assert np.abs(sol.w.values - exact).max() <= 1e-8


def test_grid_errors():
    with pytest.raises(ArgumentError):
        solve_grid_newton(DirichletProblem(Domain.ball(3), 2, 0))
    with pytest.raises(ArgumentError):
        DirichletProblem(DISC, 3, 0)
    with pytest.raises(ArgumentError):
        DirichletProblem(DISC, 2, 0, psi=0.0)


def test_quotient_residual_detects_scaling():
    _, w = solve_radial_quadratic(3, 2, 1)
    assert quotient_solution_residual(w.scaled(2.0), 2, 1) > 0.1


def test_solve_dispatch():
    sol = solve(DirichletProblem(Domain.ball(3), 2, 0))
    assert isinstance(sol.w, RadialFunction)
    sol = solve(DirichletProblem(DISC, 2, 0, lambda x, y: 1 + 0.1 * x), N=24)
    assert sol.w.grid.Nr == 24
    assert sol.summary()["branch"] == "negative"


def test_comparison_closed_forms():
    for n in (2, 3, 4):
        for m in range(2, n + 1):
            for l in range(1, m):
                assert quadratic_coefficient(n, m, l) >= quadratic_coefficient(n, m, 0)


def test_convexity_gate(monkeypatch):
    from mhessian import solver
    from mhessian.errors import ConvexityGateError
    monkeypatch.setattr(solver, "is_boundary_m_convex", lambda dom, m: (False, -0.5))
    with pytest.raises(ConvexityGateError):
        DirichletProblem(DISC, 2, 0)
