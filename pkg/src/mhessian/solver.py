"""Dirichlet solvers for ``T_m[w] = psi T_l[w]`` with zero boundary data.

Three routes are provided: the closed-form quadratic on balls (constant
right-hand side), a damped Newton method for the radial ODE on balls, and a
damped Newton method on polar grids over discs and ellipses (``n = 2``).
All of them return the nonpositive solution.
"""
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Any, Optional

import numpy as np
from scipy.linalg import solve_banded

from .cones import AdmissibilityReport, grid_admissibility, is_boundary_m_convex
from .domain import Domain
from .errors import ArgumentError, ConeExitError, ConvergenceError, ConvexityGateError
from .field import (GridFunction2D, RadialFunction, _cofactor_tensor, _grid_trace,
                    polar_grid, radial_m_hessian)
from .symfunc import m_trace

log = logging.getLogger(__name__)

RADIAL_TOL = 1e-9
GRID_TOL = 1e-7
MAX_NEWTON = 100
MAX_HALVINGS = 30
ARMIJO = 1e-4
CONE_MARGIN = 1e-10


def quadratic_coefficient(n: int, m: int, l: int, psi: float = 1.0) -> float:
    """``a`` such that ``w = a (|x|^2 - R^2)/2`` solves ``T_m = psi T_l`` in ``R^n``."""
    return (psi * comb(n, l) / comb(n, m)) ** (1.0 / (m - l))


def _check_orders(n, m, l):
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= n:
        raise ArgumentError(f"m={m} outside [1, {n}]")
    if not isinstance(l, (int, np.integer)) or not 0 <= l < m:
        raise ArgumentError(f"l={l} outside [0, {m - 1}]")


# ---------------------------------------------------------------------------
# problem and solution records

@dataclass(frozen=True)
class DirichletProblem:
    """``T_m[w] = psi T_l[w]`` in ``domain``, ``w = 0`` on the boundary.

    ``psi`` is a positive constant, a callable (of ``r`` on balls, of
    ``(x, y)`` on 2-D grids) or an array of nodal values.
    """

    domain: Domain
    m: int
    l: int = 0
    psi: Any = 1.0

    def __post_init__(self):
        _check_orders(self.domain.n, self.m, self.l)
        if np.isscalar(self.psi) and not float(self.psi) > 0:
            raise ArgumentError("right-hand side psi must be positive")
        ok, margin = is_boundary_m_convex(self.domain, self.m)
        if not ok:
            raise ConvexityGateError(
                f"boundary {self.m - 1}-curvature reaches {margin:.3e} <= 0: "
                "no admissible function with zero boundary data exists")

    @property
    def n(self):
        return self.domain.n

    @property
    def is_constant(self):
        return np.isscalar(self.psi)


@dataclass(frozen=True)
class DirichletSolution:
    w: Any
    residual_inf: float
    iterations: int
    admissibility: AdmissibilityReport
    branch: str = "negative"
    history: tuple = field(default=(), repr=False)
    a: Optional[float] = None

    def summary(self) -> dict:
        return {"residual_inf": self.residual_inf, "iterations": self.iterations,
                "admissible": self.admissibility.admissible, "branch": self.branch,
                "max_w": float(np.max(self.w.values)), "a": self.a}


def _finish(w, res, it, m, history=(), a=None):
    adm = grid_admissibility(w, m)
    if not adm.admissible:
        raise ConeExitError(f"solution is not {m}-admissible (T_{adm.worst_order} = "
                            f"{adm.worst_value:.3e}); try a finer grid", res, it)
    return DirichletSolution(w, float(res), it, adm, "negative", tuple(history), a)


# ---------------------------------------------------------------------------
# closed form

def solve_radial_quadratic(n: int, m: int, l: int = 0, R: float = 1.0, N: int = 129):
    """Closed-form solution ``w = a (r^2 - R^2)/2`` for ``psi = 1``.

    The profile is substituted back into the radial m-Hessian before it is
    returned.

    Returns
    -------
    a : float
    w : RadialFunction
    """
    if not 2 <= n <= 8:
        raise ArgumentError(f"dimension n={n} outside [2, 8]")
    _check_orders(n, m, l)
    if not R > 0:
        raise ArgumentError("radius must be positive")
    a = quadratic_coefficient(n, m, l)
    w = RadialFunction.from_callable(lambda r: 0.5 * a * (r * r - R * R), R=R, N=N, n=n)
    w.values[-1] = 0.0
    res = quotient_solution_residual(w, m, l)
    if res > 1e-10 * max(1.0, a ** m):
        raise ConvergenceError(f"quadratic ansatz fails substitution check ({res:.3e})", res, 0)
    return a, w


# ---------------------------------------------------------------------------
# residuals

def _psi_nodes(psi, u):
    """Nodal values of the right-hand side on the grid of ``u``."""
    if isinstance(psi, (RadialFunction, GridFunction2D)):
        vals = psi.values
    elif callable(psi):
        if isinstance(u, RadialFunction):
            vals = psi(u.r)
        else:
            x, y = u.grid.xy()
            vals = psi(x, y)
    else:
        vals = psi
    vals = np.asarray(vals, dtype=float) * np.ones(u.values.shape)
    if not np.all(np.isfinite(vals)):
        raise ArgumentError("right-hand side has non-finite values")
    if np.any(vals <= 0):
        raise ArgumentError("right-hand side psi must be positive everywhere")
    return vals


def _traces(w, p):
    if isinstance(w, RadialFunction):
        return radial_m_hessian(w, w.n, p).values
    return _grid_trace(w.grid.hessian(w.values), p)


def quotient_solution_residual(w, m: int, l: int, psi=1.0) -> float:
    """Max-norm of ``T_m[w] - psi T_l[w]`` over interior nodes."""
    _check_orders(w.n, m, l)
    F = _traces(w, m) - _psi_nodes(psi, w) * _traces(w, l)
    return float(np.abs(F[:-1]).max())


def _cone_margin(w, m):
    """Smallest ``T_p`` (``p = 1..m``) over interior nodes."""
    return min(float(_traces(w, p)[:-1].min()) for p in range(1, m + 1))


# ---------------------------------------------------------------------------
# damped Newton driver

def _newton(w, residual, step, m, tol, label):
    """Damped Newton with step halving and a cone safeguard.

    ``residual(w)`` returns the nodal residual, ``step(w, F)`` the Newton
    correction.  A trial step is accepted when the max-norm residual drops
    by the Armijo factor and the iterate stays in the cone.
    """
    F = residual(w)
    res = float(np.abs(F).max())
    history = [res]
    for it in range(MAX_NEWTON + 1):
        if res <= tol:
            return w, res, it, history
        if it == MAX_NEWTON:
            break
        d = step(w, F)
        t, left_cone = 1.0, False
        for _ in range(MAX_HALVINGS + 1):
            trial = w.with_values(w.values + t * d)
            if _cone_margin(trial, m) < CONE_MARGIN:
                left_cone = True
            else:
                Ft = residual(trial)
                rt = float(np.abs(Ft).max())
                if rt <= (1 - ARMIJO * t) * res:
                    break
            t *= 0.5
        else:
            err = ConeExitError if left_cone else ConvergenceError
            raise err(f"{label}: line search failed at residual {res:.3e}", res, it)
        w, F, res = trial, Ft, rt
        history.append(res)
        log.debug("%s: iteration %d step %.3g residual %.3e", label, it + 1, t, res)
    raise ConvergenceError(f"{label}: no convergence after {MAX_NEWTON} steps "
                           f"(residual {res:.3e})", res, MAX_NEWTON)


# ---------------------------------------------------------------------------
# radial ODE

def _radial_system(w, psi, m, l):
    """Residual and tridiagonal Jacobian of the discrete radial equation at interior nodes."""
    n, N, h = w.n, w.N, w.h
    v = w.values
    r = w.r
    lr = np.empty(N - 1)
    lt = np.empty(N - 1)
    lr[1:] = (v[2:] - 2 * v[1:-1] + v[:-2]) / (h * h)
    lt[1:] = (v[2:] - v[:-2]) / (2 * h * r[1:-1])
    s = 2 * (v[1] - v[0]) / (h * h)
    lr[0] = lt[0] = s

    def T(p):
        if p == 0:
            return np.ones(N - 1), np.zeros(N - 1), np.zeros(N - 1), 0.0
        val = comb(n - 1, p - 1) * lr * lt ** (p - 1) + comb(n - 1, p) * lt ** p
        d_r = comb(n - 1, p - 1) * lt ** (p - 1)
        d_t = comb(n - 1, p) * p * lt ** (p - 1)
        if p > 1:
            d_t = d_t + comb(n - 1, p - 1) * (p - 1) * lr * lt ** (p - 2)
        pole = comb(n, p) * p * s ** (p - 1)
        return val, d_r, d_t, pole

    psi_i = psi[:-1]
    Tm, rm, tm, pm = T(m)
    Tl, rl, tl, pl = T(l)
    F = Tm - psi_i * Tl
    dr = rm - psi_i * rl
    dt = tm - psi_i * tl
    # banded storage: row 0 upper, row 1 diagonal, row 2 lower
    ab = np.zeros((3, N - 1))
    inv = np.zeros(N - 1)
    inv[1:] = 1.0 / (2 * h * r[1:-1])
    diag = -2 * dr / (h * h)
    lower = dr / (h * h) - dt * inv
    upper = dr / (h * h) + dt * inv
    dpole = pm - psi_i[0] * pl
    diag[0] = -2 * dpole / (h * h)
    upper[0] = 2 * dpole / (h * h)
    ab[1] = diag
    ab[0, 1:] = upper[:-1]
    ab[2, :-1] = lower[1:]
    return F, ab


def solve_radial_ode(n: int, m: int, psi=1.0, R: float = 1.0, N: int = 129, l: int = 0,
                     tol: float = RADIAL_TOL, initial=None) -> DirichletSolution:
    """Solve the radial equation ``T_m[w] = psi T_l[w]``, ``w'(0) = 0``, ``w(R) = 0``.

    Parameters
    ----------
    psi : float, callable of ``r``, array or RadialFunction
        Positive right-hand side.
    initial : RadialFunction, optional
        Starting iterate; defaults to the quadratic with matching mean ``psi``.
    """
    if not 2 <= n <= 8:
        raise ArgumentError(f"dimension n={n} outside [2, 8]")
    _check_orders(n, m, l)
    proto = RadialFunction(R, np.zeros(N), n)
    psi_v = _psi_nodes(psi, proto)
    if initial is None:
        a = quadratic_coefficient(n, m, l, float(psi_v.mean()))
        w = RadialFunction.from_callable(lambda r: 0.5 * a * (r * r - R * R), R=R, N=N, n=n)
    else:
        if not proto.same_grid(initial):
            raise ArgumentError("initial iterate is on a different grid")
        w = initial
    vals = w.values.copy()
    vals[-1] = 0.0
    w = w.with_values(vals)

    def residual(w):
        return _radial_system(w, psi_v, m, l)[0]

    def step(w, F):
        _, ab = _radial_system(w, psi_v, m, l)
        d = np.zeros(N)
        d[:-1] = -solve_banded((1, 1), ab, F)
        return d

    w, res, it, hist = _newton(w, residual, step, m, tol, "radial Newton")
    if w.values.max() > 1e-12:
        raise ConvergenceError("Newton reached the nonnegative branch", res, it)
    return _finish(w, res, it, m, hist)


# ---------------------------------------------------------------------------
# polar grid Newton

def _grid_residual(w, psi, m, l):
    H = w.grid.hessian(w.values)
    F = _grid_trace(H, m) - psi * _grid_trace(H, l)
    return F, H


def _grid_step(w, F, H, psi, m, l):
    """Newton correction from the linearization ``c^{ij} dw_ij``, ``c = T_m^{ij} - psi T_l^{ij}``.

    The Jacobian is block tridiagonal over rings, with the pole as a single
    extra unknown coupled to ring 1; it is solved by block elimination and a
    scalar Schur complement for the pole.
    """
    g = w.grid
    Nr, Nt, h = g.Nr, g.Ntheta, g.h
    C = _cofactor_tensor(H, m) - psi[..., None, None] * _cofactor_tensor(H, l)
    # coefficients against derivatives on the reference disc
    cxx = C[..., 0, 0] / g.a ** 2
    cxy = C[..., 0, 1] / (g.a * g.b)
    cyy = C[..., 1, 1] / g.b ** 2
    c, s = g.cos, g.sin
    P = cxx * c * c + 2 * cxy * s * c + cyy * s * s
    Qn = cxx * s * s - 2 * cxy * s * c + cyy * c * c
    Sn = -2 * cxx * s * c + 2 * cxy * (c * c - s * s) + 2 * cyy * s * c

    M = Nr - 2  # unknown rings 1..Nr-2
    lower, diag, upper = [], [], []
    for i in range(1, Nr - 1):
        rho = g.rho[i]
        D1 = g.angular_matrix(i, 1)
        D2 = g.angular_matrix(i, 2)
        a_rr = P[i] / (h * h)
        a_r = Qn[i] / (2 * h * rho)
        a_rt = Sn[i] / (2 * h * rho)
        lower.append(np.diag(a_rr - a_r) - a_rt[:, None] * D1)
        diag.append(np.diag(-2 * a_rr) + (Qn[i] / rho ** 2)[:, None] * D2
                    - (Sn[i] / rho ** 2)[:, None] * D1)
        upper.append(np.diag(a_rr + a_r) + a_rt[:, None] * D1)
    # ring 1 sees the pole through a single column
    pole_col = lower[0].sum(axis=1)

    # pole row
    j = 2.0 / (Nt * h * h)
    p00 = -2 * (cxx[0, 0] + cyy[0, 0]) / (h * h)
    prow = (j * (cxx[0, 0] + cyy[0, 0])
            + 2 * j * (cxx[0, 0] - cyy[0, 0]) * np.cos(2 * g.theta)
            + 4 * j * cxy[0, 0] * np.sin(2 * g.theta))

    rhs = -F[1:Nr - 1]
    B = np.zeros((M, Nt, 2))
    B[:, :, 0] = rhs
    B[0, :, 1] = pole_col
    # block elimination for the ring system with two right-hand sides
    Dp = [None] * M
    Bp = np.empty_like(B)
    Dp[0] = diag[0]
    Bp[0] = B[0]
    for k in range(1, M):
        X = np.linalg.solve(Dp[k - 1], np.column_stack([upper[k - 1], Bp[k - 1]]))
        Dp[k] = diag[k] - lower[k] @ X[:, :Nt]
        Bp[k] = B[k] - lower[k] @ X[:, Nt:]
    X = np.empty_like(B)
    X[-1] = np.linalg.solve(Dp[-1], Bp[-1])
    for k in range(M - 2, -1, -1):
        X[k] = np.linalg.solve(Dp[k], Bp[k] - upper[k] @ X[k + 1])
    # rings = Xb - d0 * Xc; pole row: p00 d0 + prow . ring1 = -F0
    d0 = (-F[0, 0] - prow @ X[0, :, 0]) / (p00 - prow @ X[0, :, 1])
    d = np.zeros((Nr, Nt))
    d[0] = d0
    d[1:Nr - 1] = X[:, :, 0] - d0 * X[:, :, 1]
    return d


def _ellipse_ansatz(grid, m, l, psi_mean):
    """Quadratic ``kappa (rho^2 - 1)/2`` on the reference disc with ``T_m / T_l = psi_mean``."""
    D1 = np.diag([1.0 / grid.a ** 2, 1.0 / grid.b ** 2])
    ratio = m_trace(D1, m) / m_trace(D1, l)
    kappa = (psi_mean / ratio) ** (1.0 / (m - l))
    rho2 = grid.rho ** 2
    return np.outer(0.5 * kappa * (rho2 - 1.0), np.ones(grid.Ntheta))


def solve_grid_newton(problem: DirichletProblem, Nr: int = 65, Ntheta: int = 64,
                      tol: float = GRID_TOL, initial=None) -> DirichletSolution:
    """Damped Newton for ``T_m[w] = psi T_l[w]`` on a polar grid (``n = 2``)."""
    dom = problem.domain
    if dom.n != 2:
        raise ArgumentError("the grid solver works on two-dimensional domains")
    m, l = problem.m, problem.l
    if m not in (1, 2) or l not in (0, 1) or l >= m:
        raise ArgumentError(f"(m, l) = ({m}, {l}) not supported on a 2-D grid")
    if dom.kind == "ellipse":
        log.info("ellipse domains are experimental for the grid solver")
    grid = polar_grid(dom, int(Nr), int(Ntheta))
    psi = _psi_nodes(problem.psi, grid.zeros())
    psi[0] = psi[0].mean()
    if initial is None:
        w = GridFunction2D(grid, _ellipse_ansatz(grid, m, l, float(psi.mean())))
    elif callable(initial):
        w = grid.evaluate(initial)
    else:
        if not isinstance(initial, GridFunction2D) or initial.grid != grid:
            raise ArgumentError("initial iterate is on a different grid")
        w = initial
    vals = w.values.copy()
    vals[-1] = 0.0
    w = w.with_values(vals)

    def residual(w):
        F, _ = _grid_residual(w, psi, m, l)
        F = F.copy()
        F[-1] = 0.0
        return F

    def step(w, F):
        _, H = _grid_residual(w, psi, m, l)
        return _grid_step(w, F, H, psi, m, l)

    w, res, it, hist = _newton(w, residual, step, m, tol, "grid Newton")
    if w.values.max() > 1e-12:
        raise ConvergenceError("Newton reached the nonnegative branch", res, it)
    return _finish(w, res, it, m, hist)


# ---------------------------------------------------------------------------
# dispatch

def solve(problem: DirichletProblem, N: int = 129, Ntheta: Optional[int] = None,
          tol: Optional[float] = None) -> DirichletSolution:
    """Solve ``problem`` on a radial grid (balls) or a polar grid (discs, ellipses)."""
    dom = problem.domain
    radial_psi = problem.is_constant or isinstance(problem.psi, RadialFunction)
    if dom.is_round and (dom.n > 2 or radial_psi):
        if not radial_psi and not callable(problem.psi):
            raise ArgumentError("balls with n > 2 need a radial right-hand side")
        return solve_radial_ode(dom.n, problem.m, problem.psi, dom.R, N, problem.l,
                                tol=RADIAL_TOL if tol is None else tol)
    return solve_grid_newton(problem, N, Ntheta or N, tol=GRID_TOL if tol is None else tol)
