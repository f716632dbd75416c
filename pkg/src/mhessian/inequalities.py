"""Margin reports for the Poincare-type inequalities of Hessian integrals.

Every check returns an :class:`InequalityReport` whose ``margin`` is
oriented so that ``margin >= 0`` means the inequality holds.  The tolerance
budgets discretization error:

    tol = (C_H * h^2 + C_RES * residual + 1e-10) * max(1, |lhs|, |rhs|)

with ``h`` the mesh size of the extremal and ``residual`` its quotient
equation residual.
"""
from dataclasses import dataclass, field
from math import isfinite
from typing import Optional

import numpy as np

from .cones import grid_admissibility
from .errors import ArgumentError, DomainError
from .field import GridFunction2D, HarmonicSum, RadialFunction, m_hessian_field
from .integrals import (QUOTIENT_RESIDUAL_GATE, _check_same_grid, _require_zero_data,
                        dirichlet_energy, hessian_integral, integrate, moment,
                        weighted_inner_product)
from .solver import quotient_solution_residual

C_H = 0.01
C_RES = 10.0
TOL_FLOOR = 1e-10
INVARIANCE_RTOL = 1e-10


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    margin: float
    verdict: str
    tolerance: float
    m: Optional[int] = None
    l: Optional[int] = None
    inputs: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return {"name": self.name, "m": self.m, "l": self.l, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "tolerance": self.tolerance, "verdict": self.verdict,
                "inputs": dict(self.inputs)}


def mesh_size(w) -> float:
    if isinstance(w, GridFunction2D):
        return w.grid.mesh_size
    if isinstance(w, HarmonicSum):
        w = w.components[0]
    return w.h


def tolerance(w, residual: float, lhs: float, rhs: float) -> float:
    scale = max(1.0, abs(lhs), abs(rhs))
    return (C_H * mesh_size(w) ** 2 + C_RES * residual + TOL_FLOOR) * scale


def _report(name, lhs, rhs, margin, tol, m=None, l=None, inputs=None, extra_ok=True):
    ok = extra_ok and isfinite(margin) and margin >= -tol
    return InequalityReport(name, float(lhs), float(rhs), float(margin),
                            "pass" if ok else "fail", float(tol), m, l, dict(inputs or {}))


def _extremal_residual(w, m, l):
    res = quotient_solution_residual(w, m, l)
    if res > QUOTIENT_RESIDUAL_GATE:
        raise ArgumentError(f"w does not solve T_{m} = T_{l} (residual {res:.3e})")
    return res


def _require_admissible(u, m):
    rep = grid_admissibility(u, m)
    if not rep.admissible:
        raise DomainError(f"u is not {m}-admissible (T_{rep.worst_order} = {rep.worst_value:.3e}"
                          f", sign_ok={rep.sign_ok})")


# ---------------------------------------------------------------------------
# functional inequalities

def check_poincare(u, w, m: int, l: int, inputs=None) -> InequalityReport:
    """``(I_m[u]/I_m[w])^(1/(m+1)) >= (I_l[u]/I_l[w])^(1/(l+1))`` for admissible ``u``."""
    _check_same_grid(u, w)
    res = _extremal_residual(w, m, l)
    _require_admissible(u, m)
    lhs = (hessian_integral(u, m) / hessian_integral(w, m)) ** (1.0 / (m + 1))
    rhs = (hessian_integral(u, l) / hessian_integral(w, l)) ** (1.0 / (l + 1))
    return _report("poincare", lhs, rhs, lhs - rhs, tolerance(w, res, lhs, rhs), m, l, inputs)


def check_isoperimetric(u, w, m: int, l: int, inputs=None) -> InequalityReport:
    """``I_m[u] >= I_m[w] I_l[w]^(-(m+1)/(l+1))`` after scaling ``u`` to ``I_l[u] = 1``.

    For the extremal ``I_m[w] = I_l[w]`` and the right-hand side is
    ``I_m[w]^((l-m)/(l+1))``; keeping both integrals makes the report an
    exact rescaling of :func:`check_poincare`.
    """
    _check_same_grid(u, w)
    res = _extremal_residual(w, m, l)
    _require_admissible(u, m)
    Il = hessian_integral(u, l)
    if Il <= 0:
        raise DomainError(f"I_{l}[u] = {Il:.3e} is not positive")
    mu = Il ** (-1.0 / (l + 1))
    lhs = mu ** (m + 1) * hessian_integral(u, m)
    rhs = hessian_integral(w, m) * hessian_integral(w, l) ** (-(m + 1.0) / (l + 1))
    return _report("isoperimetric", lhs, rhs, lhs - rhs, tolerance(w, res, lhs, rhs), m, l,
                   dict(inputs or {}, scale=mu))


def check_composition(w_ml, w_mp, w_pl, m: int, p: int, l: int, inputs=None) -> InequalityReport:
    """Sharp-constant composition ``c_{m,l} >= c_{m,p} c_{p,l}`` in Hessian-integral form.

    With ``c_{a,b} = J_{a,b}[w_{a,b}]`` this reads

        I_m[w_ml]^(m-l) <= I_m[w_mp]^((l+1)(m-p)/(p+1)) * I_l[w_pl]^((m+1)(p-l)/(p+1))

    and the margin is ``rhs - lhs``.
    """
    if not l < p < m:
        raise ArgumentError(f"need l < p < m, got (m, p, l) = ({m}, {p}, {l})")
    _check_same_grid(w_ml, w_mp)
    _check_same_grid(w_ml, w_pl)
    res = max(_extremal_residual(w_ml, m, l), _extremal_residual(w_mp, m, p),
              _extremal_residual(w_pl, p, l))
    lhs = hessian_integral(w_ml, m) ** (m - l)
    rhs = (hessian_integral(w_mp, m) ** ((l + 1) * (m - p) / (p + 1))
           * hessian_integral(w_pl, l) ** ((m + 1) * (p - l) / (p + 1)))
    return _report("composition", lhs, rhs, rhs - lhs, tolerance(w_ml, res, lhs, rhs), m, l,
                   dict(inputs or {}, p=p))


# ---------------------------------------------------------------------------
# second-variation inequalities

def _anpo_sides(u, w, m, l):
    Im = hessian_integral(w, m)
    mom = moment(u, w, m)
    lhs = (m - l) / Im * mom * mom + (weighted_inner_product(u, u, l, w) if l else 0.0)
    rhs = weighted_inner_product(u, u, m, w)
    return lhs, rhs


def check_anpo(u, w, m: int, l: int, inputs=None) -> InequalityReport:
    """``((m-l)/I_m[w]) (int u T_m[w])^2 + <u,u>_l <= <u,u>_m`` for any ``u`` vanishing on the boundary."""
    _check_same_grid(u, w)
    _require_zero_data(u)
    res = _extremal_residual(w, m, l)
    lhs, rhs = _anpo_sides(u, w, m, l)
    return _report("anpo", lhs, rhs, rhs - lhs, tolerance(w, res, lhs, rhs), m, l, inputs)


def check_zero_l(u, w_m, m: int, inputs=None) -> InequalityReport:
    """``m (int u)^2 <= (int -w_m) <u,u>_m`` where ``T_m[w_m] = 1``."""
    _check_same_grid(u, w_m)
    _require_zero_data(u)
    res = _extremal_residual(w_m, m, 0)
    if np.max(w_m.values) > 1e-12:
        raise ArgumentError("w_m must be nonpositive")
    mean = integrate(u)
    lhs = m * mean * mean
    rhs = integrate(w_m, -w_m.values) * weighted_inner_product(u, u, m, w_m)
    return _report("zero_l", lhs, rhs, rhs - lhs, tolerance(w_m, res, lhs, rhs), m, 0, inputs)


def check_p2(u, w, n: int, inputs=None) -> InequalityReport:
    """Monge-Ampere case ``m = n``, ``l = 1`` written with the Dirichlet energy of ``w``:

        ((n-1)/int|w_x|^2) (int u Laplace(w))^2 + int|u_x|^2 <= int cof(w_xx)_ij u_i u_j
    """
    if w.n != n:
        raise ArgumentError(f"w lives in dimension {w.n}, not {n}")
    _check_same_grid(u, w)
    _require_zero_data(u)
    res = _extremal_residual(w, n, 1)
    energy = dirichlet_energy(w)
    mom = moment(u, w, 1)
    lhs = (n - 1) / energy * mom * mom + dirichlet_energy(u)
    rhs = weighted_inner_product(u, u, n, w)
    return _report("p2", lhs, rhs, rhs - lhs, tolerance(w, res, lhs, rhs), n, 1, inputs)


def _dilation_terms(u, w, m, l):
    """``(rho_l, rho_m, sigma_l, sigma_m)`` with ``rho_p = <u,w>_p/<w,w>_p``, ``sigma_p = <u,u>_p/<w,w>_p``.

    For ``p = 0`` the form vanishes identically; ``rho_0`` is its limit
    ``int u / int w`` and ``sigma_0`` only appears multiplied by ``l = 0``.
    """
    def rho(p):
        if p == 0:
            return integrate(u) / integrate(w)
        return weighted_inner_product(u, w, p, w) / weighted_inner_product(w, w, p, w)

    def sigma(p):
        if p == 0:
            return 0.0
        return weighted_inner_product(u, u, p, w) / weighted_inner_product(w, w, p, w)

    return rho(l), rho(m), sigma(l), sigma(m)


def check_dilation_invariance(u, w, m: int, l: int, mu: float = 2.0, inputs=None) -> InequalityReport:
    """Dilation form ``(m-l) rho_l rho_m <= m sigma_m - l sigma_l`` evaluated at ``mu w``.

    Replacing ``w`` by ``mu w`` multiplies every ``rho_p`` by ``1/mu`` and
    every ``sigma_p`` by ``1/mu^2``, so both sides scale by ``mu^-2``.  The
    verdict also requires the ``mu``-rescaled terms to match those at
    ``mu = 1`` to ``INVARIANCE_RTOL``.
    """
    if not mu > 0:
        raise ArgumentError("dilation factor must be positive")
    _check_same_grid(u, w)
    _require_zero_data(u)
    res = _extremal_residual(w, m, l)
    base = np.array(_dilation_terms(u, w, m, l))
    wmu = w.scaled(mu)
    terms = np.array(_dilation_terms(u, wmu, m, l))
    rescaled = terms * np.array([mu, mu, mu * mu, mu * mu])
    dev = float(np.abs(rescaled - base).max() / max(np.abs(base).max(), 1e-300))
    rl, rm, sl, sm = terms
    lhs = (m - l) * rl * rm
    rhs = m * sm - l * sl
    tol = tolerance(w, res, lhs, rhs)
    return _report("dilation", lhs, rhs, rhs - lhs, tol, m, l,
                   dict(inputs or {}, mu=mu, invariance_deviation=dev),
                   extra_ok=dev <= INVARIANCE_RTOL)


# ---------------------------------------------------------------------------
# pointwise comparison of extremals

def check_w2(w_ml, w_m0, m: int, l: int, inputs=None) -> InequalityReport:
    """``T_p[w_ml] > 1`` for ``1 <= p <= m-1`` and ``w_ml <= w_m0`` at every node.

    ``lhs`` is the smallest ``T_p[w_ml]`` over interior nodes, ``rhs = 1``;
    the margin is the smaller of ``lhs - 1`` and ``min(w_m0 - w_ml)``.
    """
    if m == 1:
        return _report("w2", 0.0, 0.0, 0.0, TOL_FLOOR, m, l, dict(inputs or {}, vacuous=True))
    if not 1 <= l <= m - 1:
        raise ArgumentError(f"l={l} outside [1, {m - 1}]")
    _check_same_grid(w_ml, w_m0)
    res = max(_extremal_residual(w_ml, m, l), _extremal_residual(w_m0, m, 0))
    tmin = min(float(m_hessian_field(w_ml, p).values[:-1].min()) for p in range(1, m))
    gap = float(np.min(w_m0.values - w_ml.values))
    margin = min(tmin - 1.0, gap)
    tol = tolerance(w_ml, res, tmin, 1.0)
    return _report("w2", tmin, 1.0, margin, tol, m, l,
                   dict(inputs or {}, min_gap=gap, center_ml=float(w_ml.values.flat[0]),
                        center_m0=float(w_m0.values.flat[0])))


# ---------------------------------------------------------------------------
# random test functions

def random_admissible_radial(rng, w, m: int, terms: int = 4, attempts: int = 200):
    """Random radial ``u = sum_k c_k (r^(2k) - R^(2k))`` in the admissible cone of order ``m``."""
    r = w.r / w.R
    for _ in range(attempts):
        c = rng.uniform(-0.3, 1.0, size=terms)
        c[0] = rng.uniform(0.2, 2.0)
        vals = sum(ck * (r ** (2 * k + 2) - 1.0) for k, ck in enumerate(c)) * w.R ** 2
        u = RadialFunction(w.R, vals, w.n)
        if grid_admissibility(u, m).admissible:
            return u
    raise RuntimeError("could not draw an admissible radial function")


def random_harmonic_sum(rng, w, degrees=(0, 1, 2, 3), terms: int = 3) -> HarmonicSum:
    """Random ``sum_k f_k(r) Y_k`` with ``f_k = r^k (1 - r^2) * even polynomial``, zero on the sphere."""
    r = w.r / w.R
    comps = []
    for k in degrees:
        c = rng.uniform(-1.0, 1.0, size=terms)
        poly = sum(ci * r ** (2 * i) for i, ci in enumerate(c))
        comps.append(RadialFunction(w.R, r ** k * (1.0 - r * r) * poly, w.n, k))
    return HarmonicSum(tuple(comps))


def random_grid_function(rng, w, degree: int = 3) -> GridFunction2D:
    """``(1 - rho^2)`` times a random polynomial of total degree ``degree`` on the reference disc."""
    g = w.grid
    X = np.outer(g.rho, g.cos)
    Y = np.outer(g.rho, g.sin)
    poly = np.zeros(g.shape)
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            poly += rng.uniform(-1.0, 1.0) * X ** i * Y ** j
    vals = (1.0 - X * X - Y * Y) * poly
    vals[0] = vals[0, 0]
    vals[-1] = 0.0
    return GridFunction2D(g, vals)


def random_admissible_grid(rng, w, m: int, attempts: int = 200) -> GridFunction2D:
    """Random ``u = (rho^2 - 1)(c + small polynomial)`` filtered for ``m``-admissibility."""
    g = w.grid
    X = np.outer(g.rho, g.cos)
    Y = np.outer(g.rho, g.sin)
    for _ in range(attempts):
        c = rng.uniform(0.3, 2.0)
        p = rng.uniform(-0.25, 0.25, size=5)
        poly = c + p[0] * X + p[1] * Y + p[2] * X * X + p[3] * X * Y + p[4] * Y * Y
        vals = (X * X + Y * Y - 1.0) * poly
        vals[0] = vals[0, 0]
        vals[-1] = 0.0
        u = GridFunction2D(g, vals)
        if grid_admissibility(u, m).admissible:
            return u
    raise RuntimeError("could not draw an admissible grid function")
