"""Hessian integrals, the quotient functional and their variations.

All integrals use product quadrature: the integrand is replaced by its
piecewise-quadratic interpolant in ``r`` and integrated exactly against the
volume density ``r^(n-1) |S^(n-1)|``.  On polar grids the angular direction
uses the trapezoid rule, which is spectrally accurate for periodic data.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .domain import sphere_area
from .errors import ArgumentError, DomainError
from .field import (GridFunction2D, HarmonicSum, RadialFunction, gradient_tensor,
                    m_hessian_field, over_r, radial_derivatives, radial_gradient_coeffs)

ZERO_DATA_TOL = 1e-12
VARIATION_EPS = 1e-4
QUOTIENT_RESIDUAL_GATE = 1e-6
_GAUSS_POINTS = 8


# ---------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodal weights for ``dx``; ``kind`` is ``radial-shell`` or ``polar-tensor``."""

    kind: str
    weights: np.ndarray = field(repr=False)

    def integrate(self, values) -> float:
        v = np.asarray(values, dtype=float)
        if v.shape != self.weights.shape:
            raise ArgumentError(f"integrand shape {v.shape} does not match rule {self.weights.shape}")
        return float(np.sum(self.weights * v))

    @property
    def volume(self):
        return float(self.weights.sum())


@lru_cache(maxsize=64)
def _shell_weights(N: int, power: int) -> np.ndarray:
    """Weights for ``int_0^1 f(r) r^power dr`` on ``N`` uniform nodes."""
    h = 1.0 / (N - 1)
    x, gw = np.polynomial.legendre.leggauss(_GAUSS_POINTS)
    out = np.zeros(N)

    def panel(i0, a, b):
        # quadratic through nodes i0, i0+1, i0+2 integrated over [a, b]
        t = 0.5 * (b - a) * x + 0.5 * (a + b)
        q = 0.5 * (b - a) * gw * t ** power
        nodes = h * np.arange(i0, i0 + 3)
        for j in range(3):
            others = [nodes[k] for k in range(3) if k != j]
            L = (t - others[0]) * (t - others[1]) / ((nodes[j] - others[0]) * (nodes[j] - others[1]))
            out[i0 + j] += np.dot(q, L)

    last = N - 1
    for i in range(0, last - 1, 2):
        panel(i, i * h, (i + 2) * h)
    if last % 2:
        panel(last - 2, (last - 1) * h, last * h)
    out.setflags(write=False)
    return out


def radial_rule(R: float, N: int, n: int) -> QuadratureRule:
    """Rule for radial integrands on the ball ``B_R`` in ``R^n``."""
    w = _shell_weights(int(N), int(n) - 1) * R ** n * sphere_area(n)
    return QuadratureRule("radial-shell", w)


def polar_rule(grid) -> QuadratureRule:
    """Rule on a polar grid: shell weights in ``rho``, trapezoid in angle."""
    wr = _shell_weights(grid.Nr, 1)
    w = np.outer(wr, np.full(grid.Ntheta, 2 * np.pi / grid.Ntheta)) * grid.a * grid.b
    return QuadratureRule("polar-tensor", w)


def quadrature_rule(u) -> QuadratureRule:
    if isinstance(u, GridFunction2D):
        return polar_rule(u.grid)
    if isinstance(u, (RadialFunction, HarmonicSum)):
        return radial_rule(u.R, u.N, u.n)
    raise ArgumentError(f"no quadrature rule for {type(u).__name__}")


def integrate(u, values=None) -> float:
    """``int values dx`` on the grid of ``u`` (``values`` defaults to ``u`` itself)."""
    if values is None:
        if isinstance(u, HarmonicSum):
            c = u.component(0)
            return 0.0 if c is None else integrate(c)
        if isinstance(u, RadialFunction) and u.degree:
            return 0.0
        values = u.values
    return quadrature_rule(u).integrate(values)


# ---------------------------------------------------------------------------
# functionals

@dataclass(frozen=True)
class FunctionalValue:
    name: str
    value: float
    m: int
    l: Optional[int] = None
    grid: dict = field(default_factory=dict)
    admissible: Optional[bool] = None

    def to_dict(self):
        return {"name": self.name, "value": self.value, "m": self.m, "l": self.l,
                "grid": dict(self.grid), "admissible": self.admissible}


def grid_spec(u) -> dict:
    if isinstance(u, GridFunction2D):
        g = u.grid
        return {"kind": "polar", "domain": g.domain.to_dict(), "Nr": g.Nr, "Ntheta": g.Ntheta}
    return {"kind": "radial", "n": u.n, "R": u.R, "N": u.N}


def _check_same_grid(u, v):
    if isinstance(u, HarmonicSum):
        u = u.components[0]
    if isinstance(v, HarmonicSum):
        v = v.components[0]
    ok = (u.same_grid(v) if isinstance(u, GridFunction2D)
          else isinstance(v, RadialFunction) and (u.N, u.R, u.n) == (v.N, v.R, v.n))
    if not ok:
        raise ArgumentError("functions live on different grids")


def _require_zero_data(u, what="u"):
    if isinstance(u, HarmonicSum):
        for c in u.components:
            _require_zero_data(c, what)
        return
    size = max(1.0, float(np.abs(u.values).max()))
    if np.abs(u.dirichlet).max() > ZERO_DATA_TOL * size:
        raise ArgumentError(f"{what} must vanish on the boundary")


def _require_scalar_field(u):
    if isinstance(u, HarmonicSum) or (isinstance(u, RadialFunction) and u.degree):
        raise ArgumentError("nonlinear functionals need a radial profile or a 2-D grid function")


def hessian_integral(u, m: int) -> float:
    """``I_m[u] = int (-u) T_m[u] dx``; ``u`` must vanish on the boundary."""
    _require_scalar_field(u)
    _require_zero_data(u)
    if m < 0 or m > u.n:
        raise ArgumentError(f"m={m} outside [0, {u.n}]")
    T = m_hessian_field(u, m).values
    return integrate(u, -u.values * T)


def hessian_integral_value(u, m: int) -> FunctionalValue:
    """:func:`hessian_integral` tagged with provenance and an admissibility flag."""
    from .cones import grid_admissibility
    adm = grid_admissibility(u, m).admissible if m >= 1 else None
    return FunctionalValue("I_m", hessian_integral(u, m), m, None, grid_spec(u), adm)


def functional_J(u, m: int, l: int) -> float:
    """``J_{m,l}[u] = I_m[u]^(1/(m+1)) / I_l[u]^(1/(l+1))``."""
    if not 0 <= l < m:
        raise ArgumentError(f"need 0 <= l < m, got l={l}, m={m}")
    Im = hessian_integral(u, m)
    Il = hessian_integral(u, l)
    if Il <= 0:
        raise DomainError(f"I_{l}[u] = {Il:.3e} is not positive")
    if Im < 0:
        raise DomainError(f"I_{m}[u] = {Im:.3e} is negative")
    return Im ** (1.0 / (m + 1)) / Il ** (1.0 / (l + 1))


# ---------------------------------------------------------------------------
# quadratic forms

def _radial_form(u, v, alpha, beta, w):
    """``int T^{ij} u_i v_j dx`` for radial weight eigenvalues ``alpha, beta``."""
    us = u.components if isinstance(u, HarmonicSum) else (u,)
    vs = {c.degree: c for c in (v.components if isinstance(v, HarmonicSum) else (v,))}
    rule = radial_rule(w.R, w.N, w.n)
    total = 0.0
    for f in us:
        g = vs.get(f.degree)
        if g is None:
            continue
        df, _ = radial_derivatives(f)
        dg, _ = radial_derivatives(g)
        integrand = alpha * df * dg
        if f.degree:
            k = f.degree * (f.degree + w.n - 2)
            integrand = integrand + beta * k * over_r(f, df) * over_r(g, dg)
        total += rule.integrate(integrand)
    return total


def weighted_inner_product(u, v, p: int, w) -> float:
    """``<u, v>_p = int T_p^{ij}[w] u_i v_j dx``."""
    _check_same_grid(u, w)
    _check_same_grid(v, w)
    if isinstance(w, GridFunction2D):
        G = gradient_tensor(w, p)
        gu = w.grid.gradient(u.values)
        gv = w.grid.gradient(v.values)
        return integrate(w, np.einsum("...ij,...i,...j->...", G, gu, gv))
    _require_scalar_field(w)
    alpha, beta = radial_gradient_coeffs(w, p)
    return _radial_form(u, v, alpha, beta, w)


def dirichlet_energy(u) -> float:
    """``int |u_x|^2 dx``."""
    base = u.components[0] if isinstance(u, HarmonicSum) else u
    if isinstance(base, RadialFunction):
        # T_1^{ij} is the identity whatever the weight
        base = RadialFunction(base.R, np.zeros(base.N), base.n, 0)
    return weighted_inner_product(u, u, 1, base)


def moment(u, w, m: int) -> float:
    """``int u T_m[w] dx``; only the radial part of ``u`` contributes on a ball."""
    _check_same_grid(u, w)
    T = m_hessian_field(w, m).values
    if isinstance(u, GridFunction2D):
        return integrate(w, u.values * T)
    c = u.component(0) if isinstance(u, HarmonicSum) else (u if u.degree == 0 else None)
    return 0.0 if c is None else integrate(w, c.values * T)


# ---------------------------------------------------------------------------
# variations

def _shift(u, h, t):
    return u.with_values(u.values + t * h.values)


def _require_direction(u, h):
    _check_same_grid(u, h)
    _require_zero_data(h, "direction h")
    _require_scalar_field(h)


def first_variation_I(u, h, m: int, eps: float = VARIATION_EPS):
    """First variation of ``I_m`` at ``u`` in direction ``h`` along two paths.

    Returns
    -------
    direct : float
        Symmetric difference ``(I(u + eps h) - I(u - eps h)) / (2 eps)``.
    identity : float
        ``-(m + 1) int h T_m[u] dx``.
    """
    _require_direction(u, h)
    direct = (hessian_integral(_shift(u, h, eps), m)
              - hessian_integral(_shift(u, h, -eps), m)) / (2 * eps)
    identity = -(m + 1) * moment(h, u, m)
    return direct, identity


def second_variation_I(u, h, m: int) -> float:
    """``(m + 1) int T_m^{ij}[u] h_i h_j dx``."""
    _check_same_grid(h, u)
    return (m + 1) * weighted_inner_product(h, h, m, u)


def second_variation_I_numeric(u, h, m: int, eps: float = VARIATION_EPS) -> float:
    """Second difference of ``t -> I_m[u + t h]`` at ``t = 0``."""
    _require_direction(u, h)
    Ip = hessian_integral(_shift(u, h, eps), m)
    I0 = hessian_integral(u, m)
    Im = hessian_integral(_shift(u, h, -eps), m)
    return (Ip - 2 * I0 + Im) / (eps * eps)


def second_variation_J(w, h, m: int, l: int) -> float:
    """Second variation of ``J_{m,l}`` at a quotient solution ``w``."""
    from .solver import quotient_solution_residual
    res = quotient_solution_residual(w, m, l)
    if res > QUOTIENT_RESIDUAL_GATE:
        raise ArgumentError(f"w is not a quotient solution (residual {res:.3e})")
    Im = hessian_integral(w, m)
    J = functional_J(w, m, l)
    mom = moment(h, w, m)
    form = weighted_inner_product(h, h, m, w) - weighted_inner_product(h, h, l, w)
    return (J / Im) * ((l - m) / Im * mom * mom + form)
