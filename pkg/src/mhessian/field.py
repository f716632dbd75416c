"""Discrete functions on balls and discs and their finite-difference calculus.

Two carriers are provided:

* :class:`RadialFunction` -- a profile ``f(r)`` on ``[0, R]`` sampled at
  ``r_i = i R / (N - 1)``.  With ``degree = 0`` it is the radial function
  ``f(|x|)`` on the ball ``B_R`` in ``R^n``; with ``degree = k > 0`` it stands
  for ``f(r) Y(x/|x|)``, ``Y`` a spherical harmonic of degree ``k`` with unit
  mean square on the sphere.  Only quadratic forms against radial weights
  are defined for ``k > 0``.
* :class:`GridFunction2D` -- values on a polar tensor grid over the unit
  disc, mapped affinely onto a disc of radius ``R`` or an ellipse.

Radial derivatives use second-order central differences, closed at the pole
by the parity of the profile and at ``r = R`` by one-sided second-order
stencils.  On the polar grid the angular derivatives are Fourier-spectral
(the grid is periodic in angle), radial derivatives are central, and the
pole is closed by Fourier averages over the first ring.
"""
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from . import kernels
from .domain import Domain
from .errors import ArgumentError
from .symfunc import batch_gradient, batch_traces

RADIAL_MIN_NODES = 9
GRID_MIN_NR = 6
GRID_MIN_NTHETA = 8
POLE_FILTER_SLACK = 2


# ---------------------------------------------------------------------------
# radial profiles

@dataclass(frozen=True, eq=False)
class RadialFunction:
    R: float
    values: np.ndarray
    n: int = 3
    degree: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size < RADIAL_MIN_NODES:
            raise ArgumentError(f"radial profile needs at least {RADIAL_MIN_NODES} nodes")
        if not np.all(np.isfinite(v)):
            raise ArgumentError("radial profile has non-finite values")
        if not self.R > 0:
            raise ArgumentError("radius must be positive")
        if not 2 <= self.n <= 8:
            raise ArgumentError(f"dimension n={self.n} outside [2, 8]")
        if self.degree < 0:
            raise ArgumentError("harmonic degree must be nonnegative")

    @property
    def N(self):
        return self.values.size

    @property
    def h(self):
        return self.R / (self.N - 1)

    @property
    def r(self):
        return np.linspace(0.0, self.R, self.N)

    @property
    def domain(self):
        return Domain.ball(self.n, self.R) if self.n > 2 else Domain.disc(self.R)

    @classmethod
    def from_callable(cls, f, R=1.0, N=129, n=3, degree=0):
        r = np.linspace(0.0, R, N)
        return cls(R=float(R), values=np.asarray(f(r), dtype=float) * np.ones(N), n=n, degree=degree)

    def with_values(self, values):
        return RadialFunction(self.R, values, self.n, self.degree)

    def scaled(self, mu):
        return self.with_values(mu * self.values)

    def same_grid(self, other):
        return (isinstance(other, RadialFunction) and other.N == self.N
                and other.R == self.R and other.n == self.n)

    def interior(self):
        """Slice of nodes strictly inside the ball (pole included)."""
        return slice(0, self.N - 1)

    @property
    def dirichlet(self):
        return self.values[-1:]



@dataclass(frozen=True, eq=False)
class HarmonicSum:
    """Sum of profiles ``f_k(r) Y_k`` with distinct harmonic degrees on one radial grid.

    Distinct spherical harmonics are orthogonal on the sphere, so every
    quadratic form against a radial weight splits into per-degree terms.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ArgumentError("empty harmonic sum")
        first = comps[0]
        for c in comps:
            if not isinstance(c, RadialFunction) or not first.same_grid(c):
                raise ArgumentError("harmonic sum components must share one radial grid")
        degrees = [c.degree for c in comps]
        if len(set(degrees)) != len(degrees):
            raise ArgumentError("harmonic degrees must be distinct")
        object.__setattr__(self, "components", comps)

    @property
    def R(self):
        return self.components[0].R

    @property
    def N(self):
        return self.components[0].N

    @property
    def n(self):
        return self.components[0].n

    @property
    def r(self):
        return self.components[0].r

    @property
    def domain(self):
        return self.components[0].domain

    def component(self, degree):
        for c in self.components:
            if c.degree == degree:
                return c
        return None

    def scaled(self, mu):
        return HarmonicSum(tuple(c.scaled(mu) for c in self.components))

    @property
    def dirichlet(self):
        return np.array([c.values[-1] for c in self.components])

def _radial_diff(f, h, parity):
    """First and second derivatives of a profile; ``parity`` is +1 (even) or -1 (odd)."""
    d1 = np.empty_like(f)
    d2 = np.empty_like(f)
    d1[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    d2[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (h * h)
    ghost = parity * f[1]
    d1[0] = (f[1] - ghost) / (2 * h)
    d2[0] = (f[1] - 2 * f[0] + ghost) / (h * h)
    d1[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    d2[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / (h * h)
    return d1, d2


def radial_derivatives(u: RadialFunction):
    """``(f', f'')`` at every node."""
    return _radial_diff(u.values, u.h, -1 if u.degree % 2 else 1)


def over_r(u: RadialFunction, d1=None):
    """``f / r`` with its limit at the pole."""
    if d1 is None:
        d1, _ = radial_derivatives(u)
    out = np.empty(u.N)
    out[1:] = u.values[1:] / u.r[1:]
    out[0] = d1[0] if u.degree == 1 else 0.0
    return out


def radial_eigenvalues(w: RadialFunction):
    """Hessian eigenvalues of ``w(|x|)``: radial ``w''`` and tangential ``w'/r``."""
    if w.degree:
        raise ArgumentError("Hessian eigenvalues need a radial (degree 0) profile")
    d1, d2 = radial_derivatives(w)
    t = np.empty(w.N)
    t[1:] = d1[1:] / w.r[1:]
    t[0] = d2[0]
    return d2, t


def radial_spectrum(w: RadialFunction, n=None):
    """``(N, n)`` array of Hessian eigenvalues, radial direction first."""
    n = w.n if n is None else n
    lr, lt = radial_eigenvalues(w)
    return np.column_stack([lr] + [lt] * (n - 1))


@dataclass(frozen=True, eq=False)
class HessianField:
    """Per-node symmetric Hessian matrices, shape ``(..., n, n)``."""

    matrices: np.ndarray

    @property
    def n(self):
        return self.matrices.shape[-1]

    def flat(self):
        return self.matrices.reshape(-1, self.n, self.n)

    def traces(self):
        """Trace vectors ``T_0..T_n`` per node, shape ``(..., n+1)``."""
        return batch_traces(self.flat()).reshape(self.matrices.shape[:-2] + (self.n + 1,))

    def gradient(self, p):
        """``dT_p/ds_ij`` per node."""
        return batch_gradient(self.flat(), p).reshape(self.matrices.shape)


def radial_hessian(w: RadialFunction, n=None) -> HessianField:
    lam = radial_spectrum(w, n)
    mats = np.zeros(lam.shape + (lam.shape[1],))
    idx = np.arange(lam.shape[1])
    mats[:, idx, idx] = lam
    return HessianField(mats)


def radial_m_hessian(w: RadialFunction, n=None, m=1) -> RadialFunction:
    """``T_m[w]`` of a radial function, as a profile on the same nodes.

    Uses ``C(n-1, m-1) w'' (w'/r)^(m-1) + C(n-1, m) (w'/r)^m``.
    """
    n = w.n if n is None else n
    if not 0 <= m <= n:
        raise ArgumentError(f"m={m} outside [0, {n}]")
    if m == 0:
        return w.with_values(np.ones(w.N))
    lr, lt = radial_eigenvalues(w)
    vals = comb(n - 1, m - 1) * lr * lt ** (m - 1) + comb(n - 1, m) * lt ** m
    return RadialFunction(w.R, vals, n, 0)


def radial_traces(w: RadialFunction) -> np.ndarray:
    """``T_0..T_n`` at every node, shape ``(N, n+1)``."""
    return kernels.esp(radial_spectrum(w))


def radial_gradient_coeffs(w: RadialFunction, p: int):
    """Eigenvalues of ``dT_p/ds_ij`` at ``w``: ``(radial, tangential)`` per node."""
    N = w.N
    if p == 0:
        return np.zeros(N), np.zeros(N)
    d = kernels.deleted_esp(radial_spectrum(w))
    return d[:, 0, p - 1].copy(), d[:, 1, p - 1].copy() if w.n > 1 else np.zeros(N)


# ---------------------------------------------------------------------------
# polar grids

class PolarGrid:
    """Polar tensor grid on the unit disc mapped by ``(x, y) = (a X, b Y)``.

    Ring ``i`` sits at ``rho_i = i / (Nr - 1)``; ring 0 is the pole and ring
    ``Nr - 1`` the boundary.  Angles are ``theta_j = 2 pi j / Ntheta``.
    """

    def __init__(self, domain: Domain, Nr: int, Ntheta: int):
        if domain.n != 2:
            raise ArgumentError("polar grids live on two-dimensional domains")
        if Nr < GRID_MIN_NR or Ntheta < GRID_MIN_NTHETA:
            raise ArgumentError(f"grid {Nr}x{Ntheta} below stencil minimum "
                                f"{GRID_MIN_NR}x{GRID_MIN_NTHETA}")
        self.domain = domain
        self.Nr = int(Nr)
        self.Ntheta = int(Ntheta)
        self.a, self.b = domain.semi_axes
        self.h = 1.0 / (self.Nr - 1)
        self.rho = np.linspace(0.0, 1.0, self.Nr)
        self.theta = 2 * np.pi * np.arange(self.Ntheta) / self.Ntheta
        self.cos = np.cos(self.theta)
        self.sin = np.sin(self.theta)
        k = np.arange(self.Ntheta // 2 + 1, dtype=float)
        self._ik = 1j * k
        if self.Ntheta % 2 == 0:
            self._ik[-1] = 0.0
        self._kk = -k * k
        # ring i keeps angular modes |k| <= i + 2: a smooth function carries
        # O(rho^k) in mode k, so higher modes near the pole are only roundoff
        self.mode_cap = np.minimum(np.arange(self.Nr) + POLE_FILTER_SLACK, self.Ntheta // 2)
        self.mode_cap[-1] = self.Ntheta // 2
        self._mask = (k[None, :] <= self.mode_cap[:, None]).astype(float)
        self._inv_rho = np.zeros(self.Nr)
        self._inv_rho[1:] = 1.0 / self.rho[1:]

    def __eq__(self, other):
        return (isinstance(other, PolarGrid) and self.domain == other.domain
                and self.Nr == other.Nr and self.Ntheta == other.Ntheta)

    def __hash__(self):
        return hash((self.domain, self.Nr, self.Ntheta))

    def __repr__(self):
        return f"PolarGrid({self.domain!r}, Nr={self.Nr}, Ntheta={self.Ntheta})"

    @property
    def shape(self):
        return (self.Nr, self.Ntheta)

    @property
    def mesh_size(self):
        """Radial spacing in physical units (largest semi-axis)."""
        return max(self.a, self.b) * self.h

    def xy(self):
        X = np.outer(self.rho, self.cos)
        Y = np.outer(self.rho, self.sin)
        return self.a * X, self.b * Y

    def evaluate(self, f) -> "GridFunction2D":
        x, y = self.xy()
        vals = np.asarray(f(x, y), dtype=float) * np.ones(self.shape)
        vals[0] = vals[0, 0]
        return GridFunction2D(self, vals)

    def zeros(self):
        return GridFunction2D(self, np.zeros(self.shape))

    # -- derivatives on the computational disc --------------------------

    def _radial(self, U):
        h = self.h
        Ur = np.zeros_like(U)
        Urr = np.zeros_like(U)
        Ur[1:-1] = (U[2:] - U[:-2]) / (2 * h)
        Urr[1:-1] = (U[2:] - 2 * U[1:-1] + U[:-2]) / (h * h)
        Ur[-1] = (3 * U[-1] - 4 * U[-2] + U[-3]) / (2 * h)
        Urr[-1] = (2 * U[-1] - 5 * U[-2] + 4 * U[-3] - U[-4]) / (h * h)
        return Ur, Urr

    def _dtheta(self, U, order):
        mult = self._ik if order == 1 else self._kk
        return np.fft.irfft(np.fft.rfft(U, axis=1) * mult * self._mask, n=self.Ntheta, axis=1)

    def angular_matrix(self, ring, order):
        """Dense matrix of the filtered angular derivative used on ``ring``."""
        return _angular_matrix(self.Ntheta, int(self.mode_cap[ring]), order)

    def _gradient_ref(self, U):
        Ur, _ = self._radial(U)
        Ut = self._dtheta(U, 1)
        ir = self._inv_rho[:, None]
        gx = self.cos * Ur - self.sin * Ut * ir
        gy = self.sin * Ur + self.cos * Ut * ir
        ring = U[1]
        gx[0] = 2.0 * np.mean(ring * self.cos) / self.h
        gy[0] = 2.0 * np.mean(ring * self.sin) / self.h
        return gx, gy

    def _hessian_ref(self, U):
        h = self.h
        Ur, Urr = self._radial(U)
        Ut = self._dtheta(U, 1)
        Utt = self._dtheta(U, 2)
        Urt = self._dtheta(Ur, 1)
        ir = self._inv_rho[:, None]
        c, s = self.cos, self.sin
        A = Ur * ir + Utt * ir * ir
        B = Urt * ir - Ut * ir * ir
        Hxx = c * c * Urr + s * s * A - 2 * s * c * B
        Hyy = s * s * Urr + c * c * A + 2 * s * c * B
        Hxy = s * c * (Urr - A) + (c * c - s * s) * B
        ring = U[1]
        lap = 4.0 * (ring.mean() - U[0, 0]) / (h * h)
        diff = 8.0 * np.mean(ring * np.cos(2 * self.theta)) / (h * h)
        Hxx[0] = 0.5 * (lap + diff)
        Hyy[0] = 0.5 * (lap - diff)
        Hxy[0] = 4.0 * np.mean(ring * np.sin(2 * self.theta)) / (h * h)
        return Hxx, Hxy, Hyy

    # -- physical derivatives -------------------------------------------

    def gradient(self, U):
        gx, gy = self._gradient_ref(U)
        return np.stack([gx / self.a, gy / self.b], axis=-1)

    def hessian(self, U):
        Hxx, Hxy, Hyy = self._hessian_ref(U)
        a, b = self.a, self.b
        H = np.empty(U.shape + (2, 2))
        H[..., 0, 0] = Hxx / (a * a)
        H[..., 0, 1] = H[..., 1, 0] = Hxy / (a * b)
        H[..., 1, 1] = Hyy / (b * b)
        return H

    def divergence(self, V):
        """Divergence of a vector field ``V`` of shape ``(Nr, Ntheta, 2)``."""
        return self.gradient(V[..., 0])[..., 0] + self.gradient(V[..., 1])[..., 1]


@lru_cache(maxsize=512)
def _angular_matrix(N, cap, order):
    k = np.arange(N // 2 + 1, dtype=float)
    if order == 1:
        mult = 1j * k
        if N % 2 == 0:
            mult[-1] = 0.0
    else:
        mult = -k * k
    mult = mult * (k <= cap)
    # column j is the derivative of the j-th unit vector
    D = np.fft.irfft(mult[:, None] * np.fft.rfft(np.eye(N), axis=0), n=N, axis=0)
    D.setflags(write=False)
    return D


@lru_cache(maxsize=16)
def polar_grid(domain: Domain, Nr: int, Ntheta: int) -> PolarGrid:
    """Cached :class:`PolarGrid` constructor."""
    return PolarGrid(domain, Nr, Ntheta)


@dataclass(frozen=True, eq=False)
class GridFunction2D:
    """Values ``(Nr, Ntheta)`` on a :class:`PolarGrid`; row 0 is the pole."""

    grid: PolarGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ArgumentError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ArgumentError("grid function has non-finite values")
        pole = v[0]
        if np.ptp(pole) > 1e-12 * max(1.0, np.abs(v).max()):
            raise ArgumentError("pole values differ across angles")
        v[0] = pole.mean()
        object.__setattr__(self, "values", v)

    @property
    def dirichlet(self):
        return self.values[-1]

    @property
    def domain(self):
        return self.grid.domain

    @property
    def n(self):
        return 2

    def with_values(self, values):
        return GridFunction2D(self.grid, values)

    def scaled(self, mu):
        return self.with_values(mu * self.values)

    def same_grid(self, other):
        return isinstance(other, GridFunction2D) and other.grid == self.grid

    def interior(self):
        """Slice of rings strictly inside the domain (pole included)."""
        return slice(0, self.grid.Nr - 1)


# ---------------------------------------------------------------------------
# public operations

def grid_hessian(u: GridFunction2D) -> HessianField:
    """Cartesian Hessian at every node of the polar grid."""
    return HessianField(u.grid.hessian(u.values))


def grid_gradient(u: GridFunction2D) -> np.ndarray:
    return u.grid.gradient(u.values)


def hessian_field(u) -> HessianField:
    if isinstance(u, RadialFunction):
        return radial_hessian(u)
    return grid_hessian(u)


def _cofactor_tensor(H, m):
    """``dT_m/ds_ij`` for 2x2 matrices in closed form."""
    G = np.zeros_like(H)
    if m == 1:
        G[..., 0, 0] = G[..., 1, 1] = 1.0
    elif m == 2:
        G[..., 0, 0] = H[..., 1, 1]
        G[..., 1, 1] = H[..., 0, 0]
        G[..., 0, 1] = G[..., 1, 0] = -H[..., 0, 1]
    return G


def _grid_trace(H, m):
    if m == 0:
        return np.ones(H.shape[:-2])
    if m == 1:
        return H[..., 0, 0] + H[..., 1, 1]
    return H[..., 0, 0] * H[..., 1, 1] - H[..., 0, 1] * H[..., 1, 0]


def m_hessian_field(u, m: int):
    """Pointwise ``T_m`` of the discrete Hessian (Laplacian for m=1, determinant for m=n)."""
    if isinstance(u, RadialFunction):
        return radial_m_hessian(u, u.n, m)
    if m not in (0, 1, 2):
        raise ArgumentError(f"m={m} not available on a 2-D grid")
    return u.with_values(_grid_trace(u.grid.hessian(u.values), m))


def gradient_tensor(u, p: int) -> np.ndarray:
    """``T_p^{ij}[u]`` at every node of a grid function, shape ``(Nr, Ntheta, 2, 2)``."""
    return _cofactor_tensor(u.grid.hessian(u.values), p)


RESIDUAL_INNER_RADIUS = 0.25


def residual_region(u):
    """Rings on which the nested-difference residuals are measured.

    Radial functions use every node whose stencil stays off the boundary.  On
    polar grids the polar Hessian carries an ``O(h^2 / rho)`` error, and
    differencing it again gives ``O(h^2 / rho^2)``, which is ``O(1)`` next to
    the pole; the region is therefore the fixed annulus
    ``RESIDUAL_INNER_RADIUS <= rho`` with the last two rings dropped.
    """
    if isinstance(u, RadialFunction):
        return slice(0, u.N - 2)
    Nr = u.grid.Nr
    i0 = int(np.ceil(RESIDUAL_INNER_RADIUS * (Nr - 1)))
    return slice(i0, Nr - 2)


def divergence_identity_residual(u, m: int) -> float:
    """Max-norm of ``T_m[u] - (1/m) d_i(u_j T_m^{ij}[u])`` over :func:`residual_region`."""
    if m < 1:
        raise ArgumentError("identity needs m >= 1")
    region = residual_region(u)
    if isinstance(u, RadialFunction):
        n = u.n
        T = radial_m_hessian(u, n, m).values
        alpha, _ = radial_gradient_coeffs(u, m)
        d1, _ = radial_derivatives(u)
        V = alpha * d1
        dV, _ = _radial_diff(V, u.h, -1)
        div = np.empty(u.N)
        div[1:] = dV[1:] + (n - 1) * V[1:] / u.r[1:]
        div[0] = n * dV[0]
        return float(np.abs(T - div / m)[region].max())
    grid = u.grid
    H = grid.hessian(u.values)
    g = grid.gradient(u.values)
    G = _cofactor_tensor(H, m)
    V = np.einsum("...ij,...j->...i", G, g)
    res = _grid_trace(H, m) - grid.divergence(V) / m
    return float(np.abs(res[region]).max())


def cofactor_divergence_residual(u: GridFunction2D, m: int) -> float:
    """Largest max-norm over ``j`` of ``sum_i d_i T_m^{ij}[u]`` over :func:`residual_region`."""
    if not isinstance(u, GridFunction2D):
        raise ArgumentError("row-divergence residual is defined on 2-D grids")
    grid = u.grid
    G = _cofactor_tensor(grid.hessian(u.values), m)
    region = residual_region(u)
    worst = 0.0
    for j in range(2):
        row = grid.divergence(G[..., :, j])
        worst = max(worst, float(np.abs(row[region]).max()))
    return worst


def graph_curvature(u: GridFunction2D, m: int) -> GridFunction2D:
    """``T_m`` of the Jacobian of ``u_x / sqrt(1 + |u_x|^2)``: the m-curvature of the graph."""
    if m not in (1, 2):
        raise ArgumentError(f"m={m} not available on a 2-D grid")
    grid = u.grid
    g = grid.gradient(u.values)
    W = np.sqrt(1.0 + (g * g).sum(axis=-1))
    v = g / W[..., None]
    J = np.stack([grid.gradient(v[..., 0]), grid.gradient(v[..., 1])], axis=-2)
    if m == 1:
        out = J[..., 0, 0] + J[..., 1, 1]
    else:
        out = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    out[0] = out[0].mean()
    return u.with_values(out)
