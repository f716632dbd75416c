"""Boundary convexity gates and pointwise admissibility of discrete functions."""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .domain import Domain, boundary_curvature, principal_curvatures, sphere_area  # noqa: F401
from .errors import ArgumentError
from .field import (GRID_MIN_NR, GRID_MIN_NTHETA, RADIAL_MIN_NODES, GridFunction2D,
                    RadialFunction, hessian_field)
from .symfunc import CONE_RTOL, batch_traces

BOUNDARY_SAMPLES = 256
ZERO_DATA_TOL = 1e-12


@dataclass(frozen=True)
class CurvatureProfile:
    """Sampled ``k_p`` of the boundary: parameter values, curvatures and their minimum."""

    p: int
    t: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    min_value: float = 0.0

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.values.tolist()))


def curvature_profile(domain: Domain, p: int, samples: int = BOUNDARY_SAMPLES) -> CurvatureProfile:
    """Evaluate ``k_p`` at ``samples`` equally spaced boundary parameters."""
    t = 2 * np.pi * np.arange(samples) / samples
    vals = np.array([boundary_curvature(domain, p, ti) for ti in t])
    return CurvatureProfile(p=p, t=t, values=vals, min_value=float(vals.min()))


def is_boundary_m_convex(domain: Domain, m: int) -> Tuple[bool, float]:
    """Solvability gate: is ``k_{m-1} > 0`` on the whole boundary?

    Returns
    -------
    ok : bool
    margin : float
        Minimum of ``k_{m-1}`` over the sampled boundary.
    """
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= domain.n:
        raise ArgumentError(f"m={m} outside [1, {domain.n}]")
    prof = curvature_profile(domain, m - 1)
    return bool(prof.min_value > 0), prof.min_value


@dataclass(frozen=True)
class AdmissibilityReport:
    m: int
    admissible: bool
    worst_node: tuple
    worst_order: int
    worst_value: float
    max_value: Optional[float] = None
    sign_ok: bool = True

    def to_dict(self):
        return {"m": self.m, "admissible": self.admissible,
                "worst_node": list(self.worst_node), "worst_order": self.worst_order,
                "worst_value": self.worst_value, "max_value": self.max_value,
                "sign_ok": self.sign_ok}


def _interior_traces(u):
    if isinstance(u, RadialFunction):
        if u.degree:
            raise ArgumentError("admissibility is defined for radial (degree 0) profiles")
        if u.N < RADIAL_MIN_NODES:
            raise ArgumentError("radial grid too coarse for the Hessian stencil")
        H = hessian_field(u).matrices[: u.N - 1]
    elif isinstance(u, GridFunction2D):
        g = u.grid
        if g.Nr < GRID_MIN_NR or g.Ntheta < GRID_MIN_NTHETA:
            raise ArgumentError("polar grid too coarse for the Hessian stencil")
        H = hessian_field(u).matrices[: g.Nr - 1]
    else:
        raise ArgumentError(f"cannot certify {type(u).__name__}")
    return H


def grid_admissibility(u, m: int) -> AdmissibilityReport:
    """Certify that the discrete Hessian of ``u`` lies in ``K_m`` at interior nodes.

    When ``u`` vanishes on the boundary the sign property ``u <= 0`` is
    checked as well.
    """
    n = u.n
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= n:
        raise ArgumentError(f"m={m} outside [1, {n}]")
    H = _interior_traces(u)
    shape = H.shape[:-2]
    flat = H.reshape(-1, n, n)
    tr = batch_traces(flat)[:, 1:m + 1]
    scale = np.maximum(1.0, np.abs(flat).sum(axis=-1).max(axis=-1))
    tau = CONE_RTOL * scale ** m
    slack = tr - tau[:, None]
    k, p = np.unravel_index(int(np.argmin(slack)), slack.shape)
    node = tuple(int(i) for i in np.unravel_index(k, shape))
    cone_ok = bool(slack[k, p] > 0)

    vals = u.values
    boundary = vals[-1]
    size = max(1.0, float(np.abs(vals).max()))
    sign_ok, vmax = True, None
    if np.abs(boundary).max() <= ZERO_DATA_TOL * size:
        vmax = float(vals.max())
        sign_ok = vmax <= CONE_RTOL * size
    return AdmissibilityReport(m=m, admissible=cone_ok and sign_ok, worst_node=node,
                               worst_order=int(p) + 1, worst_value=float(tr[k, p]),
                               max_value=vmax, sign_ok=bool(sign_ok))
