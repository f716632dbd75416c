"""Verification suites: property sweeps on the cone and inequality sweeps on extremals.

Each suite returns a list of :class:`InequalityReport`.  Randomness comes
from one seed; every (suite, configuration) pair gets its own child stream so
results do not depend on which other suites ran.
"""
import zlib
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np

from . import inequalities as ineq
from .domain import Domain
from .errors import ArgumentError
from .inequalities import InequalityReport
from .solver import DirichletProblem, solve_grid_newton, solve_radial_quadratic
from .symfunc import batch_eigh, batch_gradient, batch_traces, sample_cone

PROPERTY_SUITES = ("maclaurin", "monotonicity", "ellipticity")
INEQUALITY_SUITES = ("poincare", "isoperimetric", "composition", "anpo", "zero_l", "p2",
                     "dilation", "w2")
SUITES = PROPERTY_SUITES + INEQUALITY_SUITES
PROPERTY_RTOL = 1e-10

# (m, l) configurations swept per dimension
CONFIGS = {2: ((2, 0), (2, 1)), 3: ((2, 0), (2, 1), (3, 0), (3, 1), (3, 2))}


@dataclass(frozen=True)
class Settings:
    """What to sweep: dimensions, domain kind, grid sizes, sample counts, seed."""

    dims: tuple = (2, 3)
    domain: Optional[str] = None
    radius: float = 1.0
    axes: Optional[tuple] = None
    radial_nodes: int = 129
    grid: int = 64
    samples: int = 100
    property_samples: int = 10000
    property_dims: tuple = (2, 3, 4, 5, 6)
    seed: int = 0

    def configs(self, n):
        if n in CONFIGS:
            return CONFIGS[n]
        return tuple((m, l) for m in range(2, n + 1) for l in range(m))


def _rng(settings, *key):
    tag = zlib.crc32(repr(key).encode())
    return np.random.default_rng([settings.seed, tag])


def _report(name, worst, m, l, inputs, tol=PROPERTY_RTOL):
    ok = np.isfinite(worst) and worst >= -tol
    return InequalityReport(name, float(worst), 0.0, float(worst), "pass" if ok else "fail",
                            float(tol), m, l, inputs)


# ---------------------------------------------------------------------------
# property suites on K_m

def _margin_scale(tr):
    return np.maximum(1.0, np.abs(tr).max(axis=1))


def property_suite(name, settings: Settings):
    reports = []
    for n in settings.property_dims:
        for m in range(1, n + 1):
            rng = _rng(settings, name, n, m)
            S, acc = sample_cone(rng, n, m, settings.property_samples)
            tr = batch_traces(S)
            base = {"n": n, "samples": settings.property_samples, "acceptance": round(acc, 6),
                    "seed": settings.seed}
            if name == "maclaurin":
                for l in range(1, m):
                    a = np.exp(np.log(tr[:, l] / comb(n, l)) / l)
                    b = np.exp(np.log(tr[:, m] / comb(n, m)) / m)
                    rel = (a - b) / np.maximum(1.0, a)
                    reports.append(_report("maclaurin", rel.min(), m, l, base))
            elif name == "monotonicity":
                G = rng.standard_normal((len(S), n, n))
                k = rng.integers(1, n + 1, size=len(S))
                mask = (np.arange(n)[None, :] < k[:, None]).astype(float)
                G = G * mask[:, None, :]
                S0 = np.einsum("kij,klj->kil", G, G) * rng.uniform(0.01, 1.0, size=(len(S), 1, 1))
                tr0 = batch_traces(S + S0)
                for l in range(m):
                    q1 = tr0[:, m] / tr0[:, l]
                    q0 = tr[:, m] / tr[:, l]
                    rel = (q1 - q0) / np.maximum(1.0, np.abs(q1))
                    reports.append(_report("monotonicity", rel.min(), m, l, base))
            elif name == "ellipticity":
                eig = batch_eigh(S)
                gm = batch_gradient(S, m, eig)
                for l in range(m):
                    gl = batch_gradient(S, l, eig)
                    Tl = tr[:, l][:, None, None]
                    Tm = tr[:, m][:, None, None]
                    Gq = (gm * Tl - Tm * gl) / Tl ** 2
                    lam = np.linalg.eigvalsh(Gq).min(axis=1)
                    # strict positivity: no tolerance below zero
                    reports.append(_report("ellipticity", lam.min(), m, l, base, tol=0.0))
            else:
                raise ArgumentError(f"unknown property suite {name!r}")
    return reports


# ---------------------------------------------------------------------------
# extremals

class _Extremals:
    """Cache of the quotient solutions ``w_{m,l}`` for one dimension and domain."""

    def __init__(self, n, settings: Settings):
        self.n = n
        self.settings = settings
        kind = settings.domain or ("disc" if n == 2 else "ball")
        if kind == "ball":
            self.domain = Domain.ball(n, settings.radius) if n > 2 else Domain.disc(settings.radius)
            self.radial = True
        elif kind == "disc":
            if n != 2:
                raise ArgumentError("disc domains are two-dimensional")
            self.domain, self.radial = Domain.disc(settings.radius), False
        elif kind == "ellipse":
            if n != 2:
                raise ArgumentError("ellipse domains are two-dimensional")
            a, b = settings.axes or (1.5, 1.0)
            self.domain, self.radial = Domain.ellipse(a, b), False
        else:
            raise ArgumentError(f"unknown domain kind {kind!r}")
        self._cache = {}

    def __call__(self, m, l):
        if (m, l) not in self._cache:
            s = self.settings
            if self.radial:
                w = solve_radial_quadratic(self.n, m, l, s.radius, s.radial_nodes)[1]
            else:
                w = solve_grid_newton(DirichletProblem(self.domain, m, l), s.grid, s.grid).w
            self._cache[m, l] = w
        return self._cache[m, l]

    def describe(self):
        d = {"domain": self.domain.to_dict()}
        if self.radial:
            d["N"] = self.settings.radial_nodes
        else:
            d["grid"] = [self.settings.grid, self.settings.grid]
        return d


def _admissible_input(rng, ext, w, m):
    if ext.radial:
        return ineq.random_admissible_radial(rng, w, m)
    return ineq.random_admissible_grid(rng, w, m)


def _free_input(rng, ext, w):
    if ext.radial:
        return ineq.random_harmonic_sum(rng, w)
    return ineq.random_grid_function(rng, w)


def inequality_suite(name, settings: Settings):
    reports = []
    for n in settings.dims:
        ext = _Extremals(n, settings)
        desc = ext.describe()
        for m, l in settings.configs(n):
            w = ext(m, l)
            rng = _rng(settings, name, n, m, l)

            def tag(kind, i=None):
                d = dict(desc, n=n, u=kind, seed=settings.seed)
                if i is not None:
                    d["sample"] = i
                return d

            if name in ("poincare", "isoperimetric"):
                check = ineq.check_poincare if name == "poincare" else ineq.check_isoperimetric
                reports.append(check(w, w, m, l, tag("extremal")))
                for i in range(settings.samples):
                    u = _admissible_input(rng, ext, w, m)
                    reports.append(check(u, w, m, l, tag("random", i)))
            elif name in ("anpo", "dilation"):
                if name == "anpo":
                    def check(u, inputs):
                        return ineq.check_anpo(u, w, m, l, inputs)
                else:
                    def check(u, inputs):
                        mu = float(rng.choice([0.5, 4.0]))
                        return ineq.check_dilation_invariance(u, w, m, l, mu, inputs)
                reports.append(check(w, tag("extremal")))
                for i in range(settings.samples):
                    reports.append(check(_free_input(rng, ext, w), tag("random", i)))
            elif name == "zero_l":
                if l != 0:
                    continue
                reports.append(ineq.check_zero_l(w, w, m, tag("extremal")))
                for i in range(settings.samples):
                    reports.append(ineq.check_zero_l(_free_input(rng, ext, w), w, m, tag("random", i)))
            elif name == "p2":
                if (m, l) != (n, 1):
                    continue
                reports.append(ineq.check_p2(w, w, n, tag("extremal")))
                for i in range(settings.samples):
                    reports.append(ineq.check_p2(_free_input(rng, ext, w), w, n, tag("random", i)))
            elif name == "composition":
                for p in range(l + 1, m):
                    reports.append(ineq.check_composition(w, ext(m, p), ext(p, l), m, p, l,
                                                          tag("extremal")))
            elif name == "w2":
                if l == 0:
                    continue
                reports.append(ineq.check_w2(w, ext(m, 0), m, l, tag("extremal")))
            else:
                raise ArgumentError(f"unknown inequality suite {name!r}")
    return reports


def run_suite(name: str, settings: Settings):
    if name in PROPERTY_SUITES:
        return property_suite(name, settings)
    if name in INEQUALITY_SUITES:
        return inequality_suite(name, settings)
    raise ArgumentError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or 'all'")


def run_suites(names: Sequence[str], settings: Settings):
    """Run the named suites (``all`` expands to every suite) in a fixed order."""
    names = list(names)
    if names == ["all"]:
        names = list(SUITES)
    for name in names:
        if name not in SUITES:
            raise ArgumentError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or 'all'")
    out = []
    for name in names:
        out.extend(run_suite(name, settings))
    return out
