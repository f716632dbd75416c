"""Acceptance gate: one PASS/FAIL line per criterion.

The lines are printed as each test runs and collected again in the pytest
terminal summary under "acceptance criteria".
"""
import time
from math import comb

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from mhessian import inequalities as ineq
from mhessian.cli import main
from mhessian.domain import Domain
from mhessian.field import (RadialFunction, cofactor_divergence_residual,
                            divergence_identity_residual, polar_grid, radial_m_hessian)
from mhessian.harness import PROPERTY_SUITES, Settings, run_suite
from mhessian.integrals import (first_variation_I, hessian_integral, second_variation_I,
                                second_variation_I_numeric)
from mhessian.solver import (DirichletProblem, quadratic_coefficient, solve_grid_newton,
                             solve_radial_ode, solve_radial_quadratic)
from mhessian.symfunc import minor_sum, trace_scale, traces

DISC = Domain.disc(1.0)
GRID = 128
RADIAL = 129

pytestmark = pytest.mark.slow


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def quartic(r, c=0.5):
    return (r ** 2 - 1) / 2 + c * (r ** 4 - 1) / 4


def quartic_eigs(r, c=0.5):
    return 1 + 3 * c * r ** 2, 1 + c * r ** 2


def test_1_minor_sum_oracle():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        A = rng.standard_normal((n, n)) * 10 ** rng.uniform(-2, 2)
        S = (A + A.T) / 2
        tr = traces(S)
        for m in range(1, n + 1):
            worst = max(worst, abs(tr[m] - minor_sum(S, m)) / trace_scale(S, m))
    elapsed = time.perf_counter() - t0
    record(1, worst <= 1e-12 and elapsed < 10,
           f"1000 matrices, worst scaled error {worst:.2e}, {elapsed:.2f}s")


def test_2_closed_form_solvers():
    errors = {}
    for n, m in ((2, 1), (2, 2), (3, 1), (3, 2), (3, 3)):
        sol = solve_radial_ode(n, m, N=RADIAL)
        a = quadratic_coefficient(n, m, 0)
        errors[f"radial n={n} m={m}"] = np.abs(sol.w.values - a * (sol.w.r ** 2 - 1) / 2).max()
    for l in (0, 1):
        sol = solve_grid_newton(DirichletProblem(DISC, 2, l), GRID, GRID)
        x, y = sol.w.grid.xy()
        a = quadratic_coefficient(2, 2, l)
        errors[f"grid m=2 l={l}"] = np.abs(sol.w.values - a * (x * x + y * y - 1) / 2).max()

    # halving ratio on manufactured quartic solutions
    ratios = {}
    errs = []
    for N in (65, RADIAL):
        lr = lambda r: quartic_eigs(r)
        sol = solve_radial_ode(3, 2, psi=lambda r: 2 * lr(r)[0] * lr(r)[1] + lr(r)[1] ** 2, N=N)
        errs.append(np.abs(sol.w.values - quartic(sol.w.r)).max())
    ratios["radial"] = errs[0] / errs[1]
    for l in (0, 1):
        def psi(x, y):
            a, b = quartic_eigs(np.hypot(x, y))
            return a * b if l == 0 else a * b / (a + b)
        errs = []
        for N in (GRID // 2, GRID):
            sol = solve_grid_newton(DirichletProblem(DISC, 2, l, psi), N, N)
            x, y = sol.w.grid.xy()
            errs.append(np.abs(sol.w.values - quartic(np.hypot(x, y))).max())
        ratios[f"grid l={l}"] = errs[0] / errs[1]
    worst = max(errors.values())
    ok = worst <= 1e-6 and all(3.5 <= r <= 4.5 for r in ratios.values())
    record(2, ok, f"closed-form max error {worst:.2e}; halving ratios "
           + ", ".join(f"{k} {v:.3f}" for k, v in ratios.items()))


def test_3_golden_value():
    a, w = solve_radial_quadratic(3, 2, 0, N=RADIAL)
    exact = comb(3, 2) * a ** 3 * (4 * np.pi / 3) / 5
    value = hessian_integral(w, 2)
    rel = abs(value - exact) / exact
    # Monte Carlo over the cube [-1, 1]^3 with the integrand interpolated from the grid
    integrand = -w.values * radial_m_hessian(w, 3, 2).values
    rng = np.random.default_rng(99)
    total = total_sq = 0.0
    samples, chunk = 10 ** 7, 10 ** 6
    for _ in range(samples // chunk):
        x = rng.uniform(-1.0, 1.0, size=(chunk, 3))
        r = np.sqrt((x * x).sum(axis=1))
        f = np.where(r <= 1.0, np.interp(r, w.r, integrand), 0.0) * 8.0
        total += f.sum()
        total_sq += (f * f).sum()
    mean = total / samples
    sigma = np.sqrt((total_sq / samples - mean ** 2) / samples)
    ok = rel <= 1e-6 and abs(mean - value) <= 3 * sigma
    record(3, ok, f"I_2 = {value:.11f} (exact {exact:.11f}, rel {rel:.1e}); "
           f"Monte Carlo {mean:.5f} +/- {sigma:.1e} ({abs(mean - value) / sigma:.2f} sigma)")


def test_4_identities():
    quad = []
    g = polar_grid(DISC, GRID, GRID)
    u = g.evaluate(lambda x, y: 0.5 * x * x + 0.3 * x * y + 0.8 * y * y)
    for m in (1, 2):
        quad += [divergence_identity_residual(u, m), cofactor_divergence_residual(u, m)]
    for n in (3, 4):
        w = RadialFunction.from_callable(lambda r: 0.7 * (r * r - 1), N=RADIAL, n=n)
        quad += [divergence_identity_residual(w, m) for m in range(1, n + 1)]
    ratios = []
    res = []
    for N in (GRID // 2, GRID):
        v = polar_grid(DISC, N, N).evaluate(lambda x, y: (x * x + y * y) ** 2 / 8)
        res.append((divergence_identity_residual(v, 2), cofactor_divergence_residual(v, 2)))
    ratios += [res[0][0] / res[1][0], res[0][1] / res[1][1]]
    rad = [divergence_identity_residual(RadialFunction.from_callable(lambda r: r ** 4 / 4 - 0.25, N=N, n=3), 2)
           for N in (65, RADIAL)]
    ratios.append(rad[0] / rad[1])
    ok = max(quad) <= 1e-9 and all(3.5 <= r <= 4.5 for r in ratios)
    record(4, ok, f"quadratic residual {max(quad):.1e}; quartic halving ratios "
           + ", ".join(f"{r:.3f}" for r in ratios))


def test_5_property_suites():
    settings = Settings(property_samples=10000, seed=7)
    t0 = time.perf_counter()
    reports = [r for name in PROPERTY_SUITES for r in run_suite(name, settings)]
    elapsed = time.perf_counter() - t0
    worst = min(r.margin for r in reports if r.name != "ellipticity")
    eig = min(r.margin for r in reports if r.name == "ellipticity")
    ok = all(r.passed for r in reports) and worst >= -1e-10 and eig > 0 and elapsed < 60
    record(5, ok, f"{len(reports)} sweeps of 10^4 samples, worst margin {worst:.1e}, "
           f"min gradient eigenvalue {eig:.1e}, {elapsed:.1f}s")


def _extremals():
    ball = {ml: solve_radial_quadratic(3, *ml, N=RADIAL)[1]
            for ml in ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))}
    disc = {ml: solve_grid_newton(DirichletProblem(DISC, *ml), GRID, GRID).w
            for ml in ((1, 0), (2, 0), (2, 1))}
    return ball, disc


def test_6_sharpness():
    ball, disc = _extremals()
    reports = []
    for ext, configs in ((ball, ((2, 0), (2, 1), (3, 0), (3, 1), (3, 2))), (disc, ((2, 0), (2, 1)))):
        for m, l in configs:
            w = ext[m, l]
            reports += [ineq.check_poincare(w, w, m, l), ineq.check_isoperimetric(w, w, m, l),
                        ineq.check_anpo(w, w, m, l), ineq.check_dilation_invariance(w, w, m, l, 4.0)]
            if l == 0:
                reports.append(ineq.check_zero_l(w, w, m))
            for p in range(l + 1, m):
                reports.append(ineq.check_composition(w, ext[m, p], ext[p, l], m, p, l))
    reports.append(ineq.check_p2(ball[3, 1], ball[3, 1], 3))
    reports.append(ineq.check_p2(disc[2, 1], disc[2, 1], 2))
    rel_tol = max(r.tolerance / max(1.0, abs(r.lhs), abs(r.rhs)) for r in reports)
    worst = max(abs(r.margin) / r.tolerance for r in reports)
    names = sorted({r.name for r in reports})
    ok = all(r.passed for r in reports) and worst <= 1.0 and rel_tol <= 1e-5
    record(6, ok, f"{len(reports)} checks ({', '.join(names)}) at u = w; "
           f"max |margin|/tol {worst:.2e}, relative tolerance {rel_tol:.1e}")


@pytest.fixture(scope="module")
def verify_runs(tmp_path_factory):
    out = []
    for tag in ("a", "b"):
        d = tmp_path_factory.mktemp(f"verify-{tag}")
        t0 = time.perf_counter()
        code = main(["verify", "all", "--seed", "0", "--out", str(d)])
        out.append((code, d, time.perf_counter() - t0))
    return out


def test_7_inequality_sweep(verify_runs):
    import json
    code, d, elapsed = verify_runs[0]
    data = json.loads((d / "report.json").read_text())
    reports = data["reports"]
    sweep = [r for r in reports if r["inputs"].get("u") == "random"]
    per_config = {}
    for r in sweep:
        key = (r["name"], r["inputs"]["n"], r["m"], r["l"])
        per_config[key] = per_config.get(key, 0) + 1
    failed = [r for r in reports if r["verdict"] != "pass"]
    ok = code == 0 and not failed and min(per_config.values()) == 100
    record(7, ok, f"verify all exit {code}: {len(reports)} checks, {len(sweep)} random inputs over "
           f"{len(per_config)} (check, n, m, l) cells, {len(failed)} failures, {elapsed:.1f}s")


def test_8_extremal_comparison():
    w21 = solve_radial_quadratic(3, 2, 1, N=RADIAL)[1]
    w20 = solve_radial_quadratic(3, 2, 0, N=RADIAL)[1]
    T1 = radial_m_hessian(w21, 3, 1).values
    rep = ineq.check_w2(w21, w20, 2, 1)
    c21, c20 = w21.values[0], w20.values[0]
    ok = (np.abs(T1 - 3.0).max() <= 1e-8 and np.all(w21.values[:-1] < w20.values[:-1])
          and abs(c21 + 0.5) <= 1e-8 and abs(c20 + 0.5 / np.sqrt(3)) <= 1e-8 and rep.passed)
    record(8, ok, f"T_1[w_21] = 3 +/- {np.abs(T1 - 3).max():.1e}; centers {c21:.10f} < {c20:.10f}")


def test_9_variation_dual_paths():
    N = 1025
    rels = []
    for m, l in ((1, 0), (2, 0), (2, 1), (3, 0), (3, 2)):
        w = solve_radial_quadratic(3, m, l, N=N)[1]
        r = w.r
        for h in ((1 - r * r) ** 2, (1 - r * r) * (1 + 2 * r * r - r ** 4)):
            h = w.with_values(h)
            d, i = first_variation_I(w, h, m)
            rels.append(abs(d - i) / abs(i))
            s, sn = second_variation_I(w, h, m), second_variation_I_numeric(w, h, m)
            rels.append(abs(s - sn) / abs(s))
    sol = solve_radial_ode(3, 2, psi=lambda r: 1 + r * r, N=N)
    h = sol.w.with_values((1 - sol.w.r ** 2) ** 2)
    d, i = first_variation_I(sol.w, h, 2)
    rels.append(abs(d - i) / abs(i))
    worst = max(rels)
    record(9, worst <= 1e-5, f"{len(rels)} dual-path pairs at N={N}, worst relative gap {worst:.2e}")


def test_10_determinism(verify_runs):
    (ca, da, _), (cb, db, _) = verify_runs
    same = all((da / f).read_bytes() == (db / f).read_bytes() for f in ("report.json", "report.csv"))
    record(10, same and ca == cb == 0, f"two 'verify all --seed 0' runs byte-identical: {same}")
