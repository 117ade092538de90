"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerance.

Lines are collected in ACCEPTANCE and echoed in the pytest terminal summary
(see conftest.py). Running this file directly prints them as well.
"""
import time

import numpy as np
import pytest

from rotpatch.checks import circle_curve, kirchhoff_residual
from rotpatch.dynamics import PatchState, evolve, rigid_rotation_error
from rotpatch.functional import (
    invertibility_factor,
    invertibility_margin,
    jacobian_numeric,
    linearization_analytic,
)
from rotpatch.geometry import FourierBoundary, NearDiskDomain, eval_outer_map
from rotpatch.kernels import PatchSource, circulation, green_disk, tangency_check
from rotpatch.multi import (
    boundary_distance,
    initial_config,
    limit_position_operator,
    match_printed_constant,
    near_disk_jacobian_numeric,
    near_disk_linearization,
    solve_multi,
)
from rotpatch.solver import continuation, loglog_slope, solve_single

ACCEPTANCE: dict[int, str] = {}


def verdict(k: int, ok: bool, detail: str):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[k] = line
    print(line)
    assert ok, line


def test_criterion_1_linearization_fidelity():
    t0 = time.perf_counter()
    worst, off_band = 0.0, 0.0
    for Q in (0.1, 0.3, 0.45):
        J = jacobian_numeric(FourierBoundary(Q, 1e-3, np.zeros(15)), modes=16)
        L = linearization_analytic(Q, 16).matrix
        worst = max(worst, float(np.max(np.abs(J - L))))
        off_band = max(off_band, float(np.max(np.abs(J[L == 0]))))
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and off_band < 1e-5 and dt < 30
    verdict(1, ok, f"max|J - L| = {worst:.3e}, off-band max = {off_band:.3e} (tol 1e-5), {dt:.1f} s")


def test_criterion_2_kirchhoff():
    v = {Q: kirchhoff_residual(Q, 256) for Q in (0.1, 0.3)}
    verdict(2, max(v.values()) < 1e-10, "residuals " + ", ".join(f"Q={q}: {r:.2e}" for q, r in v.items()) + " (tol 1e-10)")


def test_criterion_3_invertibility_margin():
    Qs = np.random.default_rng(3).uniform(0.0, 0.5, 100)
    Qs = Qs[(Qs > 0) & (Qs < 0.5)]
    lo = min(invertibility_margin(Q, 64) for Q in Qs)
    end = float(invertibility_factor(0.5, 3))
    verdict(3, len(Qs) == 100 and lo > 0 and abs(end) < 1e-14, f"min margin {lo:.3e} > 0 over 100 Q, f(1/2, 3) = {end:.1e}")


@pytest.mark.slow
def test_criterion_4_eps_squared_scaling():
    t0 = time.perf_counter()
    res = continuation("single", [0.02, 0.015, 0.01, 0.0075, 0.005], Q=0.3, tol=1e-11)
    dt = time.perf_counter() - t0
    finals = [s.report.final_residual for s in res]
    ok = all(s.report.converged for s in res) and max(finals) < 1e-11 and abs(res.slope - 2.0) <= 0.1 and dt < 300
    verdict(4, ok, f"max residual {max(finals):.2e}, slope {res.slope:.4f} (want 2.0 +- 0.1), {dt:.1f} s")


@pytest.mark.slow
def test_criterion_5_rigid_rotation():
    t0 = time.perf_counter()
    Q, eps, m = 0.3, 0.01, 256
    om = (1 - Q**2) / (4 * np.pi * eps**2)
    lam = 1 / (np.pi * eps**2)
    T = np.pi / (2 * om)
    dt = 0.0125 / om
    b, _ = solve_single(Q, eps)
    errs = []
    for bb in (b, FourierBoundary(Q, eps, np.r_[0.05, np.zeros(b.N - 2)])):
        c = eval_outer_map(bb, m)
        out, log = evolve(PatchState((c,), (lam,)), dt, T, omega=om)
        assert not log.halted
        errs.append(rigid_rotation_error(c, out.curves[0], om, T))
    wall = time.perf_counter() - t0
    ok = errs[0] < 1e-5 and errs[1] >= 1e2 * errs[0] and wall < 600
    verdict(5, ok, f"solved {errs[0]:.2e} (tol 1e-5), control {errs[1]:.2e}, ratio {errs[1] / errs[0]:.0f}, {wall:.1f} s")


@pytest.mark.slow
def test_criterion_6_two_plus_one():
    Q, mu, r0s = 0.3, 1.0, (0.05, 0.04, 0.03)
    sols, res, dy, om_err = [], [], [], []
    prev = None
    for r0 in r0s:
        c, rep = solve_multi(Q, mu, r0, N=16, initial=prev)
        c2, _ = solve_multi(Q, mu, r0, N=32, N_sat=32)
        prev = c
        sols.append(c)
        res.append(max(rep.extras["residual_scaled"], rep.extras["residual_physical"]))
        dy.append(max(abs(a - b) for a, b in zip(c.Y, c2.Y)))
        om_err.append(abs(c.Omega - ((1 - Q**2) / (4 * np.pi * r0**2) + mu / (4 * np.pi))))
    d = np.array([boundary_distance(c) for c in sols])
    p = [loglog_slope(r0s, d[:, j]) for j in range(2)]
    finite = all(np.all(np.isfinite(c.Y)) for c in sols)
    ok = finite and max(res) < 1e-9 and max(dy) < 1e-6 and max(om_err) == 0.0 and all(abs(q - 2) <= 0.1 for q in p)
    verdict(6, ok, f"slopes {p[0]:.3f}, {p[1]:.3f}; max residual {max(res):.2e}; N-doubling dy {max(dy):.1e}; Omega exact")


def test_criterion_7_limit_operator():
    c = initial_config(0.3, 1.0, 0.05, N=8, N_sat=8)
    a = limit_position_operator(c, 1)
    b = limit_position_operator(c, 2)
    rel = abs(a.value - b.value) / abs(a.value)
    name = match_printed_constant(a.value, 0.3, 1.0)
    verdict(7, rel < 1e-6, f"j=1 {a.value:.10f}, j=2 {b.value:.10f}, rel diff {rel:.1e}; matches {name}")


def test_criterion_8_kernels():
    rng = np.random.default_rng(8)
    x = np.sqrt(rng.uniform(0, 0.99, 500)) * np.exp(2j * np.pi * rng.uniform(size=500))
    y = np.sqrt(rng.uniform(0, 0.99, 500)) * np.exp(2j * np.pi * rng.uniform(size=500))
    sym = float(np.max(np.abs(green_disk(x, y) - green_disk(y, x))))
    xb = (1 - 2.0**-50) * np.exp(2j * np.pi * rng.uniform(size=500))
    bnd = float(np.max(np.abs(green_disk(xb, y))))
    tan = max(tangency_check(PatchSource(circle_curve(z, 0.1), 1.0), 256) for z in (0.5 + 0.2j, -0.3 + 0.6j))
    src = PatchSource(circle_curve(0.3 - 0.1j, 0.15), 2.0)
    circ, _ = circulation([src], 1 - 1e-9, 1024)
    cerr = abs(circ - src.circulation) / src.circulation
    ok = sym < 1e-12 and bnd < 1e-12 and tan < 1e-8 and cerr < 1e-8
    verdict(8, ok, f"symmetry {sym:.1e}, boundary {bnd:.1e}, tangency {tan:.1e}, circulation {cerr:.1e}")


def test_criterion_9_near_disk():
    J = near_disk_jacobian_numeric(11)
    L = near_disk_linearization(NearDiskDomain(0.0, 0.1, np.zeros(9))).matrix
    diag = -(np.arange(2, 11) - 1) / (2 * np.pi)
    err = float(np.max(np.abs(np.diag(J) - diag)))
    band = float(np.max(np.abs(J - L)))
    verdict(9, err < 1e-6, f"diag error {err:.1e} for 2 <= n <= 10 (tol 1e-6), full matrix {band:.1e}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
