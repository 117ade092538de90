"""Quick invariant suite behind ``rotpatch check``.

Each check returns a dict with at least ``passed``, ``value`` and
``tolerance``. Randomized checks draw from a seeded generator so reports are
reproducible.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .functional import (
    invertibility_factor,
    invertibility_margin,
    jacobian_numeric,
    linearization_analytic,
    linearization_derived,
)
from .geometry import FourierBoundary, NearDiskDomain, SampledCurve, eval_near_disk_map, grid
from .kernels import PatchSource, circulation, green_disk, patch_velocity, tangency_check


def kirchhoff_residual(Q: float, m: int = 256) -> float:
    """max |(u - i Omega z) . n| on the free-space ellipse with semi-axes 1 +- Q, lam = 1."""
    z = np.exp(1j * grid(m))
    cv = SampledCurve.build(z + Q / z, 1j * (z - Q / z))
    a, b = 1.0 + Q, 1.0 - Q
    om = a * b / (a + b) ** 2
    u = patch_velocity(PatchSource(cv, 1.0), None, "all", image=False)
    return float(np.max(np.abs(np.real(np.conj(u - 1j * om * cv.points) * cv.normals))))


def circle_curve(center: complex, r: float, m: int = 256) -> SampledCurve:
    return eval_near_disk_map(NearDiskDomain(center, r), m)


def _res(passed, value, tol, **kw):
    return {"passed": bool(passed), "value": value, "tolerance": tol, **kw}


def check_green(rng) -> dict:
    r = np.sqrt(rng.uniform(0, 0.99, 200))
    x = r * np.exp(2j * np.pi * rng.uniform(size=200))
    r = np.sqrt(rng.uniform(0, 0.99, 200))
    y = r * np.exp(2j * np.pi * rng.uniform(size=200))
    sym = float(np.max(np.abs(green_disk(x, y) - green_disk(y, x))))
    xb = (1 - 1e-8) * np.exp(1j * 0.3)
    vb = float(abs(green_disk(xb, y[:20])).max())
    return _res(sym < 1e-12 and vb < 1e-7, max(sym, vb), 1e-12, symmetry=sym, boundary_value=vb)


def check_tangency(rng) -> dict:
    v = tangency_check(PatchSource(circle_curve(0.5 + 0.2j, 0.1), 1.0), 256)
    return _res(v < 1e-8, v, 1e-8)


def check_circulation(rng) -> dict:
    src = PatchSource(circle_curve(0.3 - 0.1j, 0.15), 2.0)
    circ, flux = circulation([src], 1 - 1e-9, 1024)
    err = abs(circ - src.circulation) / abs(src.circulation)
    return _res(err < 1e-8 and abs(flux) < 1e-8, err, 1e-8, flux=flux)


def check_kirchhoff(rng) -> dict:
    v = max(kirchhoff_residual(Q) for Q in (0.1, 0.3))
    return _res(v < 1e-10, v, 1e-10)


def check_margin(rng) -> dict:
    Qs = rng.uniform(1e-6, 0.5 - 1e-6, 100)
    mins = [invertibility_margin(Q, 64) for Q in Qs]
    endpoint = float(invertibility_factor(0.5, 3))
    ok = min(mins) > 0 and abs(endpoint) < 1e-14
    return _res(ok, float(min(mins)), 0.0, endpoint=endpoint)


def _lin_check(op) -> dict:
    worst = 0.0
    for Q in (0.1, 0.3, 0.45):
        J = jacobian_numeric(FourierBoundary(Q, 1e-3, np.zeros(15)), modes=16)
        worst = max(worst, float(np.max(np.abs(J - op(Q, 16).matrix))))
    return _res(worst < 1e-5, worst, 1e-5)


def check_linearization_printed(rng) -> dict:
    return _lin_check(linearization_analytic)


def check_linearization_derived(rng) -> dict:
    return _lin_check(linearization_derived)


def check_near_disk(rng) -> dict:
    from .multi import near_disk_jacobian_numeric, near_disk_linearization

    J = near_disk_jacobian_numeric(11)
    L = near_disk_linearization(NearDiskDomain(0.0, 0.1, np.zeros(9))).matrix
    v = float(np.max(np.abs(J - L)))
    return _res(v < 1e-6, v, 1e-6)


def check_position_limit(rng) -> dict:
    from .multi import initial_config, limit_position_operator, match_printed_constant

    c = initial_config(0.3, 1.0, 0.05, N=8, N_sat=8)
    a = limit_position_operator(c, 1).value
    b = limit_position_operator(c, 2).value
    rel = abs(a - b) / abs(a)
    return _res(rel < 1e-6, a, 1e-6, j2=b, relative_difference=rel, matches=match_printed_constant(a, 0.3, 1.0))


CHECKS: dict[str, Callable] = {
    "green": check_green,
    "tangency": check_tangency,
    "circulation": check_circulation,
    "kirchhoff": check_kirchhoff,
    "invertibility_margin": check_margin,
    "linearization_printed": check_linearization_printed,
    "linearization_derived": check_linearization_derived,
    "near_disk_linearization": check_near_disk,
    "position_limit": check_position_limit,
}


def run_checks(names=None, seed: int = 0) -> dict:
    out = {}
    for name in names or CHECKS:
        rng = np.random.default_rng([seed, sorted(CHECKS).index(name)])
        out[name] = CHECKS[name](rng)
    return out
