from dataclasses import replace

import numpy as np
import pytest

from rotpatch.functional import residual_single
from rotpatch.geometry import FourierBoundary, GeometryError, NearDiskDomain
from rotpatch.multi import (
    MultiConfig,
    boundary_distance,
    distance_coefficient,
    initial_config,
    limit_position_operator,
    match_printed_constant,
    near_disk_jacobian_numeric,
    near_disk_linearization,
    near_disk_self_term,
    position_derivative,
    residual_multi,
    solve_multi,
)
from rotpatch.solver import solve_single


def small(r0=0.05, **kw):
    return initial_config(0.3, 1.0, r0, N=8, N_sat=8, **kw)


def test_omega_and_centers():
    c = small()
    assert c.Omega == (1 - 0.09) / (4 * np.pi * 0.05**2) + 1 / (4 * np.pi)
    cd = distance_coefficient(0.3, 1.0)
    assert cd == pytest.approx(1 / 0.91)
    assert c.centers[0] == pytest.approx(1 - cd * 0.0025)
    assert c.centers[1] == -c.centers[0]
    assert distance_coefficient(0.3, 1.0, "double") == 2 * cd
    assert distance_coefficient(0.3, 1.0, "two_pi") == pytest.approx(2 * np.pi * cd)


def test_invalid_configs():
    with pytest.raises(GeometryError):
        MultiConfig(0.3, 1.0, (0.05, 0.05**2, 0.05**2 / 4))  # r_j >= r0^2/2
    with pytest.raises(GeometryError):
        MultiConfig(0.3, 0.0, (0.05, 1e-4, 1e-4))  # mu = 0 without c_d
    with pytest.raises(GeometryError):
        MultiConfig(0.3, 1.0, (0.05, 5e-4, 5e-4), Y=(-300.0, 0.0))  # satellite pushed out of the disk
    with pytest.raises(GeometryError):
        residual_multi(MultiConfig(0.3, 1.0, (0.7, 0.1, 0.1), c_d=1.35, beta0=FourierBoundary(0.3, 0.7, np.zeros(7))), 64)


def test_unknown_roundtrip():
    c = small()
    x = np.arange(c.unknowns().size) * 1e-4
    assert np.allclose(c.with_unknowns(x).unknowns(), x)
    with pytest.raises(ValueError):
        c.with_unknowns(x[:-1])


def test_mu_zero_reduces_to_single_patch():
    b, _ = solve_single(0.3, 0.05, N=8, m=128)
    c = MultiConfig(0.3, 0.0, (0.05, 6e-4, 6e-4), beta0=b, beta1=np.zeros(6), beta2=np.zeros(6), c_d=1.0)
    f0 = residual_multi(c, 128).f0
    ref = residual_single(b, 128)
    assert np.max(np.abs(f0.coeffs - ref.coeffs)) < 1e-12
    assert f0.norm() < 1e-11


def test_mirror_symmetry():
    c = replace(small(), Y=(0.3, -0.2), beta1=np.r_[0.01, 0, 0, 0, 0, 0], beta2=np.r_[-0.02, 0.001, 0, 0, 0, 0])
    s = replace(c, Y=c.Y[::-1], beta1=c.beta2, beta2=c.beta1)
    r, rs = residual_multi(c, 128), residual_multi(s, 128)
    assert rs.f1.norm() == pytest.approx(r.f2.norm(), rel=1e-11)
    assert rs.f2.norm() == pytest.approx(r.f1.norm(), rel=1e-11)
    assert rs.f0.norm() == pytest.approx(r.f0.norm(), rel=1e-9)


def test_small_satellite_limit():
    # with r_j = o(r0^2) the central and shape residuals vanish as r0 -> 0, and
    # at the balanced y the position residual does too
    coef = (1 - 0.09) / (4 * np.pi)
    out = []
    for r0 in (0.1, 0.05, 0.025):
        c = MultiConfig(0.3, 1.0, (r0, r0**3, r0**3), beta0=FourierBoundary(0.3, r0, np.zeros(7)), beta1=np.zeros(6), beta2=np.zeros(6))
        p = residual_multi(c, 128).position[0]
        c = replace(c, Y=(-p / coef, -p / coef))
        r = residual_multi(c, 128)
        out.append((r.f0.norm(), np.linalg.norm(r.f1.coeffs[1:]) * r.scales[1], abs(r.position[0])))
    out = np.array(out)
    assert np.all(out[1:, 0] < 0.6 * out[:-1, 0])
    assert np.all(out[1:, 1] < 0.6 * out[:-1, 1])
    assert out[-1, 2] < 1e-3


def test_boundary_distance_circle():
    c = small()
    r1 = c.radii[1]
    d = boundary_distance(c)
    assert d[0] == pytest.approx(1 - c.centers[0] - r1, abs=1e-15)
    assert d[0] == pytest.approx(d[1], abs=1e-15)


def test_near_disk_operator():
    L = near_disk_linearization(NearDiskDomain(0.0, 0.1, np.zeros(9)))
    assert L.matrix[0, 0] == pytest.approx(-1 / (2 * np.pi))
    assert L.matrix[3, 3] == pytest.approx(-2 / np.pi)
    assert np.all(L.apply(np.zeros(9)) == 0)
    J = near_disk_jacobian_numeric(11)
    assert np.max(np.abs(J - L.matrix)) < 1e-6
    assert np.max(np.abs(near_disk_self_term(np.zeros(5)).coeffs)) < 1e-14
    with pytest.raises(ValueError):
        near_disk_linearization(NearDiskDomain(0.0, 0.1, [0.1]))


def test_position_limit_constant_and_mu_scaling():
    c = small()
    v1 = limit_position_operator(c, 1)
    v2 = limit_position_operator(c, 2)
    assert v1.value > 0
    assert abs(v1.value - v2.value) < 1e-6 * v1.value
    assert match_printed_constant(v1.value, 0.3, 1.0) == "(1-Q^2)/(4 pi)"
    c2 = initial_config(0.3, 2.0, 0.05, N=8, N_sat=8)
    w = limit_position_operator(c2, 1).value
    # independent of mu, so the mu-dependent printed constant is ruled out
    assert w == pytest.approx(v1.value, rel=1e-6)
    with pytest.raises(ValueError):
        position_derivative(c, 3)
    with pytest.raises(ValueError):
        limit_position_operator(c, 1, r0_values=(0.08, 0.05, 0.02))


def test_solve_multi_small():
    sol, rep = solve_multi(0.3, 1.0, 0.05, N=8, N_sat=8, m=128)
    assert rep.converged and rep.final_residual < 1e-9
    assert sol.Y[0] == pytest.approx(sol.Y[1], abs=1e-8)
    d = boundary_distance(sol)
    assert d[0] == pytest.approx(d[1], rel=1e-9)
    assert 0.5 < d[0] / 0.05**2 < 1.5
