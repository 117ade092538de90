import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rotpatch.geometry import (
    FourierBoundary,
    GeometryError,
    NearDiskDomain,
    SampledCurve,
    area_scale_closed_form,
    enclosed_area,
    eval_near_disk_map,
    eval_outer_map,
    grid,
    read_boundary_csv,
    renormalize_scale,
    write_boundary_csv,
    write_coeffs_json,
)


def circle(r, m=64, c=0.0):
    z = np.exp(1j * grid(m))
    return SampledCurve.build(c + r * z, 1j * r * z)


def quad_area(Q, coeffs, A=1.0, eps=1.0):
    """Green's-theorem area of the analytic map by adaptive quadrature."""

    def w(t):
        z = np.exp(1j * t)
        val = z + Q / z + eps * sum(B * z ** -(n + 2) for n, B in enumerate(coeffs))
        d = 1j * (z - Q / z - eps * sum((n + 2) * B * z ** -(n + 2) for n, B in enumerate(coeffs)))
        return 0.5 * np.imag(np.conj(val) * d) * A**2 * eps**2

    return quad(w, 0, 2 * np.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def test_circle_area():
    assert abs(enclosed_area(circle(1.0)) - np.pi) < 1e-13


def test_ellipse_area_pi_ab():
    z = np.exp(1j * grid(128))
    c = SampledCurve.build(z + 0.3 / z, 1j * (z - 0.3 / z))
    assert enclosed_area(c) == pytest.approx(0.91 * np.pi, rel=1e-14)


def test_area_matches_adaptive_quadrature():
    b = FourierBoundary(0.2, 1.0, [0.1], A=1.0)
    c = eval_outer_map(b, 64)
    assert abs(enclosed_area(c) - quad_area(0.2, [0.1])) < 1e-10


def test_disk_and_ellipse_examples():
    c = eval_outer_map(FourierBoundary(0.0, 0.1, np.zeros(3)), 64)
    assert np.allclose(np.abs(c.points), 0.1, atol=1e-15)
    assert enclosed_area(c) == pytest.approx(np.pi * 0.01, rel=1e-13)
    e = eval_outer_map(FourierBoundary(0.3, 0.1, np.zeros(3)), 64)
    assert e.points[0].real == pytest.approx(0.13, abs=1e-15)
    assert e.points[16].imag == pytest.approx(0.07, abs=1e-15)
    assert enclosed_area(e) == pytest.approx(np.pi * 0.01 * 0.91, rel=1e-13)


def test_renormalized_area_and_closed_form():
    b = FourierBoundary(0.3, 0.1, [0.01])
    c = eval_outer_map(b, 256)
    assert abs(enclosed_area(c) / (np.pi * 0.01 * 0.91) - 1) < 1e-12
    b = FourierBoundary(0.3, 0.1, [0.05])
    assert b.A > 1
    # the closed form is exactly A^2; read as A it differs at second order
    assert area_scale_closed_form(b) == pytest.approx(b.A**2, rel=1e-13)
    dev = abs(area_scale_closed_form(b) - b.A)
    assert 0 < dev < 1e-4


def test_renormalize_scale_restores_area():
    b = FourierBoundary(0.3, 0.1, [0.05, 0.02], A=1.0)
    assert renormalize_scale(b).A == pytest.approx(FourierBoundary(0.3, 0.1, [0.05, 0.02]).A, rel=1e-15)
    assert FourierBoundary(0.3, 0.1, np.zeros(4)).A == 1.0


def test_huge_coefficient_rejected():
    with pytest.raises(GeometryError):
        FourierBoundary(0.3, 0.1, [10.0])


def test_self_intersection_and_degeneracy_rejected():
    with pytest.raises(GeometryError):
        eval_outer_map(FourierBoundary(0.3, 0.5, [0.0, 0.0, 1.0], A=1.0), 64)
    z = np.exp(1j * grid(16))
    with pytest.raises(GeometryError):
        SampledCurve.build(z, np.zeros(16, complex))
    with pytest.raises(GeometryError):
        SampledCurve.build(z[::-1], -1j * z[::-1])  # clockwise
    with pytest.raises(GeometryError):
        SampledCurve.build(z[:12], 1j * z[:12])


def test_grid_precondition():
    with pytest.raises(GeometryError):
        eval_outer_map(FourierBoundary(0.3, 0.1, np.zeros(31)), 64)


def test_derivative_is_exact():
    b = FourierBoundary(0.25, 0.2, [0.1, -0.05, 0.02])
    c = eval_outer_map(b, 128)
    k = np.fft.fftfreq(128, 1 / 128)
    spec = np.fft.ifft(1j * k * np.fft.fft(c.points))
    assert np.max(np.abs(spec - c.dpoints)) < 1e-13
    assert np.allclose(c.normals, -1j * c.dpoints / np.abs(c.dpoints))


def test_near_disk_examples():
    d = NearDiskDomain(0.5, 0.05)
    assert d.a1 == 1.0
    c = eval_near_disk_map(d, 64)
    assert np.allclose(np.abs(c.points - 0.5), 0.05)
    d = NearDiskDomain(0.5, 0.05, [0.1])
    c = eval_near_disk_map(d, 256)
    assert abs(enclosed_area(c) / (np.pi * 0.05**2) - 1) < 1e-12
    with pytest.raises(GeometryError):
        NearDiskDomain(0.9, 0.05)


def test_spectral_convergence_in_m():
    b = FourierBoundary(0.3, 1.0, 0.2 * 0.5 ** np.arange(1, 12), A=1.0)
    a64 = enclosed_area(eval_outer_map(b, 64))
    a128 = enclosed_area(eval_outer_map(b, 128))
    assert abs(a64 - a128) < 1e-14


@settings(max_examples=30, deadline=None)
@given(
    Q=st.floats(0.0, 0.45),
    eps=st.floats(1e-3, 0.3),
    coeffs=st.lists(st.floats(-0.3, 0.3), min_size=1, max_size=6),
)
def test_area_and_symmetry_properties(Q, eps, coeffs):
    b = FourierBoundary(Q, eps, coeffs)
    w, dw = b.normalized(64)
    area = 0.5 * (2 * np.pi / 64) * np.sum(np.imag(np.conj(w) * dw))
    assert abs(area / (np.pi * (1 - Q**2)) - 1) < 1e-12
    # points(-theta) = conj(points(theta))
    assert np.allclose(w[(-np.arange(64)) % 64], np.conj(w), atol=1e-14)


def test_csv_and_json_roundtrip(tmp_path):
    b = FourierBoundary(0.3, 0.1, [0.01])
    c = eval_outer_map(b, 64)
    write_boundary_csv(tmp_path / "b.csv", c, velocity=np.ones(64, complex))
    header = (tmp_path / "b.csv").read_text().splitlines()[0]
    assert header == "theta,x,y,nx,ny,u_x,u_y"
    pts = read_boundary_csv(tmp_path / "b.csv")
    assert np.max(np.abs(pts - c.points)) < 1e-12
    write_coeffs_json(tmp_path / "c.json", b)
    d = json.loads((tmp_path / "c.json").read_text())
    assert set(d) >= {"Q", "eps", "A", "B"}
