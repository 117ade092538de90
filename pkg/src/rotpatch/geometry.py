"""Conformal-map boundaries of vortex patches.

The central patch is the image of the unit circle under an exterior map

    Phi(z) = A eps ( z + (Q + eps b1)/z + eps (b0 + sum_{n>=2} B_n z^-n) ),

and a satellite is the image under an interior map

    Gamma(z) = x + s a1 r ( z + sum_{n>=3} A_n z^n ),   s = +-1.

``A`` and ``a1`` are never free: they are recomputed from the enclosed area.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

ComplexArray = NDArray[np.complex128]

DEFAULT_N = 32
DEFAULT_M = 256


class GeometryError(ValueError):
    """Raised for degenerate, self-intersecting or misplaced boundaries."""


def grid(m: int) -> NDArray[np.float64]:
    return 2.0 * np.pi * np.arange(m) / m


def _area_grid(n_modes: int) -> int:
    m = 64
    while m < 4 * (n_modes + 2):
        m *= 2
    return m


def _polygon_self_intersects(p: ComplexArray) -> bool:
    m = p.shape[0]
    a = p
    b = np.roll(p, -1)
    ax, ay, bx, by = a.real, a.imag, b.real, b.imag

    def orient(px, py, qx, qy, rx, ry):
        return (qx - px) * (ry - py) - (qy - py) * (rx - px)

    o1 = orient(ax[:, None], ay[:, None], bx[:, None], by[:, None], ax[None, :], ay[None, :])
    o2 = orient(ax[:, None], ay[:, None], bx[:, None], by[:, None], bx[None, :], by[None, :])
    o3 = orient(ax[None, :], ay[None, :], bx[None, :], by[None, :], ax[:, None], ay[:, None])
    o4 = orient(ax[None, :], ay[None, :], bx[None, :], by[None, :], bx[:, None], by[:, None])
    hit = (o1 * o2 < 0) & (o3 * o4 < 0)
    i, j = np.indices((m, m))
    gap = np.abs(i - j)
    hit &= (gap > 1) & (gap < m - 1)
    return bool(hit.any())


@dataclass(frozen=True)
class SampledCurve:
    """Equispaced theta-samples of a closed counterclockwise boundary.

    ``dpoints`` holds d(point)/d(theta); ``normals`` the outward unit normals.
    """

    thetas: NDArray[np.float64]
    points: ComplexArray
    dpoints: ComplexArray
    normals: ComplexArray = field(repr=False)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.m

    @classmethod
    def build(cls, points, dpoints, *, scale: float | None = None, check: bool = True) -> "SampledCurve":
        points = np.ascontiguousarray(points, dtype=np.complex128)
        dpoints = np.ascontiguousarray(dpoints, dtype=np.complex128)
        m = points.shape[0]
        if m < 4 or (m & (m - 1)):
            raise GeometryError(f"grid size must be a power of two >= 4, got {m}")
        speed = np.abs(dpoints)
        if scale is None:
            scale = float(np.max(np.abs(points - points.mean())))
        if not np.all(np.isfinite(points)) or np.min(speed) < 1e-8 * scale:
            raise GeometryError("degenerate parametrization: |d/dtheta| vanishes at a node")
        if check:
            if 0.5 * np.sum(np.imag(np.conj(points) * dpoints)) <= 0.0:
                raise GeometryError("curve is not counterclockwise (nonpositive enclosed area)")
            if _polygon_self_intersects(points):
                raise GeometryError("curve self-intersects")
        normals = -1j * dpoints / speed
        return cls(grid(m), points, dpoints, normals)

    @classmethod
    def from_points(cls, points, *, check: bool = True) -> "SampledCurve":
        """Spectral theta-derivative of equispaced samples."""
        points = np.asarray(points, dtype=np.complex128)
        return cls.build(points, spectral_derivative(points), check=check)


def spectral_derivative(values: ComplexArray) -> ComplexArray:
    m = values.shape[0]
    k = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        k[m // 2] = 0.0
    return np.fft.ifft(1j * k * np.fft.fft(values))


def enclosed_area(c: SampledCurve) -> float:
    """Green's-theorem area 1/2 * oint (x y' - x' y) dtheta by the trapezoid rule."""
    return float(0.5 * c.weight * np.sum(np.imag(np.conj(c.points) * c.dpoints)))


def _signed_area(w: ComplexArray, dw: ComplexArray) -> float:
    return float(0.5 * (2.0 * np.pi / w.shape[0]) * np.sum(np.imag(np.conj(w) * dw)))


# ---------------------------------------------------------------- central patch


def _outer_series(Q, eps, coeffs, b0, b1, z):
    """Unscaled map w(z) and its theta-derivative."""
    q = Q + eps * b1
    w = z + q / z + eps * b0
    dwdz = 1.0 - q / z**2
    for i, B in enumerate(coeffs):
        n = i + 2
        if B == 0.0:
            continue
        zn = z ** (-n)
        w = w + eps * B * zn
        dwdz = dwdz - eps * n * B * zn / z
    return w, 1j * z * dwdz


@dataclass(frozen=True)
class FourierBoundary:
    """Exterior conformal map of the central patch.

    ``coeffs`` are (B_2, ..., B_N). ``b1`` perturbs the ellipse mode Q/z and
    ``b0`` translates the patch; both are scaled by ``eps`` like the B_n.
    ``A`` is derived from the area constraint pi eps^2 (1 - Q^2).
    """

    Q: float
    eps: float
    coeffs: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    b0: float = 0.0
    b1: float = 0.0
    A: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.Q < 0.5):
            raise GeometryError(f"Q must lie in [0, 1/2), got {self.Q}")
        if not (self.eps >= 0.0 and np.isfinite(self.eps)):
            raise GeometryError(f"eps must be finite and >= 0, got {self.eps}")
        c = np.array(self.coeffs, dtype=np.float64).ravel()
        if not np.all(np.isfinite(c)):
            raise GeometryError("non-finite shape coefficient")
        object.__setattr__(self, "coeffs", c)
        if self.A is None:
            object.__setattr__(self, "A", _area_scale(self))
        elif not self.A > 0.0:
            raise GeometryError("A must be positive")

    @property
    def N(self) -> int:
        return len(self.coeffs) + 1

    def with_coeffs(self, coeffs=None, *, b0=None, b1=None, eps=None) -> "FourierBoundary":
        return FourierBoundary(
            self.Q,
            self.eps if eps is None else eps,
            self.coeffs if coeffs is None else coeffs,
            self.b0 if b0 is None else b0,
            self.b1 if b1 is None else b1,
        )

    def normalized(self, m: int) -> tuple[ComplexArray, ComplexArray]:
        """Samples of Phi/eps and its theta-derivative (finite at eps = 0)."""
        z = np.exp(1j * grid(m))
        w, dw = _outer_series(self.Q, self.eps, self.coeffs, self.b0, self.b1, z)
        return self.A * w, self.A * dw

    def to_json(self) -> dict:
        return {
            "Q": self.Q,
            "eps": self.eps,
            "A": self.A,
            "B": [float(x) for x in self.coeffs],
            "b0": self.b0,
            "b1": self.b1,
        }


def _area_scale(b: FourierBoundary) -> float:
    return _area_scale_raw(b.Q, b.eps, b.coeffs, b.b0, b.b1)


def _area_scale_raw(Q, eps, coeffs, b0, b1) -> float:
    m = _area_grid(len(coeffs) + 1)
    z = np.exp(1j * grid(m))
    w, dw = _outer_series(Q, eps, coeffs, b0, b1, z)
    area = _signed_area(w, dw)
    if area <= 0.0:
        raise GeometryError("perturbation too large: nonpositive enclosed area (A^2 <= 0)")
    return float(np.sqrt(np.pi * (1.0 - Q**2) / area))


def outer_samples_signed(b: FourierBoundary, eps: float, m: int):
    """Normalized samples of ``b`` at an arbitrary (possibly negative) eps.

    Used only to take symmetric differences about eps = 0.
    """
    z = np.exp(1j * grid(m))
    A = _area_scale_raw(b.Q, eps, b.coeffs, b.b0, b.b1)
    w, dw = _outer_series(b.Q, eps, b.coeffs, b.b0, b.b1, z)
    return A * w, A * dw


def renormalize_scale(b: FourierBoundary) -> FourierBoundary:
    """Return ``b`` with A recomputed so the enclosed area is pi eps^2 (1 - Q^2)."""
    return replace(b, A=_area_scale(replace(b, A=1.0)))


def area_scale_closed_form(b: FourierBoundary) -> float:
    """(1-Q^2) / (1 - q^2 - sum n c_n^2) with q = Q + eps b1, c_n = eps B_n.

    This is the square of the exact A (the area of an exterior map
    z + sum a_k z^-k is pi (1 - sum k a_k^2)).
    """
    q = b.Q + b.eps * b.b1
    n = np.arange(2, b.N + 1)
    s = 1.0 - q**2 - np.sum(n * (b.eps * b.coeffs) ** 2)
    if s <= 0.0:
        raise GeometryError("nonpositive area in closed form")
    return float((1.0 - b.Q**2) / s)


def eval_outer_map(b: FourierBoundary, m: int = DEFAULT_M) -> SampledCurve:
    if m < 4 * b.N:
        raise GeometryError(f"grid size m={m} must be >= 4 N = {4 * b.N}")
    if b.eps <= 0.0:
        raise GeometryError("physical boundary needs eps > 0")
    w, dw = b.normalized(m)
    return SampledCurve.build(b.eps * w, b.eps * dw, scale=b.A * b.eps)


# ---------------------------------------------------------------- satellites


def _inner_series(coeffs, z):
    w = z.copy()
    dwdz = np.ones_like(z)
    for i, a in enumerate(coeffs):
        n = i + 3
        if a == 0.0:
            continue
        w = w + a * z**n
        dwdz = dwdz + n * a * z ** (n - 1)
    return w, 1j * z * dwdz


def near_disk_scale(coeffs) -> float:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    m = _area_grid(len(coeffs) + 2)
    z = np.exp(1j * grid(m))
    w, dw = _inner_series(coeffs, z)
    area = _signed_area(w, dw)
    if area <= 0.0:
        raise GeometryError("near-disk shape has nonpositive area")
    return float(np.sqrt(np.pi / area))


@dataclass(frozen=True)
class NearDiskDomain:
    """Satellite domain ``center + orientation * a1 r (z + sum_{n>=3} A_n z^n)``."""

    center: complex
    r: float
    coeffs: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    orientation: int = 1
    a1: float | None = None

    def __post_init__(self):
        if not self.r > 0.0:
            raise GeometryError("radius must be positive")
        if self.orientation not in (1, -1):
            raise GeometryError("orientation must be +1 or -1")
        object.__setattr__(self, "center", complex(self.center))
        if abs(self.center) + 2.5 * self.r >= 1.0:
            raise GeometryError(
                f"domain leaves the disk: |center| + 2.5 r = {abs(self.center) + 2.5 * self.r:.6g} >= 1"
            )
        c = np.array(self.coeffs, dtype=np.float64).ravel()
        object.__setattr__(self, "coeffs", c)
        if self.a1 is None:
            object.__setattr__(self, "a1", near_disk_scale(c))

    @property
    def N(self) -> int:
        return len(self.coeffs) + 2

    def normalized(self, m: int) -> tuple[ComplexArray, ComplexArray]:
        """Shape about the center at unit scale: (Gamma - x)/r and its derivative."""
        z = np.exp(1j * grid(m))
        w, dw = _inner_series(self.coeffs, z)
        s = self.orientation * self.a1
        return s * w, s * dw


def eval_near_disk_map(d: NearDiskDomain, m: int = DEFAULT_M) -> SampledCurve:
    if m < 4 * d.N:
        raise GeometryError(f"grid size m={m} must be >= 4 N = {4 * d.N}")
    w, dw = d.normalized(m)
    return SampledCurve.build(d.center + d.r * w, d.r * dw, scale=d.a1 * d.r)


# ---------------------------------------------------------------- I/O


def write_boundary_csv(path, c: SampledCurve, velocity: ComplexArray | None = None) -> None:
    cols = ["theta", "x", "y", "nx", "ny"]
    if velocity is not None:
        cols += ["u_x", "u_y"]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(cols)
        for k in range(c.m):
            row = [c.thetas[k], c.points[k].real, c.points[k].imag, c.normals[k].real, c.normals[k].imag]
            if velocity is not None:
                row += [velocity[k].real, velocity[k].imag]
            wr.writerow([f"{v:.12g}" for v in row])


def read_boundary_csv(path) -> ComplexArray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise GeometryError(f"{path}: empty boundary file")
    return np.array([float(r["x"]) + 1j * float(r["y"]) for r in rows])


def write_coeffs_json(path, b: FourierBoundary) -> None:
    Path(path).write_text(json.dumps(b.to_json(), indent=2, sort_keys=True) + "\n")
