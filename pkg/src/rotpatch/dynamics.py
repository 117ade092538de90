"""Contour dynamics in the disk: RK4 on boundary nodes with arclength regridding."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .geometry import GeometryError, SampledCurve, enclosed_area, grid, spectral_derivative
from .kernels import PatchSource, velocity_on_curves


class CollisionError(RuntimeError):
    """Two curves (or a curve and the wall) came closer than the node spacing allows."""


class CFLWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PatchState:
    curves: tuple[SampledCurve, ...]
    strengths: tuple[float, ...]
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "strengths", tuple(float(s) for s in self.strengths))
        if len(self.curves) != len(self.strengths):
            raise ValueError("one strength per curve")

    @classmethod
    def from_points(cls, points: Sequence, strengths: Sequence[float], time: float = 0.0) -> "PatchState":
        return cls(tuple(SampledCurve.from_points(p) for p in points), strengths, time)

    @property
    def areas(self) -> list[float]:
        return [enclosed_area(c) for c in self.curves]


@dataclass
class EvolutionLog:
    times: list[float] = field(default_factory=list)
    area_drift: list[float] = field(default_factory=list)
    perimeter: list[list[float]] = field(default_factory=list)
    min_boundary_distance: list[float] = field(default_factory=list)
    min_separation: list[float] = field(default_factory=list)
    halted: bool = False
    reason: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _curve(points) -> SampledCurve:
    return SampledCurve.build(points, spectral_derivative(points), check=False)


def boundary_velocity(state: PatchState, *, image: bool = True) -> list[np.ndarray]:
    """Velocity of all patches (with images) at every node of every curve."""
    sources = [PatchSource(c, s) for c, s in zip(state.curves, state.strengths)]
    if not any(s != 0.0 for s in state.strengths):
        return [np.zeros(c.m, dtype=np.complex128) for c in state.curves]
    return velocity_on_curves(sources, image=image)


def perimeter(points) -> float:
    dp = spectral_derivative(np.asarray(points, dtype=np.complex128))
    return float(2.0 * np.pi / len(points) * np.sum(np.abs(dp)))


def _node_spacing(points) -> float:
    return float(np.max(np.abs(np.roll(points, -1) - points)))


def check_collision(curves: Sequence[np.ndarray]) -> tuple[float, float]:
    """Raise CollisionError on near-contact; return (min wall distance, min separation)."""
    wall = min(1.0 - float(np.max(np.abs(p))) for p in curves)
    sep = math.inf
    for p in curves:
        if wall < 3.0 * _node_spacing(p) or wall <= 0.0:
            raise CollisionError(f"curve within {wall:.3e} of the boundary")
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            d = float(np.min(np.abs(curves[i][:, None] - curves[j][None, :])))
            sep = min(sep, d)
            if d < 3.0 * max(_node_spacing(curves[i]), _node_spacing(curves[j])):
                raise CollisionError(f"curves {i} and {j} within {d:.3e}")
    return wall, sep


# ---------------------------------------------------------------- trig interpolation


def _fourier(points):
    m = points.shape[0]
    c = np.fft.fft(points) / m
    k = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        # split the Nyquist mode symmetrically so the interpolant is real-consistent
        c = np.append(c, c[m // 2] / 2)
        c[m // 2] /= 2
        k = np.append(k, m // 2)
        k[m // 2] = -m // 2
    return c, k


def _interp(c, k, theta, order: int = 0):
    e = np.exp(1j * np.outer(theta, k))
    return e @ (c * (1j * k) ** order)


def redistribute(points) -> np.ndarray:
    """Resample a closed curve at equal arclength, keeping node 0 fixed."""
    points = np.asarray(points, dtype=np.complex128)
    m = points.shape[0]
    c, k = _fourier(points)
    th = grid(m)
    speed = np.abs(_interp(c, k, th, 1))
    L = 2.0 * np.pi * np.mean(speed)
    sh = np.fft.fft(speed) / m
    kk = np.fft.fftfreq(m, d=1.0 / m)
    with np.errstate(divide="ignore", invalid="ignore"):
        ih = np.where(kk != 0, sh / (1j * kk), 0.0)
    ih[m // 2] = 0.0

    def s_of(t):
        per = np.real(np.exp(1j * np.outer(t, kk)) @ ih)
        per0 = np.real(np.sum(ih))
        return L * t / (2.0 * np.pi) + per - per0

    def speed_at(t):
        return np.real(np.exp(1j * np.outer(t, kk)) @ sh)

    target = L * th / (2.0 * np.pi)
    t = th.copy()
    for _ in range(30):
        dt = (s_of(t) - target) / speed_at(t)
        t -= dt
        if np.max(np.abs(dt)) < 1e-15:
            break
    return _interp(c, k, t)


def _distance_to_curve(p, curve_pts):
    """Distance from each point of ``p`` to the trig interpolant of ``curve_pts``."""
    c, k = _fourier(curve_pts)
    m = curve_pts.shape[0]
    th = grid(m)
    d0 = np.abs(p[:, None] - curve_pts[None, :])
    t = th[np.argmin(d0, axis=1)]
    for _ in range(20):
        z = _interp(c, k, t)
        z1 = _interp(c, k, t, 1)
        z2 = _interp(c, k, t, 2)
        g = np.real(np.conj(z - p) * z1)
        gp = np.abs(z1) ** 2 + np.real(np.conj(z - p) * z2)
        step = g / gp
        t -= np.clip(step, -np.pi / m, np.pi / m)
        if np.max(np.abs(step)) < 1e-14:
            break
    return np.abs(_interp(c, k, t) - p)


def hausdorff(a, b) -> float:
    """Hausdorff distance between two closed curves given by equispaced samples."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return float(max(np.max(_distance_to_curve(a, b)), np.max(_distance_to_curve(b, a))))


def _points(c):
    return c.points if isinstance(c, SampledCurve) else np.asarray(c, dtype=np.complex128)


def rigid_rotation_error(initial, evolved, Omega: float, t: float) -> float:
    """Hausdorff distance to the initial curve rotated by Omega t, over its diameter."""
    a = _points(initial)
    b = _points(evolved)
    if a.shape != b.shape:
        raise ValueError("curves must have the same node count")
    diam = float(np.max(np.abs(a[:, None] - a[None, :])))
    return hausdorff(a * np.exp(1j * Omega * t), b) / diam


# ---------------------------------------------------------------- time stepping


def _rhs(pts: list[np.ndarray], strengths, image):
    curves = tuple(_curve(p) for p in pts)
    return boundary_velocity(PatchState(curves, strengths), image=image)


def evolve(
    state: PatchState,
    dt: float,
    T: float,
    scheme: str = "rk4",
    *,
    omega: float | None = None,
    image: bool = True,
    regrid: bool = True,
    frames: int = 0,
) -> tuple[PatchState, EvolutionLog] | tuple[PatchState, EvolutionLog, list[PatchState]]:
    """Advance node positions with classical RK4 up to time ``T``.

    The step is shrunk to T/ceil(T/dt) so the horizon is hit exactly. Nodes
    are returned to equal arclength after every step when ``regrid``. When
    ``frames`` > 0, that many evenly spaced snapshots are also returned.
    """
    if scheme.lower() != "rk4":
        raise ValueError(f"unsupported scheme {scheme!r}")
    if not (dt > 0.0 and T >= 0.0):
        raise ValueError("need dt > 0 and T >= 0")
    lam = max((abs(s) for s in state.strengths), default=0.0)
    om = omega if omega is not None else lam / 4.0
    if om > 0.0 and dt > 0.05 / om:
        warnings.warn(f"dt = {dt:.3e} exceeds 0.05/Omega = {0.05 / om:.3e}", CFLWarning, stacklevel=2)
    n = int(math.ceil(T / dt - 1e-12)) if T > 0 else 0
    h = T / n if n else 0.0
    strengths = state.strengths
    pts = [c.points.copy() for c in state.curves]
    a0 = np.array([enclosed_area(c) for c in state.curves])
    log = EvolutionLog()
    snaps = []
    every = max(1, n // frames) if frames else 0

    def record(t):
        areas = np.array([enclosed_area(_curve(p)) for p in pts])
        with np.errstate(divide="ignore", invalid="ignore"):
            drift = np.where(a0 != 0, np.abs(areas - a0) / np.abs(a0), 0.0)
        wall, sep = check_collision(pts)
        log.times.append(t)
        log.area_drift.append(float(np.max(drift)) if drift.size else 0.0)
        log.perimeter.append([perimeter(p) for p in pts])
        log.min_boundary_distance.append(wall)
        log.min_separation.append(sep if math.isfinite(sep) else -1.0)

    record(state.time)
    if frames:
        snaps.append(state)
    t = state.time
    for step in range(n):
        try:
            k1 = _rhs(pts, strengths, image)
            k2 = _rhs([p + 0.5 * h * k for p, k in zip(pts, k1)], strengths, image)
            k3 = _rhs([p + 0.5 * h * k for p, k in zip(pts, k2)], strengths, image)
            k4 = _rhs([p + h * k for p, k in zip(pts, k3)], strengths, image)
            pts = [p + h / 6.0 * (a + 2 * b + 2 * c + d) for p, a, b, c, d in zip(pts, k1, k2, k3, k4)]
            if regrid:
                pts = [redistribute(p) for p in pts]
            t = state.time + (step + 1) * h
            record(t)
        except (CollisionError, GeometryError) as exc:
            log.halted = True
            log.reason = str(exc)
            break
        if frames and (step + 1) % every == 0:
            snaps.append(PatchState(tuple(_curve(p) for p in pts), strengths, t))
    out = PatchState(tuple(_curve(p) for p in pts), strengths, t)
    if frames:
        return out, log, snaps
    return out, log
