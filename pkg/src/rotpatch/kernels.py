"""Dirichlet Green's function of the unit disk and patch velocities.

Complex notation throughout: a point is ``x1 + i x2`` and a velocity is
``u1 + i u2``. For a patch of vorticity ``lam`` on K,

    conj(u(z)) = lam/(4 pi) [ oint (conj(xi) - conj(z))/(xi - z) dxi
                              + conj( oint |xi|^2 / (1 - conj(z) xi) dxi ) ],

the first term being the free-space field and the second its image in the
unit circle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _contour
from .geometry import SampledCurve, grid

INV_2PI = 1.0 / (2.0 * np.pi)


def _check_inside(*pts):
    for p in pts:
        if np.any(np.abs(p) >= 1.0):
            raise ValueError("points must lie in the open unit disk")


def green_disk(x, y):
    """G(x, y) = -(1/2pi) log|x-y| + (1/2pi) log|1 - x conj(y)|.

    Evaluated as (1/4pi) log1p((1-|x|^2)(1-|y|^2)/|x-y|^2), which is
    symmetric by construction and accurate up to the boundary.
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    _check_inside(x, y)
    d2 = np.abs(x - y) ** 2
    if np.any(d2 == 0.0):
        raise ValueError("green_disk is singular at x = y")
    val = np.log1p((1.0 - np.abs(x) ** 2) * (1.0 - np.abs(y) ** 2) / d2) / (4.0 * np.pi)
    return val[()] if val.ndim == 0 else val


def robin_regular_part(x, y):
    """Regular part h(x, y) = (1/2pi) log|1 - x conj(y)| and its x-gradient.

    The gradient is returned as the complex number dh/dx1 + i dh/dx2.
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    w = 1.0 - x * np.conj(y)
    if np.any(np.abs(w) < 1e-300) or np.any(np.isclose(np.abs(x * np.conj(y)), 1.0, rtol=0, atol=1e-15)):
        raise ValueError("image singularity: |x conj(y)| = 1")
    h = INV_2PI * np.log(np.abs(w))
    grad = -y * INV_2PI / np.conj(w)
    if h.ndim == 0:
        return h[()], grad[()]
    return h, grad


def robin_function(x):
    """h(x, x) = (1/2pi) log(1 - |x|^2)."""
    x = np.asarray(x, dtype=np.complex128)
    _check_inside(x)
    return INV_2PI * np.log1p(-np.abs(x) ** 2)


def point_vortex_velocity(gamma: float, y: complex, z, image: bool = True):
    """Velocity at ``z`` of a point vortex of circulation ``gamma`` at ``y``."""
    z = np.asarray(z, dtype=np.complex128)
    cu = 1.0 / (z - y)
    if image:
        cu = cu + np.conj(y) / (1.0 - z * np.conj(y))
    return np.conj(-1j * gamma * INV_2PI * cu)


@dataclass(frozen=True)
class PatchSource:
    """Uniform vorticity ``strength`` on the interior of ``curve``."""

    curve: SampledCurve
    strength: float

    def __post_init__(self):
        if not np.isfinite(self.strength):
            raise ValueError("patch strength must be finite")

    @property
    def circulation(self) -> float:
        from .geometry import enclosed_area

        return self.strength * enclosed_area(self.curve)


def _conj_velocity(src: PatchSource, z, *, self_nodes: bool, image: bool):
    c = src.curve
    if self_nodes:
        s = _contour.self_sum(c.points, c.dpoints)
    else:
        s = _contour.target_sum(c.points, c.dpoints, z)
    if image:
        s = s + np.conj(_contour.image_sum(c.points, c.dpoints, z))
    return src.strength / (4.0 * np.pi) * c.weight * s


def patch_velocity(src: PatchSource, z, on_curve_index=None, *, image: bool = True):
    """Velocity induced at ``z`` by a patch in the disk (free space if not ``image``).

    ``z`` may be an array. Targets lying on ``src.curve`` must be identified
    by ``on_curve_index`` (same shape as ``z``, or "all" for every node in
    order); the self-interaction diagonal then uses its removable limit.
    """
    if isinstance(on_curve_index, str):
        if on_curve_index != "all":
            raise ValueError("on_curve_index must be an index array or 'all'")
        pts = src.curve.points
        return np.conj(_conj_velocity(src, pts, self_nodes=True, image=image))
    z_arr = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if image and np.any(np.abs(z_arr) > 1.0 + 1e-14):
        raise ValueError("target outside the closed unit disk")
    if on_curve_index is None:
        out = np.conj(_conj_velocity(src, z_arr, self_nodes=False, image=image))
    else:
        idx = np.atleast_1d(np.asarray(on_curve_index, dtype=int))
        full = np.conj(_conj_velocity(src, src.curve.points, self_nodes=True, image=image))
        out = full[idx]
    return out[0] if np.ndim(z) == 0 and out.shape == (1,) else out


def velocity_on_curves(sources: Sequence[PatchSource], *, image: bool = True) -> list[np.ndarray]:
    """Total velocity at every node of every source curve."""
    out = []
    for i, tgt in enumerate(sources):
        z = tgt.curve.points
        cu = np.zeros(z.shape[0], dtype=np.complex128)
        for j, src in enumerate(sources):
            if src.strength == 0.0:
                continue
            cu += _conj_velocity(src, z, self_nodes=(i == j), image=image)
        out.append(np.conj(cu))
    return out


def velocity_at(sources: Sequence[PatchSource], z, *, image: bool = True) -> np.ndarray:
    """Total velocity at off-curve targets."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    cu = np.zeros(z.shape[0], dtype=np.complex128)
    for src in sources:
        if src.strength != 0.0:
            cu += _conj_velocity(src, z, self_nodes=False, image=image)
    return np.conj(cu)


def tangency_check(src: PatchSource, m_bnd: int = 256, *, image: bool = True) -> float:
    """max |u . N| over m_bnd points of the unit circle."""
    zb = np.exp(1j * grid(m_bnd))
    u = velocity_at([src], zb, image=image)
    return float(np.max(np.abs(np.real(np.conj(u) * zb))))


def circulation(sources: Sequence[PatchSource], radius: float, m: int = 512, center: complex = 0.0, *, image: bool = True):
    """(circulation, flux) of the velocity around a circle."""
    e = np.exp(1j * grid(m))
    z = center + radius * e
    u = velocity_at(sources, z, image=image)
    dz = 1j * radius * e
    h = 2.0 * np.pi / m
    circ = h * np.sum(np.real(np.conj(u) * dz))
    flux = h * np.sum(np.real(np.conj(u) * (-1j) * dz))
    return float(circ), float(flux)
