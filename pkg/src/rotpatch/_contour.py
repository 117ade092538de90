"""Hot O(m^2) contour sums behind the patch velocity.

Each sum is the trapezoid rule (without the 2*pi/m weight) over the nodes
``xi`` of one closed curve with theta-derivatives ``dxi``:

* ``self_sum``    conj(xi_k - xi_j)/(xi_k - xi_j) * dxi_k at the curve's own
                  nodes, diagonal replaced by its limit conj(dxi_j);
* ``target_sum``  the same kernel at off-curve targets;
* ``image_sum``   |xi_k|^2 / (1 - conj(z) xi_k) * dxi_k at arbitrary targets.

Two implementations live side by side; the module-level names point at the
numba kernels unless ``ROTPATCH_NUMBA=0``.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit, prange

_CHUNK = 512


def _self_sum_numpy(xi, dxi):
    m = xi.shape[0]
    out = np.empty(m, dtype=np.complex128)
    for s in range(0, m, _CHUNK):
        rows = slice(s, min(s + _CHUNK, m))
        d = xi[None, :] - xi[rows, None]
        idx = np.arange(rows.start, rows.stop)
        d[idx - rows.start, idx] = 1.0
        k = np.conj(d) / d * dxi[None, :]
        k[idx - rows.start, idx] = np.conj(dxi[idx])
        out[rows] = k.sum(axis=1)
    return out


def _target_sum_numpy(xi, dxi, z):
    out = np.empty(z.shape[0], dtype=np.complex128)
    for s in range(0, z.shape[0], _CHUNK):
        rows = slice(s, min(s + _CHUNK, z.shape[0]))
        d = xi[None, :] - z[rows, None]
        out[rows] = (np.conj(d) / d * dxi[None, :]).sum(axis=1)
    return out


def _image_sum_numpy(xi, dxi, z):
    w = np.abs(xi) ** 2 * dxi
    out = np.empty(z.shape[0], dtype=np.complex128)
    for s in range(0, z.shape[0], _CHUNK):
        rows = slice(s, min(s + _CHUNK, z.shape[0]))
        out[rows] = (w[None, :] / (1.0 - np.conj(z[rows, None]) * xi[None, :])).sum(axis=1)
    return out


@njit(cache=True, parallel=True, fastmath=False)
def _self_sum_numba(xi, dxi):
    m = xi.shape[0]
    out = np.empty(m, dtype=np.complex128)
    for j in prange(m):
        zj = xi[j]
        acc = 0.0 + 0.0j
        for k in range(m):
            if k == j:
                acc += np.conj(dxi[k])
            else:
                d = xi[k] - zj
                acc += np.conj(d) / d * dxi[k]
        out[j] = acc
    return out


@njit(cache=True, parallel=True, fastmath=False)
def _target_sum_numba(xi, dxi, z):
    n = z.shape[0]
    m = xi.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for j in prange(n):
        zj = z[j]
        acc = 0.0 + 0.0j
        for k in range(m):
            d = xi[k] - zj
            acc += np.conj(d) / d * dxi[k]
        out[j] = acc
    return out


@njit(cache=True, parallel=True, fastmath=False)
def _image_sum_numba(xi, dxi, z):
    n = z.shape[0]
    m = xi.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for j in prange(n):
        cz = np.conj(z[j])
        acc = 0.0 + 0.0j
        for k in range(m):
            a = xi[k].real * xi[k].real + xi[k].imag * xi[k].imag
            acc += a / (1.0 - cz * xi[k]) * dxi[k]
        out[j] = acc
    return out


BACKENDS = {
    "numpy": (_self_sum_numpy, _target_sum_numpy, _image_sum_numpy),
    "numba": (_self_sum_numba, _target_sum_numba, _image_sum_numba),
}

BACKEND = "numba" if USE_NUMBA else "numpy"
_impl = BACKENDS[BACKEND]


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def self_sum(xi, dxi):
    return _impl[0](_c(xi), _c(dxi))


def target_sum(xi, dxi, z):
    return _impl[1](_c(xi), _c(dxi), _c(np.atleast_1d(z)))


def image_sum(xi, dxi, z):
    return _impl[2](_c(xi), _c(dxi), _c(np.atleast_1d(z)))


def use_backend(name: str) -> None:
    """Switch the active implementation ("numpy" or "numba") at runtime."""
    global BACKEND, _impl
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    _impl = BACKENDS[name]
