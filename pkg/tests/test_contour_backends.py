import numpy as np

from rotpatch import _contour
from rotpatch.geometry import NearDiskDomain, eval_near_disk_map


def test_backends_agree(rng):
    c = eval_near_disk_map(NearDiskDomain(0.2 - 0.1j, 0.2, [0.05, -0.02]), 128)
    z = 0.5 * np.exp(2j * np.pi * rng.uniform(size=37))
    res = {}
    for name in ("numpy", "numba"):
        f_self, f_tgt, f_img = _contour.BACKENDS[name]
        res[name] = (f_self(c.points, c.dpoints), f_tgt(c.points, c.dpoints, z), f_img(c.points, c.dpoints, z))
    for a, b in zip(res["numpy"], res["numba"]):
        assert np.max(np.abs(a - b)) < 1e-12 * max(1.0, np.max(np.abs(a)))


def test_use_backend_switch():
    prev = _contour.BACKEND
    try:
        _contour.use_backend("numpy")
        assert _contour.BACKEND == "numpy"
    finally:
        _contour.use_backend(prev)


def test_numpy_chunks_cover_large_inputs():
    m = 1100  # more than one chunk
    t = 2 * np.pi * np.arange(m) / m
    xi = 0.3 * np.exp(1j * t)
    dxi = 1j * xi
    a = _contour._self_sum_numpy(xi, dxi)
    b = _contour._self_sum_numba(xi, dxi)
    assert np.max(np.abs(a - b)) < 1e-10
