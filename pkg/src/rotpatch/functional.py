"""Steady-state residual of a single rapidly rotating patch and its linearization.

With lam = 1/(pi eps^2) and Omega = (1-Q^2)/(4 pi eps^2), the residual at the
node z = e^{i theta} is

    F(theta) = Im( (2 Omega conj(Phi) + I(Phi)) z Phi'(z) ) / eps,
    I = -2 i conj(u),

i.e. minus twice the rotating-frame normal velocity weighted by |Phi'|,
divided by eps. Everything is evaluated in the rescaled variable Phi/eps so
that the eps -> 0 limit is finite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import _contour
from .geometry import DEFAULT_M, FourierBoundary, outer_samples_signed

DEFAULT_S = 2.0
_LIMIT_STEP = 1e-5


@dataclass(frozen=True)
class SineSpectrum:
    """sin(n theta) components b_1..b_K of an odd residual, plus leak diagnostics."""

    coeffs: NDArray[np.float64]
    cos_leak: float = 0.0
    alias: float = 0.0
    cos_coeffs: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0), repr=False)

    def norm(self, s: float = DEFAULT_S) -> float:
        n = np.arange(1, len(self.coeffs) + 1)
        return float(np.sqrt(np.sum(n ** (2 * (s - 1)) * self.coeffs**2)))

    def __len__(self):
        return len(self.coeffs)


def project(values, modes: int) -> SineSpectrum:
    """Project nodal values onto sin/cos n theta for n = 1..modes by FFT."""
    values = np.asarray(values, dtype=np.float64)
    m = values.shape[0]
    if modes > m // 2 - 1:
        raise ValueError(f"{modes} modes need a grid larger than {m}")
    fh = np.fft.rfft(values) / m
    b = -2.0 * fh.imag
    a = 2.0 * fh.real
    total = np.sqrt(np.sum(np.abs(fh[1:]) ** 2)) or 1.0
    alias = float(np.sqrt(np.sum(np.abs(fh[m // 4:]) ** 2)) / total)
    cos = a[1 : modes + 1]
    return SineSpectrum(b[1 : modes + 1].copy(), float(np.max(np.abs(cos), initial=0.0)), alias, cos.copy())


def scaled_residual(W, dW, eps: float, omega_n: float, conj_u_n):
    """Nodal residual from normalized geometry and normalized conj(velocity)."""
    P = np.imag((2.0 * omega_n * np.conj(W) - 2j * conj_u_n) * (-1j * dW))
    return P / eps


def _self_conj_velocity_normalized(W, dW, eps: float, image: bool):
    h = 2.0 * np.pi / W.shape[0]
    s = _contour.self_sum(W, dW)
    if image and eps > 0.0:
        # image of the physical curve eps*W, rescaled to normalized units
        t = _contour.image_sum(eps * W, eps * dW, eps * W)
        s = s + np.conj(t) / eps
    return h * s / (4.0 * np.pi**2)


def omega_normalized(Q: float) -> float:
    return (1.0 - Q**2) / (4.0 * np.pi)


def residual_values(b: FourierBoundary, m: int = DEFAULT_M, *, image: bool = True, external=None):
    """Nodal residual F(theta_k).

    ``external`` optionally adds a conj-velocity (normalized units) from other
    vorticity. At eps = 0 the analytic limit is taken, which is the Frechet
    derivative of the free-space functional at the ellipse along the
    perturbation, evaluated by a symmetric difference.
    """
    if m < 4 * b.N:
        raise ValueError(f"grid size m={m} must be >= 4 N = {4 * b.N}")
    om = omega_normalized(b.Q)
    if b.eps > 0.0:
        W, dW = b.normalized(m)
        cu = _self_conj_velocity_normalized(W, dW, b.eps, image)
        if external is not None:
            cu = cu + external
        return scaled_residual(W, dW, b.eps, om, cu)
    if not (np.any(b.coeffs) or b.b0 or b.b1):
        return np.zeros(m)
    out = []
    for t in (_LIMIT_STEP, -_LIMIT_STEP):
        W, dW = outer_samples_signed(b, t, m)
        cu = _self_conj_velocity_normalized(W, dW, 0.0, False)
        out.append(np.imag((2.0 * om * np.conj(W) - 2j * cu) * (-1j * dW)))
    return (out[0] - out[1]) / (2.0 * _LIMIT_STEP)


def residual_single(b: FourierBoundary, m: int = DEFAULT_M, modes: int | None = None, *, image: bool = True) -> SineSpectrum:
    """Sine spectrum b_1..b_modes of the single-patch residual (default modes = N + 1)."""
    if modes is None:
        modes = b.N + 1
    return project(residual_values(b, m, image=image), modes)


# ---------------------------------------------------------------- linearization


def invertibility_factor(Q, n):
    """(1-Q^2) n / 2 - 1 - Q^n."""
    return (1.0 - Q**2) * n / 2.0 - 1.0 - Q**n


def invertibility_margin(Q: float, N: int = 64) -> float:
    """min over 3 <= n <= N of the invertibility factor."""
    n = np.arange(3, N + 1)
    return float(np.min(invertibility_factor(Q, n)))


@dataclass(frozen=True)
class LinearizedOperator:
    """Matrix from (B_2..B_N) to sin(n theta) components, rows n = 1..N."""

    matrix: NDArray[np.float64]
    label: str = ""

    @property
    def N(self) -> int:
        return self.matrix.shape[1] + 1

    @property
    def bandwidth(self) -> int:
        """Largest |row - col| offset with a nonzero entry (row n <-> column B_{n+1})."""
        r, c = np.nonzero(self.matrix)
        return int(np.max(np.abs(r - c), initial=0))

    def apply(self, coeffs) -> NDArray[np.float64]:
        return self.matrix @ np.asarray(coeffs, dtype=np.float64)


def linearization_analytic(Q: float, N: int) -> LinearizedOperator:
    """Reference closed form of the spectrum:

    y_2 = -(1+Q)^2 B_2 / 2pi,  y_3 = -2 Q^2 B_3 / pi,
    y_{n+1} = f_n (B_{n+1} - Q B_{n-1}) / pi,   n >= 3,

    with y_{n+1} the sin(n theta) component.
    """
    L = np.zeros((N, N - 1))
    L[0, 0] = -((1.0 + Q) ** 2) / (2.0 * np.pi)
    if N >= 3:
        L[1, 1] = -2.0 * Q**2 / np.pi
    for n in range(3, N + 1):
        f = invertibility_factor(Q, n) / np.pi
        if n + 1 <= N:
            L[n - 1, n - 1] = f
        L[n - 1, n - 3] = -Q * f
    return LinearizedOperator(L, "printed")


def linearization_derived(Q: float, N: int) -> LinearizedOperator:
    """Linearization of this residual at the ellipse, in closed form.

    sin(theta):   -Q (1+Q)^2 B_2 / 2pi
    sin(2 theta): -2 Q^3 B_3 / pi
    sin(n theta): f_n (Q B_{n+1} - B_{n-1}) / pi,   n >= 3.

    Same band and the same factor f_n = (1-Q^2) n/2 - 1 - Q^n as the reference
    form, but B_{n-1} (an n-fold mode) drives sin(n theta), as rotational
    symmetry at Q = 0 requires.
    """
    L = np.zeros((N, N - 1))
    L[0, 0] = -Q * (1.0 + Q) ** 2 / (2.0 * np.pi)
    if N >= 3:
        L[1, 1] = -2.0 * Q**3 / np.pi
    for n in range(3, N + 1):
        f = invertibility_factor(Q, n) / np.pi
        L[n - 1, n - 3] = -f
        if n + 1 <= N:
            L[n - 1, n - 1] = Q * f
    return LinearizedOperator(L, "derived")


def jacobian_numeric(
    b: FourierBoundary,
    h: float = 1e-6,
    m: int = DEFAULT_M,
    modes: int | None = None,
    *,
    include_low: bool = False,
    image: bool = True,
) -> NDArray[np.float64]:
    """Central-difference Jacobian of the sine spectrum.

    Columns are B_2..B_N, preceded by b0 and b1 when ``include_low``. Rows are
    sin(n theta), n = 1..modes (default N).
    """
    if modes is None:
        modes = b.N
    base = np.concatenate(([b.b0, b.b1], b.coeffs)) if include_low else b.coeffs.copy()
    J = np.empty((modes, base.size))
    for k in range(base.size):
        step = h * max(1.0, abs(base[k]))
        if step < 1e-14:
            raise ValueError("finite-difference step underflow")
        cols = []
        for sgn in (1.0, -1.0):
            x = base.copy()
            x[k] += sgn * step
            bb = (
                b.with_coeffs(x[2:], b0=x[0], b1=x[1]) if include_low else b.with_coeffs(x)
            )
            cols.append(residual_single(bb, m, modes, image=image).coeffs)
        J[:, k] = (cols[0] - cols[1]) / (2.0 * step)
    return J
