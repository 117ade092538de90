"""Central patch plus two satellites near the boundary (the 2+1 configuration).

Satellite j sits on the horizontal axis at

    x_j = s_j (1 - c_d r0^2 (1 + r0^2 y_j)),   s_1 = +1, s_2 = -1,

and carries total vorticity mu. The configuration rotates at

    Omega = (1 - Q^2)/(4 pi r0^2) + mu/(4 pi).

Residuals:

* F0 is the single-patch functional of the central patch (eps = r0) with the
  satellites' velocity added, so that mu -> 0 gives back the single patch.
* F_j = -(u - i Omega z) . n on the boundary of satellite j, in physical
  units: minus the tangential derivative of the relative stream function.
  Its sin(theta) component balances the position unknown y_j and its
  sin(n theta) component the shape coefficient A_{n+1}.

All velocities, including satellite-on-satellite, come from the contour
formula of ``kernels``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from .functional import (
    DEFAULT_S,
    LinearizedOperator,
    SineSpectrum,
    project,
    scaled_residual,
)
from .geometry import (
    DEFAULT_M,
    FourierBoundary,
    GeometryError,
    NearDiskDomain,
    SampledCurve,
    eval_near_disk_map,
)
from .kernels import PatchSource, velocity_on_curves
from .solver import SolveReport, newton_solve

# leading distance coefficient c_d in units of mu/(1 - Q^2)
C_MODES = {
    "balance": 1.0,  # point-vortex balance of the boundary image against Omega
    "double": 2.0,
    "two_pi": 2.0 * np.pi,
}

DEFAULT_N_MULTI = 16


class ExtrapolationError(RuntimeError):
    pass


def distance_coefficient(Q: float, mu: float, mode: str = "balance") -> float:
    if mode not in C_MODES:
        raise ValueError(f"unknown c_d mode {mode!r}; choose from {sorted(C_MODES)}")
    return C_MODES[mode] * mu / (1.0 - Q**2)


@dataclass(frozen=True)
class MultiConfig:
    """Full 2+1 state. ``beta1``/``beta2`` are satellite shape coefficients (A_3, ...)."""

    Q: float
    mu: float
    radii: tuple[float, float, float]
    Y: tuple[float, float] = (0.0, 0.0)
    beta0: FourierBoundary | None = None
    beta1: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    beta2: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    c_mode: str = "balance"
    c_d: float | None = None

    def __post_init__(self):
        r0, r1, r2 = (float(r) for r in self.radii)
        object.__setattr__(self, "radii", (r0, r1, r2))
        if not (0.0 < r0 < 1.0):
            raise GeometryError("r0 must lie in (0, 1)")
        if not (0.0 < r1 < r0**2 / 2 and 0.0 < r2 < r0**2 / 2):
            raise GeometryError("satellite radii must satisfy 0 < r_j < r0^2/2")
        if not (self.mu >= 0.0 and np.isfinite(self.mu)):
            raise GeometryError("mu must be finite and >= 0")
        object.__setattr__(self, "Y", (float(self.Y[0]), float(self.Y[1])))
        if self.c_d is None:
            if self.mu == 0.0:
                raise GeometryError("mu = 0 needs an explicit c_d to place the satellites")
            object.__setattr__(self, "c_d", distance_coefficient(self.Q, self.mu, self.c_mode))
        b0 = self.beta0
        if b0 is None:
            b0 = FourierBoundary(self.Q, r0, np.zeros(DEFAULT_N_MULTI - 1))
        elif b0.Q != self.Q or b0.eps != r0:
            raise GeometryError("beta0 must carry the same Q and eps = r0")
        object.__setattr__(self, "beta0", b0)
        for name in ("beta1", "beta2"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=np.float64).ravel())
        if len(self.beta1) != len(self.beta2):
            raise GeometryError("satellite shapes must have equal length")
        self.satellites()  # containment

    @property
    def r0(self) -> float:
        return self.radii[0]

    @property
    def Omega(self) -> float:
        return (1.0 - self.Q**2) / (4.0 * np.pi * self.r0**2) + self.mu / (4.0 * np.pi)

    @property
    def N_sat(self) -> int:
        return len(self.beta1) + 2

    @property
    def centers(self) -> tuple[float, float]:
        r0 = self.r0
        return tuple(s * (1.0 - self.c_d * r0**2 * (1.0 + r0**2 * y)) for s, y in zip((1.0, -1.0), self.Y))

    @property
    def strengths(self) -> tuple[float, float, float]:
        r0, r1, r2 = self.radii
        return (1.0 / (np.pi * r0**2), self.mu / (np.pi * r1**2), self.mu / (np.pi * r2**2))

    def satellites(self) -> tuple[NearDiskDomain, NearDiskDomain]:
        x1, x2 = self.centers
        return (
            NearDiskDomain(x1, self.radii[1], self.beta1, orientation=1),
            NearDiskDomain(x2, self.radii[2], self.beta2, orientation=-1),
        )

    def unknowns(self) -> np.ndarray:
        b = self.beta0
        return np.concatenate(([b.b0, b.b1], b.coeffs, [self.Y[0]], self.beta1, [self.Y[1]], self.beta2))

    def with_unknowns(self, x) -> "MultiConfig":
        x = np.asarray(x, dtype=np.float64)
        nc = self.beta0.N + 1
        ns = len(self.beta1) + 1
        c, s1, s2 = x[:nc], x[nc : nc + ns], x[nc + ns :]
        if s2.size != ns:
            raise ValueError("unknown vector has the wrong length")
        b0 = FourierBoundary(self.Q, self.r0, c[2:], b0=c[0], b1=c[1])
        return replace(self, beta0=b0, Y=(s1[0], s2[0]), beta1=s1[1:], beta2=s2[1:])

    def to_json(self) -> dict:
        return {
            "Q": self.Q,
            "mu": self.mu,
            "radii": list(self.radii),
            "Y": list(self.Y),
            "Omega": self.Omega,
            "c_d": self.c_d,
            "c_mode": self.c_mode,
            "centers": list(self.centers),
            "beta0": self.beta0.to_json(),
            "beta1": [float(v) for v in self.beta1],
            "beta2": [float(v) for v in self.beta2],
        }


@dataclass(frozen=True)
class MultiResidual:
    f0: SineSpectrum
    f1: SineSpectrum
    f2: SineSpectrum
    scales: tuple[float, float, float] = (1.0, 1.0, 1.0)

    @property
    def position(self) -> tuple[float, float]:
        """sin(theta) components of F_1 and F_2."""
        return float(self.f1.coeffs[0]), float(self.f2.coeffs[0])

    def vector(self, s: float = DEFAULT_S, *, scaled: bool = True) -> np.ndarray:
        """Weighted residual n^{s-1} b_n of all three components.

        With ``scaled`` the satellite shape rows (n >= 2) are multiplied by
        r_j/mu, the residual of a unit-circulation, unit-radius satellite.
        This is the Newton norm; without it every row is in physical units.
        """
        parts = []
        for f, k in zip((self.f0, self.f1, self.f2), self.scales):
            w = np.arange(1, len(f) + 1) ** (s - 1.0)
            if scaled:
                w[1:] *= k  # the sin(theta) row stays physical: it pins y_j
            parts.append(w * f.coeffs)
        return np.concatenate(parts)

    def norm(self, s: float = DEFAULT_S, *, scaled: bool = True) -> float:
        return float(np.linalg.norm(self.vector(s, scaled=scaled)))


def config_curves(c: MultiConfig, m: int = DEFAULT_M, m_sat: int | None = None) -> list[SampledCurve]:
    """Physical boundaries [central, satellite 1, satellite 2], checked for disjointness."""
    m_sat = m if m_sat is None else m_sat
    if m < 4 * c.beta0.N or m_sat < 4 * c.N_sat:
        raise GeometryError("grid too coarse for the truncation order")
    W, dW = c.beta0.normalized(m)
    central = SampledCurve.build(c.r0 * W, c.r0 * dW, scale=c.r0)
    sats = [eval_near_disk_map(d, m_sat) for d in c.satellites()]
    _check_disjoint([central] + sats)
    return [central] + sats


def _inside(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Even-odd ray test of ``pts`` against the closed polygon ``poly``."""
    x, y = pts.real[:, None], pts.imag[:, None]
    a, b = poly[None, :], np.roll(poly, -1)[None, :]
    cross = (a.imag > y) != (b.imag > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
    return np.count_nonzero(cross & (x < xi), axis=1) % 2 == 1


def _check_disjoint(curves):
    for k, cv in enumerate(curves):
        if np.max(np.abs(cv.points)) >= 1.0:
            raise GeometryError(f"domain {k} touches the boundary")
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            a, b = curves[i].points, curves[j].points
            if _inside(a, b).any() or _inside(b, a).any():
                raise GeometryError(f"domains {i} and {j} overlap")


def residual_multi(c: MultiConfig, m: int = DEFAULT_M, m_sat: int | None = None) -> MultiResidual:
    """Spectra of F0 (sin 1..N+1) and F_j (sin 1..N_sat-1)."""
    curves = config_curves(c, m, m_sat)
    sources = [PatchSource(cv, lam) for cv, lam in zip(curves, c.strengths)]
    vel = velocity_on_curves(sources)
    r0 = c.r0
    W, dW = c.beta0.normalized(m)
    f0 = scaled_residual(W, dW, r0, c.Omega * r0**2, r0 * np.conj(vel[0]))
    out = [project(f0, c.beta0.N + 1)]
    for cv, u in zip(curves[1:], vel[1:]):
        rel = u - 1j * c.Omega * cv.points
        fj = -np.real(np.conj(rel) * cv.normals)
        out.append(project(fj, c.N_sat - 1))
    k = [1.0] + [r / c.mu if c.mu > 0 else 1.0 for r in c.radii[1:]]
    return MultiResidual(*out, scales=tuple(k))


def boundary_distance(c: MultiConfig, m: int = 1024) -> tuple[float, float]:
    """1 - max |x| over each satellite boundary."""
    return tuple(float(1.0 - np.max(np.abs(eval_near_disk_map(d, m).points))) for d in c.satellites())


# ---------------------------------------------------------------- solve


def initial_config(Q, mu, r0, r1=None, r2=None, N=DEFAULT_N_MULTI, N_sat=None, c_mode="balance") -> MultiConfig:
    r1 = r0**2 / 4 if r1 is None else r1
    r2 = r0**2 / 4 if r2 is None else r2
    N_sat = N if N_sat is None else N_sat
    return MultiConfig(
        Q,
        mu,
        (r0, r1, r2),
        beta0=FourierBoundary(Q, r0, np.zeros(N - 1)),
        beta1=np.zeros(N_sat - 2),
        beta2=np.zeros(N_sat - 2),
        c_mode=c_mode,
    )


def solve_multi(
    Q: float = 0.3,
    mu: float = 1.0,
    r0: float = 0.05,
    r1: float | None = None,
    r2: float | None = None,
    N: int = DEFAULT_N_MULTI,
    m: int = DEFAULT_M,
    tol: float = 1e-10,
    *,
    N_sat: int | None = None,
    m_sat: int | None = None,
    c_mode: str = "balance",
    initial: MultiConfig | None = None,
    max_iter: int = 25,
) -> tuple[MultiConfig, SolveReport]:
    """Newton solve for (central shape, y_j, satellite shapes) at fixed r0, mu.

    ``initial`` seeds the unknowns (e.g. from a neighbouring r0); radii
    default to r0^2/4.
    """
    base = initial_config(Q, mu, r0, r1, r2, N, N_sat, c_mode)
    x0 = base.unknowns()
    if initial is not None:
        seeded = initial.unknowns()
        if seeded.size == x0.size:
            x0 = seeded

    def fn(x):
        return residual_multi(base.with_unknowns(x), m, m_sat).vector()

    x, rep = newton_solve(fn, x0, tol, max_iter)
    sol = base.with_unknowns(x)
    d = boundary_distance(sol)
    rep.unknown_norms[f"{r0:.12g}"] = float(np.linalg.norm(x))
    res = residual_multi(sol, m, m_sat)
    rep.extras.update(
        {
            "residual_scaled": res.norm(),
            "residual_physical": res.norm(scaled=False),
            "Omega": sol.Omega,
            "Y": list(sol.Y),
            "c_d": sol.c_d,
            "distances": list(d),
            "distance_coefficients": [dj / r0**2 for dj in d],
        }
    )
    return sol, rep


# ---------------------------------------------------------------- limits


def position_derivative(c: MultiConfig, j: int, m: int = 128, h: float = 1e-4) -> float:
    """d/dy_j of the sin(theta) component of F_j by central differences.

    ``h`` is the relative change of the boundary distance, i.e. the y step is
    h / r0^2.
    """
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    dy = h / c.r0**2
    vals = []
    for sgn in (1.0, -1.0):
        Y = list(c.Y)
        Y[j - 1] += sgn * dy
        vals.append(residual_multi(replace(c, Y=tuple(Y)), m).position[j - 1])
    return (vals[0] - vals[1]) / (2.0 * dy)


@dataclass(frozen=True)
class PositionLimit:
    value: float
    r0: tuple[float, ...]
    raw: tuple[float, ...]
    table: tuple[tuple[float, ...], ...]
    spread: float

    def __float__(self):
        return self.value


def limit_position_operator(
    c: MultiConfig,
    j: int,
    r0_values=(0.08, 0.04, 0.02, 0.01),
    *,
    m: int = 128,
    rtol: float = 1e-6,
) -> PositionLimit:
    """Extrapolate d(sin-theta component of F_j)/dy_j to r0 -> 0 at zero shapes.

    The satellite radii keep their ratio to r0^2. Repeated Richardson
    elimination assumes an expansion in powers of r0^2 and successive halving
    of r0. Raises ExtrapolationError when the two most refined extrapolants
    disagree by more than ``rtol`` relative.
    """
    r0s = tuple(float(r) for r in r0_values)
    if len(r0s) < 3:
        raise ValueError("need at least three r0 values")
    for a, b in zip(r0s, r0s[1:]):
        if not np.isclose(a / b, 2.0):
            raise ValueError("r0 values must halve successively")
    k1, k2 = c.radii[1] / c.r0**2, c.radii[2] / c.r0**2
    raw = []
    for r0 in r0s:
        cc = MultiConfig(c.Q, c.mu, (r0, k1 * r0**2, k2 * r0**2), c.Y, FourierBoundary(c.Q, r0), c_mode=c.c_mode, c_d=c.c_d)
        raw.append(position_derivative(cc, j, m))
    table = [tuple(raw)]
    col = list(raw)
    p = 1
    while len(col) > 1:
        f = 4.0**p
        col = [(f * col[i + 1] - col[i]) / (f - 1.0) for i in range(len(col) - 1)]
        table.append(tuple(col))
        p += 1
    prev = table[-2]
    value = table[-1][0]
    spread = abs(prev[-1] - prev[-2]) / abs(value) if len(prev) > 1 else 0.0
    if not np.isfinite(value) or spread > rtol:
        raise ExtrapolationError(f"extrapolation did not settle (relative spread {spread:.2e})")
    return PositionLimit(float(value), r0s, tuple(raw), tuple(table), float(spread))


PRINTED_POSITION_CONSTANTS = {
    "(1-Q^2)/(4 pi^2 mu)": lambda Q, mu: (1.0 - Q**2) / (4.0 * np.pi**2 * mu),
    "(1-Q^2)/(4 pi)": lambda Q, mu: (1.0 - Q**2) / (4.0 * np.pi),
    "(1-Q^2)/(4 pi^2)": lambda Q, mu: (1.0 - Q**2) / (4.0 * np.pi**2),
}


def match_printed_constant(value: float, Q: float, mu: float, rtol: float = 1e-4) -> str | None:
    """Name of the printed position constant that ``value`` equals, if any."""
    for name, f in PRINTED_POSITION_CONSTANTS.items():
        if abs(value - f(Q, mu)) <= rtol * abs(value):
            return name
    return None


# ---------------------------------------------------------------- near-disk linearization


def near_disk_self_term(coeffs, m: int = 256) -> SineSpectrum:
    """-(u . n) of a lone unit-circulation, unit-radius satellite in the plane.

    Shape coefficients (A_3, ..., A_N); returns sin(n theta), n = 1..N-1.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    d = NearDiskDomain(0.0, 0.1, coeffs)
    w, dw = d.normalized(m)
    cv = SampledCurve.build(w, dw, scale=1.0)
    from .kernels import patch_velocity

    u = patch_velocity(PatchSource(cv, 1.0 / np.pi), None, "all", image=False)
    f = -np.real(np.conj(u) * cv.normals)
    return project(f, len(coeffs) + 1)


def near_disk_linearization(d: NearDiskDomain) -> LinearizedOperator:
    """Diagonal map A_{n+1} -> -(n-1)/(2 pi) sin(n theta), n = 2..N-1."""
    if np.any(d.coeffs):
        raise ValueError("linearization is taken at the disk (zero shape)")
    n = np.arange(2, d.N)
    return LinearizedOperator(np.diag(-(n - 1) / (2.0 * np.pi)), "near-disk")


def near_disk_jacobian_numeric(N: int, h: float = 1e-6, m: int = 256) -> np.ndarray:
    """Central differences of the self term in (A_3..A_N), rows sin 2..sin(N-1)."""
    k = N - 2
    J = np.empty((k, k))
    for i in range(k):
        e = np.zeros(k)
        e[i] = h
        J[:, i] = (near_disk_self_term(e, m).coeffs[1:] - near_disk_self_term(-e, m).coeffs[1:]) / (2.0 * h)
    return J
