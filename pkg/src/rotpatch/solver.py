"""Damped Newton iteration and parameter continuation."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .functional import DEFAULT_S, residual_single
from .geometry import DEFAULT_M, DEFAULT_N, FourierBoundary, area_scale_closed_form

log = logging.getLogger(__name__)

COND_LIMIT = 1e12
MAX_HALVINGS = 8
MAX_BISECTIONS = 6


class ConvergenceError(RuntimeError):
    """Newton failure; ``report`` holds the diagnostics gathered so far."""

    def __init__(self, msg: str, report: "SolveReport"):
        super().__init__(msg)
        self.report = report


@dataclass
class SolveReport:
    converged: bool = False
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    step_history: list[float] = field(default_factory=list)
    final_residual: float = float("nan")
    unknown_norms: dict[str, float] = field(default_factory=dict)
    condition_estimate: float = float("nan")
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def fd_jacobian(fn: Callable, x: np.ndarray, h: float = 1e-7, f0=None) -> np.ndarray:
    """Central-difference Jacobian; column k uses step h * max(1, |x_k|)."""
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for k in range(x.size):
        step = h * max(1.0, abs(x[k]))
        xp = x.copy()
        xm = x.copy()
        xp[k] += step
        xm[k] -= step
        cols.append((np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2.0 * step))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def newton_solve(
    residual_fn: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = 1e-11,
    max_iter: int = 20,
    *,
    h: float = 1e-7,
    jacobian_fn: Callable | None = None,
    cond_limit: float = COND_LIMIT,
) -> tuple[np.ndarray, SolveReport]:
    """Solve residual_fn(x) = 0 with a backtracking (halving) line search.

    The residual is assumed to be already weighted so that its Euclidean norm
    is the convergence norm. The Jacobian is formed once per iteration and
    reused for every trial step of the line search.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    x = np.array(x0, dtype=np.float64)
    r = np.asarray(residual_fn(x), dtype=np.float64)
    if r.shape != x.shape:
        raise ValueError(f"residual has {r.size} components for {x.size} unknowns")
    rep = SolveReport()
    nr = float(np.linalg.norm(r))
    rep.residual_history.append(nr)
    while nr > tol:
        if rep.iterations >= max_iter:
            rep.final_residual = nr
            raise ConvergenceError(f"no convergence in {max_iter} iterations (|F| = {nr:.3e})", rep)
        J = jacobian_fn(x) if jacobian_fn is not None else fd_jacobian(residual_fn, x, h)
        cond = float(np.linalg.cond(J))
        rep.condition_estimate = cond
        if not np.isfinite(cond) or cond > cond_limit:
            rep.final_residual = nr
            raise ConvergenceError(f"singular Jacobian (condition estimate {cond:.3e})", rep)
        dx = np.linalg.solve(J, -r)
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            xt = x + t * dx
            try:
                rt = np.asarray(residual_fn(xt), dtype=np.float64)
                nt = float(np.linalg.norm(rt))
            except ValueError:
                nt = np.inf
            if nt < nr:
                break
            t *= 0.5
        else:
            rep.final_residual = nr
            raise ConvergenceError(f"line search stalled at |F| = {nr:.3e}", rep)
        x, r, nr = xt, rt, nt
        rep.iterations += 1
        rep.step_history.append(float(t * np.linalg.norm(dx)))
        rep.residual_history.append(nr)
        log.debug("newton it=%d |F|=%.3e step=%.3e t=%g", rep.iterations, nr, rep.step_history[-1], t)
    rep.converged = True
    rep.final_residual = nr
    return x, rep


# ---------------------------------------------------------------- single patch


def _weights(k: int, s: float) -> np.ndarray:
    return np.arange(1, k + 1, dtype=np.float64) ** (s - 1.0)


def pack_single(b: FourierBoundary) -> np.ndarray:
    return np.concatenate(([b.b0, b.b1], b.coeffs))


def unpack_single(Q: float, eps: float, x) -> FourierBoundary:
    return FourierBoundary(Q, eps, x[2:], b0=x[0], b1=x[1])


def single_residual_fn(Q: float, eps: float, N: int, m: int = DEFAULT_M, *, s: float = DEFAULT_S, image: bool = True):
    """Weighted residual vector n^{s-1} b_n, n = 1..N+1, over (b0, b1, B_2..B_N)."""
    w = _weights(N + 1, s)

    def fn(x):
        b = unpack_single(Q, eps, x)
        return w * residual_single(b, m, N + 1, image=image).coeffs

    return fn


def perturbation_norm(b: FourierBoundary, s: float = DEFAULT_S) -> float:
    """Size of eps*phi: eps * sqrt(sum <n>^{2s} c_n^2) over (b0, b1, B_2, ...)."""
    c = pack_single(b)
    n = np.maximum(np.arange(c.size), 1).astype(np.float64)
    return float(b.eps * np.sqrt(np.sum(n ** (2 * s) * c**2)))


def solve_single(
    Q: float,
    eps: float,
    N: int = DEFAULT_N,
    m: int = DEFAULT_M,
    tol: float = 1e-11,
    *,
    x0=None,
    max_iter: int = 20,
    image: bool = True,
    s: float = DEFAULT_S,
) -> tuple[FourierBoundary, SolveReport]:
    """Rotating single patch at Omega = (1 - Q^2)/(4 pi eps^2)."""
    if m < 4 * (N + 1):
        raise ValueError(f"m={m} too small for N={N}")
    x0 = np.zeros(N + 1) if x0 is None else np.asarray(x0, dtype=np.float64)
    if x0.size != N + 1:
        raise ValueError(f"initial guess must have N+1 = {N + 1} entries")
    fn = single_residual_fn(Q, eps, N, m, s=s, image=image)
    x, rep = newton_solve(fn, x0, tol, max_iter)
    b = unpack_single(Q, eps, x)
    rep.unknown_norms[f"{eps:.12g}"] = perturbation_norm(b, s)
    spec = residual_single(b, m, N + 1, image=image)
    rep.extras.update(
        {
            "A_quadrature": b.A,
            "A_closed_form_squared": area_scale_closed_form(b),
            "cos_leak": spec.cos_leak,
            "alias": spec.alias,
            "Omega": (1.0 - Q**2) / (4.0 * np.pi * eps**2) if eps > 0 else float("inf"),
        }
    )
    return b, rep


# ---------------------------------------------------------------- continuation


@dataclass
class ContinuationStep:
    param: float
    solution: object
    report: SolveReport


@dataclass
class ContinuationResult:
    steps: list[ContinuationStep]
    slope: float = float("nan")
    bisections: int = 0

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def loglog_slope(params, sizes) -> float:
    p = np.asarray(params, dtype=np.float64)
    v = np.asarray(sizes, dtype=np.float64)
    ok = (p > 0) & (v > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(p[ok]), np.log(v[ok]), 1)[0])


def continuation(
    family: str,
    schedule: Sequence[float],
    *,
    step_fn: Callable | None = None,
    size_fn: Callable | None = None,
    **kwargs,
) -> ContinuationResult:
    """Walk a parameter schedule, seeding each solve with the previous solution.

    ``family`` is "single" (parameter eps, keyword Q etc.) or "multi"
    (parameter r0, keywords forwarded to multi.solve_multi). A failed step is
    retried after inserting the midpoint of the last successful parameter and
    the target, at most six times in a row.
    """
    schedule = [float(p) for p in schedule]
    if not schedule:
        return ContinuationResult([])
    if step_fn is None:
        if family == "single":
            Q = kwargs.pop("Q")

            def step_fn(p, prev):
                x0 = None if prev is None else pack_single(prev)
                return solve_single(Q, p, x0=x0, **kwargs)

            size_fn = size_fn or (lambda sol, p: perturbation_norm(sol))
        elif family == "multi":
            from . import multi

            def step_fn(p, prev):
                return multi.solve_multi(r0=p, initial=prev, **kwargs)

            size_fn = size_fn or (lambda sol, p: min(multi.boundary_distance(sol)))
        else:
            raise ValueError(f"unknown family {family!r}")
    steps: list[ContinuationStep] = []
    prev = None
    last_ok = None
    bisections = 0
    queue = list(schedule)
    tries = 0
    while queue:
        p = queue[0]
        try:
            sol, rep = step_fn(p, prev)
        except (ConvergenceError, ValueError) as exc:
            if last_ok is None or tries >= MAX_BISECTIONS:
                raise ConvergenceError(f"continuation failed at parameter {p:g}: {exc}", getattr(exc, "report", SolveReport())) from exc
            tries += 1
            bisections += 1
            queue.insert(0, 0.5 * (last_ok + p))
            continue
        queue.pop(0)
        tries = 0
        prev, last_ok = sol, p
        if p in schedule:
            steps.append(ContinuationStep(p, sol, rep))
    slope = float("nan")
    if size_fn is not None:
        slope = loglog_slope([s.param for s in steps], [size_fn(s.solution, s.param) for s in steps])
    return ContinuationResult(steps, slope, bisections)
