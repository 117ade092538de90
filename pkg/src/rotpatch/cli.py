"""Command-line entry point: ``rotpatch <subcommand> ...``.

Every subcommand prints one JSON report (schema 1, sorted keys) on stdout and
writes it to ``--out`` when given. Exit codes: 0 success, 1 numerical failure
or failed check, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

# numba probes an old system TBB on first parallel launch; the fallback layer is fine
warnings.filterwarnings("ignore", message="The TBB threading layer")

SCHEMA = 1
DEFAULT_DT_FACTOR = 0.0125


class UsageError(Exception):
    pass


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2)


def _emit(report: dict, out: Path | None, name: str = "report.json") -> None:
    text = dumps(report)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text + "\n")
    print(text)


def _positive(name, v):
    if not (v > 0 and math.isfinite(v)):
        raise UsageError(f"--{name} must be positive, got {v}")


def _check_grid(N, m):
    if N < 2:
        raise UsageError("--N must be >= 2")
    if m < 4 or m & (m - 1):
        raise UsageError("--m must be a power of two")
    if m < 4 * (N + 1):
        raise UsageError(f"--m must be >= 4 (N + 1) = {4 * (N + 1)}")


def _check_Q(Q):
    if not (0.0 <= Q < 0.5):
        raise UsageError(f"--Q must lie in [0, 1/2), got {Q}")


# ---------------------------------------------------------------- subcommands


def cmd_solve_single(a) -> tuple[dict, int]:
    from .geometry import eval_outer_map, write_boundary_csv, write_coeffs_json
    from .solver import solve_single

    _check_Q(a.Q)
    if a.eps < 0:
        raise UsageError("--eps must be >= 0")
    _check_grid(a.N, a.m)
    _positive("tol", a.tol)
    b, rep = solve_single(a.Q, a.eps, a.N, a.m, a.tol, image=not a.no_image)
    from .solver import perturbation_norm

    report = {
        "command": "solve-single",
        "params": {"Q": a.Q, "eps": a.eps, "N": a.N, "m": a.m, "tol": a.tol, "image": not a.no_image},
        "solve": rep.to_dict(),
        "boundary": b.to_json(),
        "perturbation_norm": perturbation_norm(b),
    }
    if a.out is not None and a.eps > 0:
        a.out.mkdir(parents=True, exist_ok=True)
        write_boundary_csv(a.out / "boundary.csv", eval_outer_map(b, a.m))
        write_coeffs_json(a.out / "coeffs.json", b)
    return report, 0


def cmd_solve_multi(a) -> tuple[dict, int]:
    from .geometry import write_boundary_csv
    from .multi import C_MODES, config_curves, residual_multi, solve_multi

    cfg = {}
    if a.config is not None:
        try:
            cfg = json.loads(Path(a.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    for key in ("Q", "mu", "r0", "r1", "r2", "N", "m", "tol", "N_sat", "c_mode"):
        v = getattr(a, key)
        if v is not None:
            cfg[key] = v
    unknown = set(cfg) - {"Q", "mu", "r0", "r1", "r2", "N", "m", "tol", "N_sat", "c_mode"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    Q = float(cfg.get("Q", 0.3))
    mu = float(cfg.get("mu", 1.0))
    r0 = float(cfg.get("r0", 0.05))
    N = int(cfg.get("N", 16))
    m = int(cfg.get("m", 256))
    tol = float(cfg.get("tol", 1e-10))
    c_mode = cfg.get("c_mode", "balance")
    _check_Q(Q)
    _positive("mu", mu)
    _positive("r0", r0)
    _check_grid(N, m)
    if c_mode not in C_MODES:
        raise UsageError(f"c_mode must be one of {sorted(C_MODES)}")
    sol, rep = solve_multi(
        Q, mu, r0, cfg.get("r1"), cfg.get("r2"), N, m, tol, N_sat=cfg.get("N_sat"), c_mode=c_mode
    )
    res = residual_multi(sol, m)
    report = {
        "command": "solve-multi",
        "params": {"Q": Q, "mu": mu, "r0": r0, "N": N, "m": m, "tol": tol, "c_mode": c_mode},
        "solve": rep.to_dict(),
        "config": sol.to_json(),
        "Omega": sol.Omega,
        "Omega_formula": (1 - Q**2) / (4 * np.pi * r0**2) + mu / (4 * np.pi),
        "residual_scaled": res.norm(),
        "residual_physical": res.norm(scaled=False),
        "position_residual": list(res.position),
    }
    if a.out is not None:
        a.out.mkdir(parents=True, exist_ok=True)
        for k, cv in enumerate(config_curves(sol, m)):
            write_boundary_csv(a.out / f"boundary_{k}.csv", cv)
    return report, 0


def cmd_spectrum(a) -> tuple[dict, int]:
    from .functional import jacobian_numeric, linearization_analytic, linearization_derived
    from .geometry import FourierBoundary

    _check_Q(a.Q)
    _check_grid(a.N, a.m)
    _positive("eps", a.eps)
    b = FourierBoundary(a.Q, a.eps, np.zeros(a.N - 1))
    J = jacobian_numeric(b, m=a.m, modes=a.N)
    printed = linearization_analytic(a.Q, a.N).matrix
    derived = linearization_derived(a.Q, a.N).matrix
    ref = printed if a.operator == "printed" else derived
    diff = float(np.max(np.abs(J - ref)))
    report = {
        "command": "spectrum",
        "Q": a.Q,
        "N": a.N,
        "eps": a.eps,
        "operator": a.operator,
        "analytic": ref,
        "numeric": J,
        "max_abs_diff": diff,
        "max_abs_diff_printed": float(np.max(np.abs(J - printed))),
        "max_abs_diff_derived": float(np.max(np.abs(J - derived))),
        "tolerance": a.tol,
        "passed": diff < a.tol,
    }
    return report, 0 if (diff < a.tol or not a.check) else 1


def cmd_evolve(a) -> tuple[dict, int]:
    from .dynamics import PatchState, evolve, rigid_rotation_error
    from .geometry import GeometryError, SampledCurve, read_boundary_csv, write_boundary_csv

    try:
        pts = read_boundary_csv(a.inp)
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read boundary: {exc}") from exc
    if not math.isfinite(a.strength):
        raise UsageError("--strength must be finite")
    _positive("omega", a.omega)
    try:
        curve = SampledCurve.from_points(pts)
    except GeometryError as exc:
        raise UsageError(str(exc)) from exc
    T = a.T if a.T is not None else math.pi / (2 * a.omega)
    dt = a.dt if a.dt is not None else DEFAULT_DT_FACTOR / a.omega
    _positive("dt", dt)
    if T < 0:
        raise UsageError("--T must be >= 0")
    st = PatchState((curve,), (a.strength,))
    out, log, snaps = evolve(st, dt, T, omega=a.omega, image=not a.no_image, frames=max(1, a.frames))
    err = rigid_rotation_error(curve, out.curves[0], a.omega, out.time)
    if a.out is not None:
        a.out.mkdir(parents=True, exist_ok=True)
        for k, s in enumerate(snaps):
            write_boundary_csv(a.out / f"frame_{k:04d}.csv", s.curves[0])
    report = {
        "command": "evolve",
        "params": {"strength": a.strength, "omega": a.omega, "T": T, "dt": dt, "image": not a.no_image},
        "final_time": out.time,
        "rigid_rotation_error": err,
        "max_area_drift": max(log.area_drift),
        "min_boundary_distance": min(log.min_boundary_distance),
        "steps": len(log.times) - 1,
        "halted": log.halted,
        "halt_reason": log.reason,
    }
    code = 0
    if log.halted:
        code = 1
    if a.max_error is not None and err > a.max_error:
        code = 1
    report["passed"] = code == 0
    if a.out is not None:
        (a.out / "summary.json").write_text(dumps({"schema": SCHEMA, **report}) + "\n")
    return report, code


def cmd_check(a) -> tuple[dict, int]:
    from .checks import CHECKS, run_checks

    names = a.only or list(CHECKS)
    bad = [n for n in names if n not in CHECKS]
    if bad:
        raise UsageError(f"unknown checks {bad}; available: {sorted(CHECKS)}")
    results = run_checks(names, seed=a.seed)
    ok = all(r["passed"] for r in results.values())
    return {"command": "check", "seed": a.seed, "checks": results, "passed": ok}, 0 if ok else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rotpatch", description="Rotating vortex-patch equilibria in the unit disk")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: $ROTPATCH_THREADS)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--backend", choices=["numba", "numpy"], default=None, help="contour-sum implementation")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("solve-single", help="single rotating patch")
    s.add_argument("--Q", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--N", type=int, default=32)
    s.add_argument("--m", type=int, default=256)
    s.add_argument("--tol", type=float, default=1e-11)
    s.add_argument("--no-image", action="store_true", help="free-space kernel (Kirchhoff setting)")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_solve_single)

    s = sub.add_parser("solve-multi", help="central patch with two satellites")
    s.add_argument("--config", type=Path)
    for key, typ in (("Q", float), ("mu", float), ("r0", float), ("r1", float), ("r2", float), ("tol", float)):
        s.add_argument(f"--{key}", type=typ)
    s.add_argument("--N", type=int)
    s.add_argument("--N-sat", dest="N_sat", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--c-mode", dest="c_mode", choices=["balance", "double", "two_pi"])
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_solve_multi)

    s = sub.add_parser("spectrum", help="finite-difference Jacobian vs closed-form linearization")
    s.add_argument("--Q", type=float, required=True)
    s.add_argument("--N", type=int, default=16)
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--m", type=int, default=256)
    s.add_argument("--operator", choices=["printed", "derived"], default="printed")
    s.add_argument("--tol", type=float, default=1e-5)
    s.add_argument("--check", action="store_true", help="exit 1 when max_abs_diff >= tol")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("evolve", help="contour-dynamics run of one patch")
    s.add_argument("--in", dest="inp", type=Path, required=True)
    s.add_argument("--strength", type=float, required=True)
    s.add_argument("--omega", type=float, required=True)
    s.add_argument("--T", type=float, default=None, help="default: quarter period")
    s.add_argument("--dt", type=float, default=None, help=f"default: {DEFAULT_DT_FACTOR}/omega")
    s.add_argument("--frames", type=int, default=4)
    s.add_argument("--max-error", type=float, default=None, help="fail if rigid-rotation error exceeds this")
    s.add_argument("--no-image", action="store_true")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("check", help="invariant suite")
    s.add_argument("--only", nargs="+")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    from . import _contour
    from ._accel import set_threads

    if args.threads is not None and args.threads < 1:
        parser.print_usage(sys.stderr)
        print("rotpatch: error: --threads must be >= 1", file=sys.stderr)
        return 2
    set_threads(args.threads)
    if args.backend:
        _contour.use_backend(args.backend)
    out = getattr(args, "out", None)
    t0 = time.perf_counter()
    try:
        report, code = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rotpatch: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure: structured error report
        err = {"schema": SCHEMA, "command": args.command, "error": {"type": type(exc).__name__, "message": str(exc)}}
        rep = getattr(exc, "report", None)
        if rep is not None:
            err["solve"] = rep.to_dict()
        err["timing"] = {"wall_seconds": time.perf_counter() - t0}
        _emit(err, out)
        return 1
    report["schema"] = SCHEMA
    report["timing"] = {"wall_seconds": time.perf_counter() - t0}
    _emit(report, out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
