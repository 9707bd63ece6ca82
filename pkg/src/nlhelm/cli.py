"""Command-line driver: ``nlhelm forward|inverse|roundtrip|validate|preset``.

Exit codes: 0 ok, 1 input error, 2 solver failure, 3 validation failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chebyshev import ChebPoly
from .experiments import preset, rings_in_range
from .forward import ForwardConfig, Trajectory, field_at, solve_forward
from .inverse import InverseConfig, estimate_bounds, invert
from .ode import IntegrationError
from .special import plane_wave_coeffs
from .validation import run_all

log = logging.getLogger("nlhelm")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3
FIELD_POINTS = 181
LINEAR_CHECK_TOL = 1e-6


class InputError(Exception):
    pass


class SolverError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    return obj


def forward_config(doc: dict) -> ForwardConfig:
    """The ``forward`` section of a run config, or the whole document if there is none."""
    section = doc.get("forward", doc)
    if not isinstance(section, dict):
        raise InputError("field 'forward' must be an object")
    try:
        return ForwardConfig.from_dict(section)
    except (ValueError, TypeError) as exc:
        raise InputError(f"forward config: {exc}") from None


def inverse_config(doc: dict, traj: Trajectory) -> InverseConfig:
    """Resolve the ``inverse`` section against a trajectory.

    ``interval`` may be omitted (taken from a Chebyshev nonlinearity or
    else from the trajectory's intensity range); ``r_range`` selects rings
    by radius and overrides ``rings``.
    """
    section = dict(doc.get("inverse", {}))
    if "K" not in section:
        raise InputError("inverse config: missing field 'K'")
    known = {"K", "interval", "L_max", "rings", "r_range", "ridge"}
    unknown = set(section) - known
    if unknown:
        raise InputError(f"inverse config has unknown field(s): {', '.join(sorted(unknown))}")
    interval = section.get("interval")
    if interval is None:
        nl = traj.config.get("nonlinearity", {})
        if nl.get("type") == "chebyshev":
            interval = nl["interval"]
        else:
            interval = estimate_bounds(traj)
    rings = section.get("rings", "all")
    if "r_range" in section:
        lo, hi = section["r_range"]
        rings = rings_in_range(traj, lo, hi)
        if not rings:
            raise InputError(f"no interior rings with r in [{lo}, {hi}]")
    try:
        return InverseConfig(
            K=section["K"],
            interval=tuple(interval),
            L_max=section.get("L_max"),
            rings=rings,
            ridge=section.get("ridge", 0.0),
        )
    except (ValueError, TypeError) as exc:
        raise InputError(f"inverse config: {exc}") from None


def reference_of(doc: dict, traj: Trajectory | None = None):
    ref = doc.get("reference")
    if ref is None and traj is not None:
        nl = traj.config.get("nonlinearity", {})
        if nl.get("type") == "chebyshev":
            ref = nl["a"]
    return None if ref is None else np.asarray(ref, dtype=float)


def do_forward(cfg: ForwardConfig) -> Trajectory:
    try:
        return solve_forward(cfg)
    except IntegrationError as exc:
        raise SolverError(f"integration aborted: {exc}") from None
    except (ValueError, FloatingPointError) as exc:
        raise SolverError(f"forward solve failed: {exc}") from None


def linear_check(traj: Trajectory):
    """Max coefficient error at R1 against the analytic plane wave, for eps = 0 and nu = 1."""
    conf = traj.config
    if conf["eps"] != 0.0 or conf["nu"] != 1.0:
        return None
    exact = plane_wave_coeffs(conf["k"], float(traj.r[-1]), traj.N).h
    return float(np.abs(traj.coefficients(-1) - exact).max())


def field_csv(traj: Trajectory) -> str:
    t = np.linspace(-1.0, 1.0, FIELD_POINTS)
    U = field_at(traj, -1, t)
    lines = [f"# config={_dumps(traj.config)}", "t,re_U,im_U,abs_U"]
    lines += [f"{a:.4e},{b:.4e},{c:.4e},{d:.4e}" for a, b, c, d in zip(t, U.real, U.imag, np.abs(U))]
    return "\n".join(lines) + "\n"


def write_forward(traj: Trajectory, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    traj.save(out / "trajectory.json")
    (out / "field_R1.csv").write_text(field_csv(traj))
    summary = {"points": len(traj), **traj.stats}
    err = linear_check(traj)
    if err is not None:
        summary["plane_wave_error_R1"] = err
        summary["plane_wave_check"] = "pass" if err <= LINEAR_CHECK_TOL else "fail"
    return summary


def do_inverse(traj: Trajectory, cfg: InverseConfig):
    try:
        return invert(traj, cfg)
    except ZeroDivisionError as exc:
        raise SolverError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def write_inverse(result, traj: Trajectory, reference, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    echo = {"forward": traj.config, "inverse": result.config}
    if reference is not None:
        echo["reference"] = reference.tolist()
    (out / "coefficients.csv").write_text(f"# config={_dumps(echo)}\n" + result.to_csv())
    summary = {"rings": len(result)}
    if reference is not None:
        dev = result.deviation(reference)
        summary["median_deviation"] = float(np.median(dev))
        summary["max_deviation"] = float(dev.max())
    return summary


def _print_summary(summary: dict):
    for key, val in summary.items():
        print(f"{key}: {val:.4e}" if isinstance(val, float) else f"{key}: {val}")


def cmd_forward(args) -> int:
    cfg = forward_config(load_json(args.config))
    _print_summary(write_forward(do_forward(cfg), Path(args.out)))
    return EXIT_OK


def load_trajectory(path) -> Trajectory:
    try:
        return Trajectory.from_dict(load_json(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_inverse(args) -> int:
    doc = load_json(args.config)
    traj = load_trajectory(args.traj)
    if len(traj) < 3:
        raise InputError("no interior rings: trajectory needs at least 3 points")
    cfg = inverse_config(doc, traj)
    result = do_inverse(traj, cfg)
    _print_summary(write_inverse(result, traj, reference_of(doc, traj), Path(args.out)))
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    doc = load_json(args.config)
    fcfg = forward_config(doc)
    if not isinstance(fcfg.nonlinearity, ChebPoly) and doc.get("reference") is None:
        raise InputError("roundtrip needs a chebyshev nonlinearity or a 'reference'")
    traj = do_forward(fcfg)
    result = do_inverse(traj, inverse_config(doc, traj))
    reference = reference_of(doc, traj)
    summary = {}
    if args.out:
        out = Path(args.out)
        summary.update(write_forward(traj, out))
        summary.update(write_inverse(result, traj, reference, out))
    else:
        dev = result.deviation(reference)
        summary = {"rings": len(result), "median_deviation": float(np.median(dev)), "max_deviation": float(dev.max())}
    _print_summary(summary)
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_all(args.seed, corrupt_gamma=args.corrupt_gamma)
    report = {
        "seed": args.seed,
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.report:
        Path(args.report).write_text(text + "\n")
    print(text)
    for r in results:
        if not r.passed:
            log.error("check %s failed: max error %.3e > %.1e", r.name, r.max_error, r.tolerance)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def cmd_preset(args) -> int:
    doc = preset(args.name)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    traj = do_forward(forward_config(doc))
    summary = write_forward(traj, out)
    result = do_inverse(traj, inverse_config(doc, traj))
    summary.update(write_inverse(result, traj, reference_of(doc, traj), out))
    _print_summary(summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlhelm", description="Nonlinear Helmholtz spectral solver and inverse identification.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("forward", help="solve the forward problem")
    f.add_argument("--config", required=True)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_forward)

    i = sub.add_parser("inverse", help="identify Chebyshev coefficients from a trajectory")
    i.add_argument("--config", required=True)
    i.add_argument("--traj", required=True)
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_inverse)

    r = sub.add_parser("roundtrip", help="forward solve then invert")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_roundtrip)

    v = sub.add_parser("validate", help="run the property checks")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--report", help="also write the JSON report here")
    v.add_argument("--corrupt-gamma", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("preset", help="run a named experiment")
    s.add_argument("name", choices=["experiment1", "experiment2"])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="nlhelm: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except SolverError as exc:
        log.error("%s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
