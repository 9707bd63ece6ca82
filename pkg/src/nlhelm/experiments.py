"""Experiment presets and the randomized forward/inverse roundtrip."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .chebyshev import ChebPoly, sin_reference_coeffs
from .forward import ForwardConfig, Power, Trajectory, solve_forward
from .inverse import InverseConfig, InverseResult, estimate_bounds, invert

__all__ = [
    "PRESETS",
    "preset",
    "rings_in_range",
    "calibrate_interval",
    "RoundtripOutcome",
    "random_roundtrip",
]

_SHELL = {"k": 1.0, "nu": 0.1, "eps": 2.0, "R0": 1.0, "R1": 2.0}


def _experiment1():
    return {
        "forward": {
            **_SHELL,
            "N": 24,
            "nonlinearity": Power(2).descriptor(),
            "rtol": 1e-10,
            "atol": 1e-12,
            "max_step": 1e-3,
        },
        "inverse": {"K": 3, "interval": [-1.0, 1.0], "r_range": [1.0, 1.02]},
        "reference": [0.5, 0.0, 0.5],
    }


def _experiment2():
    ref = sin_reference_coeffs((0.0, 1.0), 8)
    return {
        "forward": {
            **_SHELL,
            "N": 24,
            # |U|^2 exceeds 1 by ~4e-8 just outside R0; F is the polynomial itself there
            "nonlinearity": {**ref.descriptor(), "extrapolate": True},
            "rtol": 1e-10,
            "atol": 1e-12,
            "max_step": 1e-3,
        },
        "inverse": {"K": 8, "interval": [0.0, 1.0], "r_range": [1.0015, 1.0055]},
        "reference": ref.a.tolist(),
    }


PRESETS = {"experiment1": _experiment1, "experiment2": _experiment2}


def preset(name: str) -> dict:
    """A fresh run configuration (plain JSON-compatible dict) for a named experiment."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def rings_in_range(traj: Trajectory, lo: float, hi: float) -> list[int]:
    """Interior ring indices with ``lo <= r_j <= hi``."""
    return [j for j in range(1, len(traj) - 1) if lo <= traj.r[j] <= hi]


def calibrate_interval(cfg: ForwardConfig, a, max_iter: int = 12):
    """Find an interval on which ``ChebPoly(a, interval)`` keeps the solve inside it.

    Starts from :func:`estimate_bounds` of the linear (``eps = 0``) solve
    and grows the interval to the hull of itself and the bounds of the
    nonlinear solve until the raw intensity range stays inside.  Returns
    ``(interval, trajectory)``.
    """
    interval = estimate_bounds(solve_forward(replace(cfg, eps=0.0, nonlinearity=Power(0))))
    for _ in range(max_iter):
        trial = solve_forward(
            replace(cfg, nonlinearity=ChebPoly(a, interval, extrapolate=True), intensity_interval=None)
        )
        raw_lo, raw_hi = estimate_bounds(trial, margin=0.0)
        if raw_lo >= interval[0] and raw_hi <= interval[1]:
            final = replace(cfg, nonlinearity=ChebPoly(a, interval), intensity_interval=None)
            return interval, solve_forward(final)
        lo, hi = estimate_bounds(trial)
        interval = (min(lo, interval[0]), max(hi, interval[1]))
    raise RuntimeError("interval calibration did not settle")


ROUNDTRIP_FORWARD = {
    **_SHELL,
    "eps": 0.3,
    "N": 24,
    "nonlinearity": {"type": "constant", "value": 0.0},
    "rtol": 1e-11,
    "atol": 1e-13,
    "max_step": 1e-3,
}


@dataclass
class RoundtripOutcome:
    a_true: np.ndarray
    interval: tuple
    trajectory: Trajectory
    result: InverseResult

    @property
    def errors(self) -> np.ndarray:
        return self.result.deviation(self.a_true)

    @property
    def median_error(self) -> float:
        return float(np.median(self.errors))


def random_roundtrip(seed: int = 0, K: int = 4, forward: dict | None = None) -> RoundtripOutcome:
    """Draw ``a`` uniformly in [-0.5, 0.5]^K, forward-solve, invert on all interior rings."""
    rng = np.random.default_rng(seed)
    a_true = rng.uniform(-0.5, 0.5, K)
    cfg = ForwardConfig.from_dict(dict(ROUNDTRIP_FORWARD if forward is None else forward))
    interval, traj = calibrate_interval(cfg, a_true)
    result = invert(traj, InverseConfig(K=K, interval=interval))
    return RoundtripOutcome(a_true, interval, traj, result)
