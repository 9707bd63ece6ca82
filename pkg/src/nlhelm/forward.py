"""Forward problem: Legendre reduction to a radial ODE system and its integration.

The state vector is ``Z = [r u_0 .. r u_N, v_0 .. v_N]`` with
``v_l = d(r u_l)/dr``; ``u_l(r)`` are the Legendre expansion coefficients of
the field ``U(r, t)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .chebyshev import ChebPoly, compose_dyadic
from .legendre import GammaTable, gauss_legendre, legendre_eval_all, star_convolve, synthesize
from .ode import IntegrationError, dormand_prince
from .special import BoundaryData, plane_wave_coeffs

__all__ = [
    "RadialProfile",
    "Power",
    "Sine",
    "Constant",
    "nonlinearity_from_descriptor",
    "ForwardConfig",
    "Trajectory",
    "IntegrationError",
    "initial_state",
    "nonlinear_term_quadrature",
    "nonlinear_term_spectral",
    "rhs",
    "integrate",
    "solve_forward",
    "field_at",
]


@dataclass(frozen=True)
class RadialProfile:
    """A radially symmetric coefficient, constant or piecewise-linear in ``r``."""

    value: float | None = None
    r: tuple = ()
    samples: tuple = ()

    def __post_init__(self):
        if self.value is None:
            r = np.asarray(self.r, dtype=float)
            if r.size < 2 or len(self.samples) != r.size:
                raise ValueError("tabulated profile needs >= 2 matching (r, value) samples")
            if np.any(np.diff(r) <= 0):
                raise ValueError("tabulated profile radii must be strictly increasing")
            object.__setattr__(self, "r", tuple(r.tolist()))
            object.__setattr__(self, "samples", tuple(float(v) for v in self.samples))

    @classmethod
    def constant(cls, value: float) -> "RadialProfile":
        return cls(value=float(value))

    @classmethod
    def tabulated(cls, r, values) -> "RadialProfile":
        return cls(None, tuple(r), tuple(values))

    @classmethod
    def from_descriptor(cls, obj) -> "RadialProfile":
        if isinstance(obj, (int, float)):
            return cls.constant(obj)
        if isinstance(obj, dict) and "r" in obj and "value" in obj:
            return cls.tabulated(obj["r"], obj["value"])
        raise ValueError(f"cannot interpret radial profile {obj!r}")

    def descriptor(self):
        if self.value is not None:
            return self.value
        return {"r": list(self.r), "value": list(self.samples)}

    def covers(self, a, b) -> bool:
        return self.value is not None or (self.r[0] <= a and self.r[-1] >= b)

    def __call__(self, r):
        if self.value is not None:
            return self.value
        return float(np.interp(r, self.r, self.samples))


@dataclass(frozen=True)
class Power:
    """``F(s) = s**p``."""

    p: int

    @property
    def degree(self):
        return self.p

    def __call__(self, s):
        return np.asarray(s) ** self.p

    def descriptor(self):
        return {"type": "power", "p": self.p}


@dataclass(frozen=True)
class Sine:
    """``F(s) = sin(s)``."""

    degree = None

    def __call__(self, s):
        return np.sin(s)

    def descriptor(self):
        return {"type": "sin"}


@dataclass(frozen=True)
class Constant:
    value: float

    @property
    def degree(self):
        return 0

    def __call__(self, s):
        return np.full(np.shape(s), self.value)

    def descriptor(self):
        return {"type": "constant", "value": self.value}


def nonlinearity_from_descriptor(obj):
    kind = obj.get("type") if isinstance(obj, dict) else None
    if kind == "power":
        p = obj.get("p")
        if not isinstance(p, int) or p < 0:
            raise ValueError("power nonlinearity needs a non-negative integer 'p'")
        return Power(p)
    if kind == "sin":
        return Sine()
    if kind == "constant":
        return Constant(float(obj["value"]))
    if kind == "chebyshev":
        if "a" not in obj or "interval" not in obj:
            raise ValueError("chebyshev nonlinearity needs 'a' and 'interval'")
        return ChebPoly(obj["a"], tuple(obj["interval"]), bool(obj.get("extrapolate", False)))
    raise ValueError(f"unknown nonlinearity descriptor {obj!r}")


def _degree(F):
    return F.degree if not isinstance(F, ChebPoly) else F.a.size - 1


@dataclass(frozen=True)
class ForwardConfig:
    k: float
    nu: RadialProfile
    eps: RadialProfile
    R0: float
    R1: float
    N: int
    nonlinearity: object
    intensity_interval: tuple | None = None
    quadrature_size: int | None = None
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float | None = None

    def __post_init__(self):
        for name in ("nu", "eps"):
            val = getattr(self, name)
            if not isinstance(val, RadialProfile):
                object.__setattr__(self, name, RadialProfile.from_descriptor(val))
        if not self.k > 0:
            raise ValueError("k must be positive")
        if not (0 < self.R0 < self.R1):
            raise ValueError("need 0 < R0 < R1")
        if not (isinstance(self.N, int) and self.N >= 0):
            raise ValueError("N must be a non-negative integer")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")
        for name in ("nu", "eps"):
            if not getattr(self, name).covers(self.R0, self.R1):
                raise ValueError(f"tabulated {name} does not cover [R0, R1]")
        if isinstance(self.nonlinearity, dict):
            object.__setattr__(self, "nonlinearity", nonlinearity_from_descriptor(self.nonlinearity))
        if isinstance(self.nonlinearity, ChebPoly) and self.intensity_interval is None:
            object.__setattr__(self, "intensity_interval", self.nonlinearity.interval)

    @property
    def Q(self) -> int:
        """Quadrature size for the nonlinear term."""
        if self.quadrature_size is not None:
            return int(self.quadrature_size)
        p = _degree(self.nonlinearity)
        N = self.N
        if p is None:
            return 4 * N + 16
        return max(N + 1, math.ceil(((2 * p + 1) * N + N) / 2) + 1)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "nu": self.nu.descriptor(),
            "eps": self.eps.descriptor(),
            "R0": self.R0,
            "R1": self.R1,
            "N": self.N,
            "nonlinearity": self.nonlinearity.descriptor(),
            "intensity_interval": None
            if self.intensity_interval is None
            else list(self.intensity_interval),
            "quadrature_size": self.Q,
            "rtol": self.rtol,
            "atol": self.atol,
            "max_step": self.max_step,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForwardConfig":
        required = ("k", "nu", "eps", "R0", "R1", "N", "nonlinearity")
        missing = [key for key in required if key not in d]
        if missing:
            raise ValueError(f"forward config missing field(s): {', '.join(missing)}")
        known = set(required) | {
            "intensity_interval", "quadrature_size", "rtol", "atol", "max_step",
        }
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"forward config has unknown field(s): {', '.join(sorted(unknown))}")
        kw = dict(d)
        if kw.get("intensity_interval") is not None:
            kw["intensity_interval"] = tuple(kw["intensity_interval"])
        return cls(**kw)


@lru_cache(maxsize=16)
def _basis(N: int, Q: int):
    rule = gauss_legendre(Q)
    P = legendre_eval_all(N, rule.nodes)
    return P, P * rule.weights


def initial_state(b: BoundaryData, R0: float) -> np.ndarray:
    return np.concatenate([R0 * b.h, b.h + R0 * b.g])


def nonlinear_term_quadrature(u, cfg: ForwardConfig) -> np.ndarray:
    """``int_{-1}^{1} U F(|U|^2) P_l dt`` for ``l <= N`` by Gauss-Legendre quadrature."""
    u = np.asarray(u)
    P, Pw = _basis(cfg.N, cfg.Q)
    U = u @ P
    FU = cfg.nonlinearity((U * U.conj()).real)
    return Pw @ (U * FU)


def nonlinear_term_spectral(u, p: ChebPoly, table: GammaTable, compose=compose_dyadic):
    """Same quantity as :func:`nonlinear_term_quadrature`, in coefficient space."""
    u = np.asarray(u, dtype=complex)
    d = star_convolve(u, u.conj(), table).real
    b = compose(p, d, table)
    c = star_convolve(b, u, table)
    L = np.arange(u.size)
    return 2.0 * c[: u.size] / (2 * L + 1)


def rhs(r: float, Z, cfg: ForwardConfig) -> np.ndarray:
    N = cfg.N
    Z = np.asarray(Z)
    y, v = Z[: N + 1], Z[N + 1 :]
    l = np.arange(N + 1)
    lam = l * (l + 1)
    Fl = nonlinear_term_quadrature(y / r, cfg)
    dv = lam / r**2 * y - cfg.k**2 * cfg.nu(r) * y - r * cfg.eps(r) * (l + 0.5) * Fl
    return np.concatenate([v, dv])


@dataclass
class Trajectory:
    """Accepted radii and states of a forward solve."""

    r: np.ndarray
    Z: np.ndarray
    config: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.Z = np.asarray(self.Z, dtype=complex)
        if self.Z.ndim != 2 or self.Z.shape[0] != self.r.size or self.Z.shape[1] % 2:
            raise ValueError("trajectory states must have shape (len(r), 2N+2)")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("trajectory radii must be strictly increasing")

    @property
    def N(self) -> int:
        return self.Z.shape[1] // 2 - 1

    def __len__(self):
        return self.r.size

    def coefficients(self, index=None) -> np.ndarray:
        """``u_l(r_j)``; all rings when ``index`` is None."""
        if index is None:
            return self.Z[:, : self.N + 1] / self.r[:, None]
        return self.Z[index, : self.N + 1] / self.r[index]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "r": self.r.tolist(),
            "Z_re": self.Z.real.tolist(),
            "Z_im": self.Z.imag.tolist(),
            "stats": self.stats,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def from_dict(cls, d: dict) -> "Trajectory":
        try:
            Z = np.asarray(d["Z_re"], dtype=float) + 1j * np.asarray(d["Z_im"], dtype=float)
            return cls(np.asarray(d["r"], dtype=float), Z, d.get("config", {}), d.get("stats", {}))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed trajectory: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Trajectory":
        return cls.from_dict(json.loads(Path(path).read_text()))


def integrate(cfg: ForwardConfig, Z0) -> Trajectory:
    """Adaptive Dormand-Prince integration of the state from ``R0`` to ``R1``."""
    Z0 = np.asarray(Z0, dtype=complex)
    n = 2 * cfg.N + 2
    if Z0.shape != (n,):
        raise ValueError(f"initial state must have length {n}")

    def real_rhs(r, x):
        return rhs(r, x.view(complex), cfg).view(float)

    rs, ys, stats = dormand_prince(
        real_rhs,
        cfg.R0,
        cfg.R1,
        Z0.view(float),
        rtol=cfg.rtol,
        atol=cfg.atol,
        max_step=cfg.max_step,
    )
    Z = np.ascontiguousarray(ys).view(complex)
    return Trajectory(rs, Z, cfg.to_dict(), stats)


def solve_forward(cfg: ForwardConfig, boundary: BoundaryData | None = None) -> Trajectory:
    """Integrate with plane-wave Cauchy data unless ``boundary`` is supplied."""
    if boundary is None:
        boundary = plane_wave_coeffs(cfg.k, cfg.R0, cfg.N)
    if boundary.N != cfg.N:
        raise ValueError("boundary data length does not match N")
    return integrate(cfg, initial_state(boundary, cfg.R0))


def field_at(traj: Trajectory, index: int, t_grid) -> np.ndarray:
    """``U(r_j, t)`` on ``t_grid``."""
    return synthesize(traj.coefficients(index), t_grid)
