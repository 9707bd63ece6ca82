"""Chebyshev representation of the nonlinearity and its composition with Legendre series."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .legendre import GammaTable, star_convolve, synthesize
from .special import bessel_J

__all__ = [
    "ChebPoly",
    "CompositionPlan",
    "cheb_eval",
    "cheb_fit",
    "sin_reference_coeffs",
    "chebyshev_ladder",
    "compose_clenshaw",
    "compose_dyadic",
    "normalize_intensity",
    "check_composition_range",
]

RANGE_SLACK = 1e-9


@dataclass(frozen=True)
class ChebPoly:
    """``F(s) = sum_k a[k] T_k(tau(s))`` with ``tau`` mapping [alpha, beta] onto [-1, 1].

    Calling it outside the interval raises unless ``extrapolate`` is set, in
    which case the polynomial is simply continued.
    """

    a: np.ndarray
    interval: tuple[float, float] = (-1.0, 1.0)
    extrapolate: bool = False

    def __post_init__(self):
        a = np.array(self.a, dtype=float).ravel()
        if a.size < 1:
            raise ValueError("ChebPoly needs at least one coefficient")
        alpha, beta = (float(x) for x in self.interval)
        if not beta > alpha:
            raise ValueError(f"degenerate interval ({alpha}, {beta})")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "interval", (alpha, beta))

    @property
    def degree(self) -> int:
        return self.a.size - 1

    def tau(self, s):
        alpha, beta = self.interval
        return (2.0 * np.asarray(s) - alpha - beta) / (beta - alpha)

    def __call__(self, s):
        return cheb_eval(self, s, check=not self.extrapolate)

    def descriptor(self) -> dict:
        out = {"type": "chebyshev", "a": self.a.tolist(), "interval": list(self.interval)}
        if self.extrapolate:
            out["extrapolate"] = True
        return out


def _clenshaw(a, x):
    x = np.asarray(x, dtype=float)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for ak in a[:0:-1]:
        b1, b2 = 2.0 * x * b1 - b2 + ak, b1
    return x * b1 - b2 + a[0]


def cheb_eval(p: ChebPoly, s, check: bool = True):
    """Evaluate ``p`` at intensities ``s``; outside [alpha, beta] is an error."""
    x = p.tau(s)
    if check and np.any(np.abs(x) > 1.0 + RANGE_SLACK):
        bad = np.asarray(s).ravel()[np.argmax(np.abs(np.asarray(x)).ravel())]
        raise ValueError(f"value {bad!r} outside Chebyshev interval {p.interval}")
    return _clenshaw(p.a, x)


def cheb_fit(f, interval, K: int) -> ChebPoly:
    """Interpolate ``f`` at the K first-kind Chebyshev points of ``interval``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    alpha, beta = interval
    theta = np.pi * (np.arange(K) + 0.5) / K
    x = np.cos(theta)
    s = 0.5 * (beta - alpha) * x + 0.5 * (alpha + beta)
    fx = np.array([f(si) for si in s], dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ValueError("non-finite function value at a Chebyshev node")
    k = np.arange(K)
    a = (2.0 / K) * np.cos(np.outer(k, theta)) @ fx
    a[0] *= 0.5
    return ChebPoly(a, (alpha, beta))


def sin_reference_coeffs(interval, n_terms: int) -> ChebPoly:
    """Chebyshev coefficients of ``sin(s)`` on ``interval`` from the Bessel generating series.

    ``a_n = sin(gamma + n pi / 2) q_n(z)`` with ``gamma`` the midpoint,
    ``z`` the half-width, ``q_0 = J_0`` and ``q_n = 2 J_n``.
    """
    alpha, beta = interval
    gamma = 0.5 * (alpha + beta)
    z = 0.5 * (beta - alpha)
    J = bessel_J(n_terms - 1, z)
    q = 2.0 * J
    q[0] = J[0]
    n = np.arange(n_terms) % 4
    # sin(gamma + n pi/2) with the quarter turns taken exactly
    phase = np.array([math.sin(gamma), math.cos(gamma), -math.sin(gamma), -math.cos(gamma)])[n]
    return ChebPoly(phase * q, (alpha, beta))


def normalize_intensity(d, interval) -> np.ndarray:
    """Legendre series of ``tau(s(t))`` given the series ``d`` of ``s(t)``."""
    alpha, beta = interval
    if not beta > alpha:
        raise ValueError(f"degenerate interval ({alpha}, {beta})")
    out = 2.0 * np.asarray(d) / (beta - alpha)
    out[0] = (2.0 * d[0] - alpha - beta) / (beta - alpha)
    return out


def check_composition_range(p: ChebPoly, f, npoints: int = 256) -> float:
    """Sample ``tau(f)`` and warn if it leaves [-1, 1]. Returns the max magnitude."""
    t = np.linspace(-1.0, 1.0, npoints)
    vals = synthesize(normalize_intensity(f, p.interval), t)
    peak = float(np.max(np.abs(vals)))
    if peak > 1.0 + RANGE_SLACK:
        warnings.warn(
            f"composed argument reaches |tau| = {peak:.6g} > 1; Chebyshev extrapolation",
            RuntimeWarning,
            stacklevel=2,
        )
    return peak


def _pad(c, n):
    c = np.asarray(c)
    out = np.zeros(n, dtype=np.result_type(c, float))
    out[: len(c)] = c
    return out


def _add(x, y):
    n = max(len(x), len(y))
    return _pad(x, n) + _pad(y, n)


def chebyshev_ladder(g, K: int, table: GammaTable) -> list[np.ndarray]:
    """Series of ``T_0(g) .. T_{K-1}(g)`` via ``T_{k+1} = 2 g T_k - T_{k-1}``."""
    g = np.asarray(g)
    T = [np.ones(1, dtype=g.dtype)]
    if K > 1:
        T.append(g.copy())
    for _ in range(2, K):
        T.append(_add(2.0 * star_convolve(T[-1], g, table), -T[-2]))
    return T


def compose_clenshaw(p: ChebPoly, f, table: GammaTable) -> np.ndarray:
    """Legendre series of ``p(f(t))``; baseline for :func:`compose_dyadic`."""
    g = normalize_intensity(np.asarray(f, dtype=float), p.interval)
    out = np.zeros(1)
    for ak, Tk in zip(p.a, chebyshev_ladder(g, p.a.size, table)):
        out = _add(out, ak * Tk)
    return out


@dataclass
class CompositionPlan:
    """Cached ``T_{2^j}(g)`` series for ``j = 0 .. d-1`` plus convolution counters."""

    d: int
    cached: list = field(default_factory=list)
    ladder_convolutions: int = 0
    split_convolutions: int = 0

    @classmethod
    def build(cls, g, d: int, table: GammaTable) -> "CompositionPlan":
        plan = cls(d)
        if d >= 1:
            plan.cached.append(np.asarray(g, dtype=float))
        for _ in range(1, d):
            sq = star_convolve(plan.cached[-1], plan.cached[-1], table)
            plan.ladder_convolutions += 1
            nxt = 2.0 * sq
            nxt[0] -= 1.0
            plan.cached.append(nxt)
        return plan

    @property
    def convolutions(self) -> int:
        return self.ladder_convolutions + self.split_convolutions


def _dyadic(a, plan: CompositionPlan, table: GammaTable):
    n = a.size
    if n == 1:
        return np.array([a[0]])
    if n == 2:
        return _add([a[0]], a[1] * plan.cached[0])
    m = n // 2
    j = int(math.log2(m))
    # sum_{k<2m} a_k T_k = Q + 2 T_m R, with
    # Q_0 = a_0, Q_k = a_k - a_{2m-k}; R_0 = a_m / 2, R_k = a_{m+k}
    lo = a[:m].copy()
    lo[1:] -= a[: m : -1]
    hi = a[m:].copy()
    hi[0] *= 0.5
    q = _dyadic(lo, plan, table)
    r = _dyadic(hi, plan, table)
    plan.split_convolutions += 1
    return _add(q, 2.0 * star_convolve(plan.cached[j], r, table))


def compose_dyadic(p: ChebPoly, f, table: GammaTable, plan: CompositionPlan | None = None):
    """Legendre series of ``p(f(t))`` by recursive dyadic splitting of the Chebyshev index.

    The coefficient vector is zero-padded to length ``2^d``.  Returns the
    series; pass a ``plan`` to reuse the ``T_{2^j}`` ladder and read the
    convolution counters afterwards.
    """
    K = p.a.size
    d = max(0, math.ceil(math.log2(K))) if K > 1 else 0
    a = _pad(p.a, 2**d)
    g = normalize_intensity(np.asarray(f, dtype=float), p.interval)
    final_degree = (2**d - 1) * (len(g) - 1)
    if final_degree > table.max_degree:
        raise ValueError(
            f"Gamma table too small: need degree {final_degree}, have {table.max_degree}"
        )
    if plan is None:
        plan = CompositionPlan.build(g, d, table)
    return _dyadic(a, plan, table)
