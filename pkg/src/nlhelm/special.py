"""Bessel functions and plane-wave boundary data."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundaryData",
    "spherical_bessel_j",
    "bessel_J",
    "plane_wave_coeffs",
    "i_power",
]

_RESCALE = 1e250
_SERIES_LIMIT = 5.0


def _miller_start(nmax: int, x: float) -> int:
    n = max(nmax, int(math.ceil(abs(x))))
    return n + 20 + int(math.sqrt(40.0 * (n + 1)))


def spherical_bessel_j(lmax: int, x: float) -> np.ndarray:
    """``j_0(x) .. j_lmax(x)`` by Miller's downward recurrence.

    The unnormalised sequence is scaled to match whichever of the closed
    forms ``j_0``/``j_1`` is larger in magnitude at ``x``; ``j_0`` itself is
    always taken from ``sin(x)/x``.
    """
    if lmax < 0:
        raise ValueError("lmax must be non-negative")
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"spherical_bessel_j requires x > 0, got {x}")
    start = _miller_start(lmax, x)
    f = np.zeros(start + 2)
    f[start] = 1e-300
    for n in range(start, 0, -1):
        f[n - 1] = (2 * n + 1) / x * f[n] - f[n + 1]
        if abs(f[n - 1]) > _RESCALE:
            f[n - 1 :] /= _RESCALE
    s, c = math.sin(x), math.cos(x)
    j0 = s / x
    j1 = s / (x * x) - c / x
    scale = j0 / f[0] if abs(j0) >= abs(j1) else j1 / f[1]
    out = f[: lmax + 1] * scale
    out[0] = j0
    return out


def _bessel_J_series(kmax, z):
    out = np.empty(kmax + 1)
    h = 0.5 * z
    for k in range(kmax + 1):
        term = h**k / math.factorial(k)
        total = [term]
        peak = abs(term)
        m = 0
        while True:
            m += 1
            term *= -h * h / (m * (m + k))
            total.append(term)
            peak = max(peak, abs(term))
            if m > h and abs(term) <= 1e-18 * peak:
                break
        out[k] = math.fsum(total)
    return out


def _bessel_J_miller(kmax, z):
    start = _miller_start(kmax, z)
    start += start % 2
    f = np.zeros(start + 2)
    f[start] = 1e-300
    for n in range(start, 0, -1):
        f[n - 1] = 2 * n / z * f[n] - f[n + 1]
        if abs(f[n - 1]) > _RESCALE:
            f[n - 1 :] /= _RESCALE
    # J_0 + 2 sum_k J_{2k} = 1
    norm = f[0] + 2.0 * math.fsum(f[2::2])
    return f[: kmax + 1] / norm


def bessel_J(kmax: int, z: float) -> np.ndarray:
    """Integer-order Bessel functions ``J_0(z) .. J_kmax(z)``.

    Power series for ``|z| <= 5``, normalised Miller recurrence beyond.
    """
    if kmax < 0:
        raise ValueError("kmax must be non-negative")
    z = float(z)
    if abs(z) > 50.0:
        raise ValueError("bessel_J is only supported for |z| <= 50")
    if z == 0.0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    az = abs(z)
    J = _bessel_J_series(kmax, az) if az <= _SERIES_LIMIT else _bessel_J_miller(kmax, az)
    if z < 0:
        J[1::2] *= -1.0
    return J


def i_power(l) -> np.ndarray:
    """``i**l`` computed exactly from ``l mod 4``."""
    return np.array([1, 1j, -1, -1j])[np.asarray(l) % 4]


@dataclass(frozen=True)
class BoundaryData:
    """Legendre coefficients of the Cauchy data ``U`` and ``dU/dr`` at ``r = R0``."""

    h: np.ndarray
    g: np.ndarray
    R0: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        g = np.asarray(self.g, dtype=complex)
        if h.shape != g.shape or h.ndim != 1:
            raise ValueError("h and g must be 1-D and of equal length")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(g))):
            raise ValueError("boundary coefficients must be finite")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @property
    def N(self) -> int:
        return self.h.size - 1


def plane_wave_coeffs(k: float, R0: float, N: int) -> BoundaryData:
    """Coefficients of ``exp(i k r t)`` and its radial derivative at ``r = R0``."""
    if not (k > 0 and R0 > 0):
        raise ValueError("k and R0 must be positive")
    x = k * R0
    j = spherical_bessel_j(N + 1, x)
    l = np.arange(N + 1)
    jm1 = np.empty(N + 1)
    jm1[0] = math.cos(x) / x
    jm1[1:] = j[:N]
    pref = (2 * l + 1) * i_power(l)
    h = pref * j[: N + 1]
    g = pref * k * (jm1 - (l + 1) / x * j[: N + 1])
    return BoundaryData(h, g, float(R0))
