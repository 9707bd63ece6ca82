"""Legendre polynomial toolkit.

Coefficient sequences are plain 1-D numpy arrays (real or complex) in the
expansion convention ``g(t) = sum_l c[l] * P_l(t)``.  Under this convention
pointwise multiplication of two series is exactly :func:`star_convolve`.
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import sparse

__all__ = [
    "QuadratureRule",
    "GammaTable",
    "legendre_eval_all",
    "legendre_eval_all_with_derivative",
    "gauss_legendre",
    "project",
    "synthesize",
    "gamma_coefficient",
    "build_gamma_table",
    "star_convolve",
]

DENSE_LIMIT = 128


def _check_domain(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise ValueError(f"Legendre argument outside [-1, 1]: max |t| = {np.max(np.abs(t))!r}")
    return t


def _recurrence(lmax, t):
    out = np.empty((lmax + 1,) + t.shape)
    out[0] = 1.0
    if lmax >= 1:
        out[1] = t
    for n in range(1, lmax):
        out[n + 1] = ((2 * n + 1) * t * out[n] - n * out[n - 1]) / (n + 1)
    return out


def legendre_eval_all(lmax: int, t) -> np.ndarray:
    """Values ``P_0(t) .. P_lmax(t)``, stacked along the first axis."""
    if lmax < 0:
        raise ValueError("lmax must be non-negative")
    return _recurrence(lmax, _check_domain(t))


def legendre_eval_all_with_derivative(lmax: int, t):
    """Like :func:`legendre_eval_all` but also returns ``P'_l(t)`` (|t| < 1)."""
    t = _check_domain(t)
    p = _recurrence(lmax, t)
    dp = np.zeros_like(p)
    for n in range(1, lmax + 1):
        # (1 - t^2) P'_n = n (P_{n-1} - t P_n)
        dp[n] = n * (p[n - 1] - t * p[n]) / (1.0 - t * t)
    return p, dp


class QuadratureRule(NamedTuple):
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)


@lru_cache(maxsize=64)
def gauss_legendre(Q: int, tol: float = 1e-15, maxiter: int = 100) -> QuadratureRule:
    """Gauss-Legendre rule with ``Q`` nodes, ascending.

    Roots of ``P_Q`` are found by Newton iteration started from the
    Chebyshev-like guesses ``cos(pi (i - 1/4) / (Q + 1/2))``.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    i = np.arange(1, Q + 1)
    x = np.cos(np.pi * (i - 0.25) / (Q + 0.5))
    for _ in range(maxiter):
        p = _recurrence(Q, x)
        dp = Q * (p[Q - 1] - x * p[Q]) / (1.0 - x * x)
        dx = p[Q] / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    else:
        raise RuntimeError(f"Gauss-Legendre Newton iteration did not converge for Q={Q}")
    p = _recurrence(Q, x)
    dp = Q * (p[Q - 1] - x * p[Q]) / (1.0 - x * x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    nodes, weights = x[order], w[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


def project(samples, rule: QuadratureRule, N: int) -> np.ndarray:
    """Expansion coefficients ``c_l = (2l+1)/2 * sum_q w_q g(t_q) P_l(t_q)``, l <= N.

    ``samples`` may carry trailing batch axes after the node axis.
    """
    samples = np.asarray(samples)
    if N + 1 > len(rule):
        raise ValueError(f"need at least N+1={N + 1} nodes, rule has {len(rule)}")
    if samples.shape[0] != len(rule):
        raise ValueError("samples must be aligned with the rule nodes")
    P = _recurrence(N, rule.nodes)
    scale = (2 * np.arange(N + 1) + 1) / 2.0
    return scale.reshape((-1,) + (1,) * (samples.ndim - 1)) * np.tensordot(
        P * rule.weights, samples, axes=(1, 0)
    )


def synthesize(coeffs, t):
    """Evaluate ``sum_l coeffs[l] P_l(t)``."""
    coeffs = np.asarray(coeffs)
    t = _check_domain(t)
    P = _recurrence(len(coeffs) - 1, t)
    return np.tensordot(coeffs, P, axes=(0, 0))


@lru_cache(maxsize=4)
def _central_ratio(mmax: int) -> np.ndarray:
    # binom(2m, m) / 4^m, bounded in (0, 1]; the powers of 4 cancel in the triple-product formula
    b = np.empty(mmax + 1)
    b[0] = 1.0
    m = np.arange(1, mmax + 1)
    b[1:] = np.cumprod((2 * m - 1) / (2.0 * m))
    return b


def _gamma_closed_form(L, l, lp):
    L, l, lp = np.broadcast_arrays(np.asarray(L), np.asarray(l), np.asarray(lp))
    s2 = L + l + lp
    ok = (s2 % 2 == 0) & (L >= np.abs(l - lp)) & (L <= l + lp)
    s = s2 // 2
    B = _central_ratio(max(int(np.max(s2, initial=0)) // 2 + 1, 1))
    sl = np.where(ok, s - l, 0)
    slp = np.where(ok, s - lp, 0)
    sL = np.where(ok, s - L, 0)
    ss = np.where(ok, s, 0)
    # B[sl] * B[slp] first so that swapping l and l' is bitwise symmetric
    val = (2 * L + 1) / (2 * ss + 1) * (B[sl] * B[slp]) * B[sL] / B[ss]
    return np.where(ok, val, 0.0)


def gamma_coefficient(L: int, l: int, lp: int) -> float:
    """``(2L+1)/2 * int_{-1}^{1} P_L P_l P_lp dt``; exact zero off the support."""
    if min(L, l, lp) < 0:
        raise ValueError("indices must be non-negative")
    return float(_gamma_closed_form(L, l, lp))


class GammaTable:
    """Triple-product coefficients ``Gamma(L; l, l')`` for indices <= ``max_degree``.

    Up to ``DENSE_LIMIT`` the full cube ``values[L, l, l']`` is stored
    ((max_degree+1)^3 doubles, 17 MB at 128).  Above that only the sparse
    product kernels requested by :func:`star_convolve` are materialised, each
    with about ``n_u * n_v * min(n_u, n_v) / 2`` entries.
    """

    def __init__(self, max_degree: int):
        if max_degree < 0:
            raise ValueError("max_degree must be non-negative")
        self.max_degree = int(max_degree)
        self._values = None
        if self.max_degree <= DENSE_LIMIT:
            idx = np.arange(self.max_degree + 1)
            self._values = _gamma_closed_form(
                idx[:, None, None], idx[None, :, None], idx[None, None, :]
            )
            self._values.setflags(write=False)
        self._kernels: dict[tuple[int, int], sparse.csr_matrix] = {}

    @property
    def dense(self) -> bool:
        return self._values is not None

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            raise AttributeError(f"no dense storage above max_degree={DENSE_LIMIT}")
        return self._values

    def __call__(self, L, l, lp):
        if self._values is not None and max(np.max(L), np.max(l), np.max(lp)) <= self.max_degree:
            return self._values[L, l, lp]
        return _gamma_closed_form(L, l, lp)

    def kernel(self, nu: int, nv: int) -> sparse.csr_matrix:
        """Sparse map from ``outer(u, v).ravel()`` to the product series.

        ``nu`` and ``nv`` are the series lengths.
        """
        key = (nu, nv)
        K = self._kernels.get(key)
        if K is not None:
            return K
        deg = nu + nv - 2
        if deg > self.max_degree:
            raise ValueError(
                f"Gamma table too small: product degree {deg} > max_degree {self.max_degree}"
            )
        l, lp = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
        l, lp = l.ravel(), lp.ravel()
        nterms = np.minimum(l, lp) + 1
        col = np.repeat(np.arange(l.size), nterms)
        offs = np.arange(nterms.sum()) - np.repeat(np.cumsum(nterms) - nterms, nterms)
        ll, llp = l[col], lp[col]
        L = np.abs(ll - llp) + 2 * offs
        vals = self(L, ll, llp)
        K = sparse.csr_matrix((vals, (L, col)), shape=(deg + 1, nu * nv))
        self._kernels[key] = K
        return K


def build_gamma_table(max_degree: int) -> GammaTable:
    return GammaTable(max_degree)


def star_convolve(u, v, table: GammaTable) -> np.ndarray:
    """Legendre coefficients of the pointwise product of two series."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.ndim != 1 or v.ndim != 1 or u.size == 0 or v.size == 0:
        raise ValueError("star_convolve expects non-empty 1-D coefficient arrays")
    K = table.kernel(u.size, v.size)
    return K @ np.outer(u, v).ravel()
