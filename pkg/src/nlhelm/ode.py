"""Dormand-Prince 5(4) integrator with a PI step-size controller."""
from __future__ import annotations

import numpy as np

__all__ = ["IntegrationError", "dormand_prince"]

# Butcher tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# 5th-order minus embedded 4th-order weights
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

SAFETY = 0.9
ALPHA = 0.7 / 5
BETA = 0.4 / 5
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class IntegrationError(RuntimeError):
    """Raised when the adaptive integration cannot continue."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


def dormand_prince(fun, x0, x1, y0, rtol=1e-8, atol=1e-10, first_step=None, max_step=None):
    """Integrate the real system ``y' = fun(x, y)`` from ``x0`` to ``x1``.

    Errors are controlled component-wise: every component of the local error
    estimate stays below ``atol + rtol * max(|y_n|, |y_{n+1}|)``.  The last
    step is shortened so the final abscissa is exactly ``x1``.

    Returns ``(xs, ys, stats)`` with ``ys`` of shape ``(len(xs), len(y0))``.
    """
    if not x1 > x0:
        raise ValueError("integration interval must satisfy x1 > x0")
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    span = x1 - x0
    h = span / 100 if first_step is None else float(first_step)
    hmax = span if max_step is None else float(max_step)
    h = min(h, hmax)
    hmin = 1e-12 * span

    x = float(x0)
    y = np.array(y0, dtype=float)
    k = np.empty((7, y.size))
    k[0] = fun(x, y)
    nfev = 1
    xs, ys = [x], [y.copy()]
    err_prev = 1e-4
    rejected_last = False
    n_rej = 0
    hs = []

    while x < x1:
        last = x1 - x <= 1.01 * h
        if last:
            h = x1 - x
        # overflow shows up as a non-finite error estimate, handled below
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(1, 7):
                k[s] = fun(x + C[s] * h, y + h * (np.dot(A[s], k[:s])))
            y_new = y + h * (B @ k)
            err_vec = h * (E @ k)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
        nfev += 6
        if not np.isfinite(err) or not np.all(np.isfinite(y_new)):
            raise IntegrationError("non-finite state", x=x, h=h)

        if err <= 1.0:
            x = x1 if last else x + h
            y = y_new
            k[0] = k[6]  # FSAL
            xs.append(x)
            ys.append(y.copy())
            hs.append(h)
            if err == 0.0:
                fac = MAX_FACTOR
            else:
                fac = SAFETY * err ** (-ALPHA) * err_prev**BETA
                fac = min(MAX_FACTOR, max(MIN_FACTOR, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            err_prev = max(err, 1e-4)
            rejected_last = False
            h = min(h * fac, hmax)
        else:
            n_rej += 1
            rejected_last = True
            h *= max(MIN_FACTOR, SAFETY * err ** (-1 / 5))
            if h < hmin:
                raise IntegrationError(
                    "step size underflow", x=x, h=h, err=err, accepted=len(hs)
                )

    stats = {
        "accepted_steps": len(hs),
        "rejected_steps": n_rej,
        "rhs_evaluations": nfev,
        "min_step": min(hs),
        "max_step": max(hs),
    }
    return np.array(xs), np.array(ys), stats
