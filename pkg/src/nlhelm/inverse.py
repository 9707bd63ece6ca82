"""Inverse problem: identify the Chebyshev coefficients of the nonlinearity ring by ring.

At every interior radius the source coefficients are recovered from the
radial ODE with a three-point nonuniform stencil; they depend linearly on
the unknown coefficients, so each ring is a single real least-squares solve.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr, solve_triangular

from .chebyshev import chebyshev_ladder, normalize_intensity
from .forward import RadialProfile, Trajectory
from .legendre import GammaTable, QuadratureRule, gauss_legendre, project, star_convolve, synthesize

__all__ = [
    "RingSamples",
    "InverseConfig",
    "RingResult",
    "InverseResult",
    "second_derivative_nonuniform",
    "recover_F_ell",
    "design_matrix",
    "solve_ring",
    "invert",
    "estimate_bounds",
    "trajectory_from_field_samples",
    "required_table_degree",
]


def second_derivative_nonuniform(y_minus, y_0, y_plus, h_minus, h_plus):
    """Three-point second derivative on a nonuniform grid.

    Exact for quadratics; first order in general, second order when the
    spacings are equal.
    """
    h_minus = np.asarray(h_minus, dtype=float)
    h_plus = np.asarray(h_plus, dtype=float)
    if np.any(h_minus <= 0) or np.any(h_plus <= 0):
        raise ValueError("stencil spacings must be positive")
    num = h_minus * y_plus + h_plus * y_minus - (h_plus + h_minus) * y_0
    return num / (0.5 * h_minus * h_plus * (h_plus + h_minus))


@dataclass(frozen=True)
class RingSamples:
    """Spectral coefficients at three consecutive radii around one ring."""

    r: tuple
    u: tuple

    def __post_init__(self):
        r = tuple(float(x) for x in self.r)
        if len(r) != 3 or not (r[0] < r[1] < r[2]):
            raise ValueError("ring radii must be three strictly increasing values")
        u = tuple(np.asarray(x, dtype=complex) for x in self.u)
        if len(u) != 3 or len({x.shape for x in u}) != 1:
            raise ValueError("ring needs three coefficient arrays of equal length")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_trajectory(cls, traj: Trajectory, j: int) -> "RingSamples":
        if not 0 < j < len(traj) - 1:
            raise ValueError(f"ring {j} has no two-sided stencil")
        return cls(tuple(traj.r[j - 1 : j + 2]), tuple(traj.coefficients(i) for i in (j - 1, j, j + 1)))


def recover_F_ell(ring: RingSamples, k: float, nu, eps) -> np.ndarray:
    """Source coefficients ``F_l`` at the centre radius of ``ring``."""
    nu, eps = _profile(nu), _profile(eps)
    rm, r, rp = ring.r
    um, u, up = ring.u
    e = eps(r)
    if e == 0:
        raise ZeroDivisionError(f"eps(r) vanishes at r={r}; the source cannot be recovered")
    d2 = second_derivative_nonuniform(rm * um, r * u, rp * up, r - rm, rp - r)
    l = np.arange(u.size)
    lam = l * (l + 1)
    return -2.0 / ((2 * l + 1) * e) * (d2 / r - lam / r**2 * u + k**2 * nu(r) * u)


@dataclass(frozen=True)
class InverseConfig:
    K: int
    interval: tuple
    L_max: int | None = None
    rings: object = "all"
    ridge: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.K, int) and self.K >= 1):
            raise ValueError("K must be a positive integer")
        alpha, beta = (float(x) for x in self.interval)
        if not beta > alpha:
            raise ValueError(f"degenerate interval ({alpha}, {beta})")
        object.__setattr__(self, "interval", (alpha, beta))
        if self.L_max is not None and self.L_max < 0:
            raise ValueError("L_max must be non-negative")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")
        if self.L_max is not None and 2 * (self.L_max + 1) < self.K and self.ridge == 0:
            raise ValueError("fewer stacked rows than unknowns")
        if not (self.rings == "all" or isinstance(self.rings, (list, tuple))):
            raise ValueError("rings must be 'all' or a list of indices")

    def select(self, traj: Trajectory) -> list[int]:
        interior = range(1, len(traj) - 1)
        if self.rings == "all":
            return list(interior)
        bad = [j for j in self.rings if j not in interior]
        if bad:
            raise ValueError(f"ring indices without a two-sided stencil: {bad}")
        return [int(j) for j in self.rings]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "interval": list(self.interval),
            "L_max": self.L_max,
            "rings": self.rings if self.rings == "all" else list(self.rings),
            "ridge": self.ridge,
        }


def required_table_degree(N: int, K: int) -> int:
    """Gamma-table degree needed by :func:`design_matrix` for ``deg(u) = N``."""
    return max(1, 2 * N * max(K - 1, 1) + N)


def design_matrix(u, cfg: InverseConfig, table: GammaTable) -> np.ndarray:
    """Complex matrix ``M`` with predicted ``F_l = sum_k M[l, k] a_k`` for ``l <= L_max``."""
    u = np.asarray(u, dtype=complex)
    N = u.size - 1
    L_max = N if cfg.L_max is None else min(cfg.L_max, N)
    d = star_convolve(u, u.conj(), table).real
    g = normalize_intensity(d, cfg.interval)
    ladder = chebyshev_ladder(g, cfg.K, table)
    l = np.arange(L_max + 1)
    M = np.empty((L_max + 1, cfg.K), dtype=complex)
    for k, Tk in enumerate(ladder):
        c = star_convolve(Tk, u, table)
        M[:, k] = 2.0 * c[: L_max + 1] / (2 * l + 1)
    return M


def solve_ring(F_values, M, cfg: InverseConfig):
    """Real least squares on the real/imaginary-stacked system.

    Returns ``(a, residual_norm, condition_estimate)``.  Uses QR with column
    pivoting; a numerically rank-deficient system falls back to the
    minimum-norm SVD solution and reports an infinite condition estimate.
    """
    F_values = np.asarray(F_values)
    M = np.asarray(M)
    rows = M.shape[0]
    if F_values.shape[0] < rows:
        raise ValueError("fewer source values than design-matrix rows")
    F_values = F_values[:rows]
    A = np.vstack([M.real, M.imag])
    b = np.concatenate([F_values.real, F_values.imag])
    K = A.shape[1]
    if cfg.ridge > 0:
        A = np.vstack([A, np.sqrt(cfg.ridge) * np.eye(K)])
        b = np.concatenate([b, np.zeros(K)])
    Qm, R, piv = qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    if diag.size and diag[-1] > tol:
        a = np.empty(K)
        a[piv] = solve_triangular(R, Qm.T @ b)
        cond = float(diag[0] / diag[-1])
    else:
        a = np.linalg.lstsq(A, b, rcond=None)[0]
        cond = float("inf")
    residual = float(np.linalg.norm(A @ a - b))
    return a, residual, cond


@dataclass
class RingResult:
    index: int
    r: float
    a: np.ndarray
    residual_norm: float
    condition_estimate: float


@dataclass
class InverseResult:
    rings: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rings)

    @property
    def r(self) -> np.ndarray:
        return np.array([x.r for x in self.rings])

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([x.a for x in self.rings])

    def deviation(self, reference) -> np.ndarray:
        """Per-ring max-abs deviation from ``reference``."""
        ref = np.asarray(reference, dtype=float)
        return np.max(np.abs(self.coefficients - ref), axis=1)

    def to_csv(self) -> str:
        K = self.coefficients.shape[1] if self.rings else 0
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r"] + [f"a_{k}" for k in range(K)] + ["residual", "cond"])
        for rec in self.rings:
            w.writerow(
                [f"{rec.r:.6f}"]
                + [f"{x:.4e}" for x in rec.a]
                + [f"{rec.residual_norm:.4e}", f"{rec.condition_estimate:.4e}"]
            )
        return buf.getvalue()


def _profile(x) -> RadialProfile:
    return x if isinstance(x, RadialProfile) else RadialProfile.from_descriptor(x)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NLHELM_THREADS", "1")))
    except ValueError:
        return 1


def invert(traj: Trajectory, cfg: InverseConfig, k=None, nu=None, eps=None) -> InverseResult:
    """Identify the coefficients on every selected interior ring.

    ``k``, ``nu`` and ``eps`` default to the values echoed in the
    trajectory's configuration.
    """
    if len(traj) < 3:
        raise ValueError("no interior rings: trajectory needs at least 3 points")
    conf = traj.config
    k = conf["k"] if k is None else k
    nu = _profile(conf["nu"] if nu is None else nu)
    eps = _profile(conf["eps"] if eps is None else eps)
    table = GammaTable(required_table_degree(traj.N, cfg.K))
    selected = cfg.select(traj)
    if not selected:
        raise ValueError("no interior rings selected")

    def one(j):
        ring = RingSamples.from_trajectory(traj, j)
        F = recover_F_ell(ring, k, nu, eps)
        M = design_matrix(ring.u[1], cfg, table)
        a, res, cond = solve_ring(F, M, cfg)
        return RingResult(j, float(traj.r[j]), a, res, cond)

    # kernels are built lazily; warm the cache before any parallel use
    records = [one(selected[0])]
    rest = selected[1:]
    nthreads = _threads()
    if nthreads > 1 and len(rest) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            records.extend(ex.map(one, rest))
    else:
        records.extend(one(j) for j in rest)
    return InverseResult(records, cfg.to_dict())


def estimate_bounds(traj: Trajectory, t_grid_size: int = 64, margin: float = 0.01):
    """Range of ``|U|^2`` over all radii and a Gauss-Legendre grid in ``t``.

    Each side is widened by ``margin`` times the width; a degenerate range is
    widened by 1e-8 on each side.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    t = gauss_legendre(t_grid_size).nodes
    U = synthesize(traj.coefficients().T, t)
    intensity = (U * U.conj()).real
    lo, hi = float(intensity.min()), float(intensity.max())
    width = hi - lo
    if width <= 1e-8 * max(1.0, abs(hi)):
        return lo - 1e-8, hi + 1e-8
    return lo - margin * width, hi + margin * width


def trajectory_from_field_samples(r, samples, rule: QuadratureRule, N: int, config=None) -> Trajectory:
    """Build a trajectory from field values ``U(r_j, t_q)`` sampled at the rule's nodes.

    ``samples`` has shape ``(len(r), len(rule))``.  Only the ``r u_l`` half
    of the state is meaningful for inversion; ``v_l`` is filled by finite
    differences.
    """
    r = np.asarray(r, dtype=float)
    samples = np.asarray(samples, dtype=complex)
    u = project(samples.T, rule, N).T
    y = r[:, None] * u
    v = np.gradient(y, r, axis=0) if r.size > 1 else np.zeros_like(y)
    return Trajectory(r, np.hstack([y, v]), dict(config or {}))
