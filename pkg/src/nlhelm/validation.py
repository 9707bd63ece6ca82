"""Property checks shared by ``nlhelm validate`` and the acceptance tests."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .chebyshev import ChebPoly, compose_clenshaw, compose_dyadic
from .experiments import random_roundtrip
from .inverse import second_derivative_nonuniform
from .legendre import GammaTable, gauss_legendre, project, star_convolve, synthesize
from .special import plane_wave_coeffs

__all__ = ["CheckResult", "run_all", "CHECKS"]


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    passed: bool
    counterexample: object = None

    def to_dict(self):
        return asdict(self)


def _result(name, errors, tol, examples):
    errors = np.asarray(errors, dtype=float)
    worst = int(np.argmax(errors))
    max_err = float(errors[worst])
    passed = bool(max_err <= tol)
    return CheckResult(name, max_err, tol, passed, None if passed else examples[worst])


def gamma_normalization(rng, lmax=40, table=None):
    """Every Gamma lies in [0, 1] and sums to one over L, for l, l' <= lmax."""
    table = GammaTable(2 * lmax) if table is None else table
    l = np.arange(lmax + 1)
    G = table(np.arange(2 * lmax + 1)[:, None, None], l[None, :, None], l[None, None, :])
    row_err = np.abs(G.sum(axis=0) - 1.0)
    range_err = np.maximum(G - 1.0, 0.0) + np.maximum(-G, 0.0)
    errors = np.maximum(row_err, range_err.max(axis=0)).ravel()
    pairs = [{"l": int(a), "lp": int(b)} for a in l for b in l]
    return _result("gamma_normalization", errors, 1e-12, pairs)


def gamma_vs_quadrature(rng, lmax=20):
    """Closed-form Gamma against Gauss-Legendre evaluation of the triple integral."""
    rule = gauss_legendre(2 * lmax + 2)
    from .legendre import legendre_eval_all

    P = legendre_eval_all(2 * lmax, rule.nodes)
    L = np.arange(2 * lmax + 1)
    quad = np.einsum("aq,bq,cq,q->abc", P, P[: lmax + 1], P[: lmax + 1], rule.weights)
    quad *= ((2 * L + 1) / 2.0)[:, None, None]
    table = GammaTable(2 * lmax)
    l = np.arange(lmax + 1)
    closed = table(L[:, None, None], l[None, :, None], l[None, None, :])
    err = np.abs(quad - closed).max(axis=0).ravel()
    pairs = [{"l": int(a), "lp": int(b)} for a in l for b in l]
    return _result("gamma_vs_quadrature", err, 1e-12, pairs)


def convolution_product(rng, cases=50, maxdeg=16):
    """Coefficient-space product equals the pointwise product of the syntheses."""
    table = GammaTable(2 * maxdeg)
    t = np.linspace(-1, 1, 64)
    errors, examples = [], []
    for _ in range(cases):
        du, dv = rng.integers(0, maxdeg + 1, size=2)
        u = rng.standard_normal(du + 1) + 1j * rng.standard_normal(du + 1)
        v = rng.standard_normal(dv + 1) + 1j * rng.standard_normal(dv + 1)
        w = star_convolve(u, v, table)
        diff = np.abs(synthesize(w, t) - synthesize(u, t) * synthesize(v, t)).max()
        errors.append(diff / (1.0 + np.abs(u).sum() * np.abs(v).sum()))
        examples.append({"u": u.tolist().__repr__(), "v": v.tolist().__repr__()})
    return _result("convolution_product", errors, 1e-11, examples)


def random_composition_case(rng, max_d=4, max_fdeg=8):
    """A random ``(p, f)`` pair with ``f``'s range inside ``p``'s interval."""
    d = int(rng.integers(0, max_d + 1))
    K = int(rng.integers(2 ** (d - 1) + 1, 2**d + 1)) if d > 0 else 1
    fdeg = int(rng.integers(0, max_fdeg + 1))
    f = rng.uniform(-1.0, 1.0, fdeg + 1)
    vals = synthesize(f, np.linspace(-1, 1, 2001))
    lo, hi = vals.min(), vals.max()
    pad = 0.05 * (hi - lo) + 1e-3
    p = ChebPoly(rng.uniform(-1.0, 1.0, K), (lo - pad, hi + pad))
    return p, f


def composition_by_quadrature(p: ChebPoly, f) -> np.ndarray:
    n = p.degree * (len(f) - 1) + 1
    rule = gauss_legendre(n + 1)
    return project(p(synthesize(f, rule.nodes)), rule, n - 1)


def composition_oracles(rng, cases=100):
    """Dyadic composition, forward-ladder composition and quadrature projection agree."""
    errors, examples = [], []
    for _ in range(cases):
        p, f = random_composition_case(rng)
        deg = max(1, (2 ** max(1, int(np.ceil(np.log2(max(p.a.size, 2))))) - 1) * (len(f) - 1))
        table = GammaTable(deg)
        a = compose_dyadic(p, f, table)
        b = compose_clenshaw(p, f, table)
        c = composition_by_quadrature(p, f)
        n = max(len(a), len(b), len(c))
        a, b, c = (np.pad(x, (0, n - len(x))) for x in (a, b, c))
        errors.append(max(np.abs(a - b).max(), np.abs(a - c).max(), np.abs(b - c).max()))
        examples.append({"a": p.a.tolist(), "interval": list(p.interval), "f": f.tolist()})
    return _result("composition_oracles", errors, 1e-10, examples)


def stencil_scale(y_minus, y_0, y_plus, h_minus, h_plus):
    """Magnitude of the terms the stencil cancels, in second-derivative units."""
    terms = np.abs(h_minus * y_plus) + np.abs(h_plus * y_minus) + np.abs((h_plus + h_minus) * y_0)
    return terms / (0.5 * h_minus * h_plus * (h_plus + h_minus))


def stencil_exactness(rng, cases=1000):
    """Nonuniform stencil reproduces ``2 c2`` for random quadratics and spacings in [1e-4, 1].

    The error is measured relative to the size of the cancelled terms, i.e.
    the rounding floor of the three-point formula.
    """
    hm = 10.0 ** rng.uniform(-4, 0, cases)
    hp = 10.0 ** rng.uniform(-4, 0, cases)
    r0 = rng.uniform(1.0, 2.0, cases)
    c = rng.uniform(-1.0, 1.0, (3, cases))

    def y(r):
        return c[0] + c[1] * r + c[2] * r * r

    ym, y0, yp = y(r0 - hm), y(r0), y(r0 + hp)
    d2 = second_derivative_nonuniform(ym, y0, yp, hm, hp)
    scale = np.maximum(np.abs(2 * c[2]), stencil_scale(ym, y0, yp, hm, hp))
    errors = np.abs(d2 - 2 * c[2]) / scale
    examples = [
        {"c": c[:, i].tolist(), "r": float(r0[i]), "h_minus": float(hm[i]), "h_plus": float(hp[i])}
        for i in range(cases)
    ]
    return _result("stencil_exactness", errors, 1e-12, examples)


def plane_wave_expansion(rng, kR0_values=(1.0, 5.0)):
    """Truncated Legendre synthesis of the boundary data reproduces ``exp(i k R0 t)``."""
    t = np.linspace(-1, 1, 64)
    errors, examples = [], []
    for kR0 in kR0_values:
        N = int(kR0) + 40
        b = plane_wave_coeffs(kR0, 1.0, N)
        errors.append(np.abs(synthesize(b.h, t) - np.exp(1j * kR0 * t)).max())
        examples.append({"kR0": kR0, "N": N})
    return _result("plane_wave_expansion", errors, 1e-9, examples)


def roundtrip(rng):
    """Forward-then-invert with a random Chebyshev nonlinearity; median ring error."""
    seed = int(rng.integers(0, 2**31 - 1))
    out = random_roundtrip(seed)
    return _result(
        "roundtrip",
        [out.median_error],
        1e-3,
        [{"seed": seed, "a_true": out.a_true.tolist(), "interval": list(out.interval)}],
    )


CHECKS = {
    "gamma_normalization": gamma_normalization,
    "gamma_vs_quadrature": gamma_vs_quadrature,
    "convolution_product": convolution_product,
    "composition_oracles": composition_oracles,
    "stencil_exactness": stencil_exactness,
    "plane_wave_expansion": plane_wave_expansion,
    "roundtrip": roundtrip,
}


def run_all(seed: int = 0, corrupt_gamma: bool = False, only=None) -> list[CheckResult]:
    """Run the property checks with a seeded generator per check.

    ``corrupt_gamma`` is a negative control: the normalization check is fed
    a Gamma table scaled by 1.01.
    """
    results = []
    for i, (name, check) in enumerate(CHECKS.items()):
        if only is not None and name not in only:
            continue
        rng = np.random.default_rng([seed, i])
        if name == "gamma_normalization" and corrupt_gamma:
            table = GammaTable(80)
            table._values = table.values * 1.01
            results.append(check(rng, table=table))
        else:
            results.append(check(rng))
    return results
