import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg
from scipy.integrate import quad
from scipy.special import roots_legendre

from nlhelm.legendre import (
    GammaTable,
    build_gamma_table,
    gamma_coefficient,
    gauss_legendre,
    legendre_eval_all,
    legendre_eval_all_with_derivative,
    project,
    star_convolve,
    synthesize,
)


def test_eval_endpoints_and_zero():
    np.testing.assert_allclose(legendre_eval_all(2, 1.0), [1, 1, 1])
    np.testing.assert_allclose(legendre_eval_all(2, 0.0), [1, 0, -0.5])


def test_eval_matches_monomial_forms():
    t = 0.3
    closed = [
        1.0,
        t,
        (3 * t**2 - 1) / 2,
        (5 * t**3 - 3 * t) / 2,
        (35 * t**4 - 30 * t**2 + 3) / 8,
    ]
    np.testing.assert_allclose(legendre_eval_all(4, t), closed, rtol=0, atol=1e-15)


def test_eval_rejects_outside_domain():
    with pytest.raises(ValueError):
        legendre_eval_all(3, 1.01)


def test_derivative_matches_numpy():
    t = np.linspace(-0.9, 0.9, 7)
    P, dP = legendre_eval_all_with_derivative(6, t)
    for l in range(7):
        c = np.zeros(l + 1)
        c[-1] = 1
        np.testing.assert_allclose(dP[l], npleg.legval(t, npleg.legder(c)), atol=1e-12)


def test_gauss_small_rules():
    r1 = gauss_legendre(1)
    np.testing.assert_allclose(r1.nodes, [0.0], atol=1e-16)
    np.testing.assert_allclose(r1.weights, [2.0])
    r2 = gauss_legendre(2)
    np.testing.assert_allclose(np.sort(r2.nodes), [-1 / np.sqrt(3), 1 / np.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(r2.weights, [1.0, 1.0], rtol=1e-15)


def test_gauss_integrates_t30():
    r = gauss_legendre(16)
    assert abs(np.dot(r.weights, r.nodes**30) - 2 / 31) <= 1e-14


@pytest.mark.parametrize("Q", [3, 17, 64, 200])
def test_gauss_against_scipy(Q):
    r = gauss_legendre(Q)
    x, w = roots_legendre(Q)
    order = np.argsort(r.nodes)
    np.testing.assert_allclose(r.nodes[order], x, atol=1e-14)
    np.testing.assert_allclose(r.weights[order], w, atol=1e-14)
    assert abs(r.weights.sum() - 2) <= 1e-13


def test_gauss_large_rule_converges():
    r = gauss_legendre(1000)
    assert abs(r.weights.sum() - 2) <= 1e-13
    assert np.all(r.weights > 0)


def test_project_examples():
    rule = gauss_legendre(8)
    P3 = legendre_eval_all(3, rule.nodes)[3]
    np.testing.assert_allclose(project(P3, rule, 5), [0, 0, 0, 1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(project(rule.nodes**2, rule, 4), [1 / 3, 0, 2 / 3, 0, 0], atol=1e-15)
    np.testing.assert_allclose(project(np.ones(8), rule, 3), [1, 0, 0, 0], atol=1e-15)


def test_synthesize_examples():
    assert synthesize([1, 0, 0], 0.37) == pytest.approx(1)
    assert synthesize([0, 1], 0.7) == pytest.approx(0.7)
    assert synthesize([1 / 3, 0, 2 / 3], 0.5) == pytest.approx(0.25, abs=1e-15)


@given(st.integers(0, 20), st.integers(0, 2**32 - 1))
def test_project_synthesize_roundtrip(N, seed):
    r = np.random.default_rng(seed)
    c = r.standard_normal(N + 1) + 1j * r.standard_normal(N + 1)
    rule = gauss_legendre(N + 1)
    np.testing.assert_allclose(project(synthesize(c, rule.nodes), rule, N), c, atol=1e-12)


def test_gamma_examples():
    for lp in range(4):
        for L in range(6):
            assert gamma_coefficient(L, 0, lp) == pytest.approx(float(L == lp), abs=1e-16)
    assert gamma_coefficient(0, 1, 1) == pytest.approx(1 / 3, abs=1e-15)
    assert gamma_coefficient(2, 1, 1) == pytest.approx(2 / 3, abs=1e-15)
    assert gamma_coefficient(1, 1, 1) == 0


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_gamma_against_adaptive_quadrature():
    # independent oracle: scipy quad of the triple product
    for L, l, lp in [(0, 1, 1), (2, 1, 1), (4, 3, 5), (7, 4, 5), (12, 6, 8)]:
        f = lambda t: npleg.legval(t, np.eye(L + 1)[L]) * npleg.legval(t, np.eye(l + 1)[l]) * npleg.legval(t, np.eye(lp + 1)[lp])
        ref = (2 * L + 1) / 2 * quad(f, -1, 1, epsabs=1e-15, epsrel=1e-14)[0]
        assert gamma_coefficient(L, l, lp) == pytest.approx(ref, abs=1e-12)


def test_gamma_table_degree_one():
    t = build_gamma_table(1)
    assert t(0, 0, 0) == pytest.approx(1)
    assert t(1, 0, 1) == pytest.approx(1)
    assert t(1, 1, 0) == pytest.approx(1)
    assert t(0, 1, 1) == pytest.approx(1 / 3)
    assert t(2, 1, 1) == pytest.approx(2 / 3)


def test_gamma_table_symmetry_and_rows():
    t = GammaTable(30)
    v = t.values
    np.testing.assert_array_equal(v, v.transpose(0, 2, 1))
    rows = v[:, :16, :16].sum(axis=0)
    np.testing.assert_allclose(rows, 1.0, atol=1e-12)
    assert v.min() >= 0 and v.max() <= 1


def test_gamma_large_degree_is_finite():
    # no overflow at degrees far beyond the dense limit
    assert np.isfinite(gamma_coefficient(400, 200, 200))
    big = GammaTable(300)
    assert not big.dense
    with pytest.raises(AttributeError):
        big.values


def test_convolve_examples(rng):
    t = GammaTable(10)
    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    np.testing.assert_allclose(star_convolve([1.0], v, t), v, atol=1e-15)
    np.testing.assert_allclose(star_convolve([0, 1], [0, 1], t), [1 / 3, 0, 2 / 3], atol=1e-15)


def test_convolve_pointwise_oracle(rng):
    t = GammaTable(10)
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    w = star_convolve(u, v, t)
    x = gauss_legendre(20).nodes
    np.testing.assert_allclose(synthesize(w, x), synthesize(u, x) * synthesize(v, x), atol=1e-12)


def test_convolve_matches_numpy_legmul(rng):
    t = GammaTable(20)
    u, v = rng.standard_normal(8), rng.standard_normal(11)
    np.testing.assert_allclose(star_convolve(u, v, t), npleg.legmul(u, v), atol=1e-13)


def test_convolve_table_too_small():
    with pytest.raises(ValueError, match="too small"):
        star_convolve(np.ones(5), np.ones(5), GammaTable(4))


@given(st.integers(0, 16), st.integers(0, 16), st.integers(0, 2**32 - 1))
def test_product_identity(du, dv, seed):
    r = np.random.default_rng(seed)
    u = r.standard_normal(du + 1) + 1j * r.standard_normal(du + 1)
    v = r.standard_normal(dv + 1) + 1j * r.standard_normal(dv + 1)
    w = star_convolve(u, v, GammaTable(32))
    t = np.linspace(-1, 1, 64)
    err = np.abs(synthesize(w, t) - synthesize(u, t) * synthesize(v, t)).max()
    assert err <= 1e-11 * (1 + np.abs(u).sum() * np.abs(v).sum())


@given(st.integers(0, 16), st.integers(0, 2**32 - 1))
def test_hermitian_product_is_real(du, seed):
    r = np.random.default_rng(seed)
    u = r.standard_normal(du + 1) + 1j * r.standard_normal(du + 1)
    w = star_convolve(u, u.conj(), GammaTable(32))
    assert np.abs(w.imag).max() <= 1e-12 * np.abs(u).sum() ** 2
