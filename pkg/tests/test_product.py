import math

import numpy as np
import pytest
from scipy import integrate

from gaplimits.errors import ArgumentError
from gaplimits.variational.functionals import integral_I, integral_J, integral_L
from gaplimits.variational.product import (
    ProductTestFunction,
    lemma46_report,
    pointwise_check,
    product_functionals,
)


def test_family_constants():
    F = ProductTestFunction(100)
    assert F.A == pytest.approx(math.log(100) - 2 * math.log(math.log(100)))
    assert F.T == pytest.approx((math.exp(F.A) - 1) / F.A)
    assert float(F.g(0.0)) == 1.0
    assert float(F.g(F.T + 1e-9)) == 0.0
    assert float(F.G(F.T)) == pytest.approx(1.0, abs=1e-15)
    xs = np.linspace(0, F.T, 7)
    q = [integrate.quad(lambda t: 1 / (1 + F.A * t), 0, x)[0] for x in xs]
    q2 = [integrate.quad(lambda t: 1 / (1 + F.A * t) ** 2, 0, x)[0] for x in xs]
    assert np.allclose(F.G(xs), q, atol=1e-13)
    assert np.allclose(F.G2(xs), q2, atol=1e-13)


def test_small_k_rejected():
    with pytest.raises(ArgumentError):
        ProductTestFunction(1)
    # L - 2 log L >= 2 - 2 log 2 > 0, so A is positive for every k >= 2
    assert all(ProductTestFunction(k).A > 0 for k in range(2, 200))
    with pytest.raises(ArgumentError):
        ProductTestFunction(10, rho=0)


def test_sampler_matches_density():
    F = ProductTestFunction(50)
    u = F.sample(np.random.default_rng(1), 200000)
    assert u.min() >= 0 and u.max() <= F.T
    for x in (0.2, 0.7, 1.5):
        assert np.mean(u <= x) == pytest.approx(float(F.G2(x)) / F.m2, abs=5e-3)


def test_seeded_runs_are_reproducible():
    F = ProductTestFunction(30)
    a = product_functionals(F, "mc", samples=4000, seed=7)
    b = product_functionals(F, "mc", samples=4000, seed=7)
    assert a == b


def _nested_oracle(k):
    # direct nested quadrature of I, J, L for prod g(k t_i) on R_k (k = 3)
    F = ProductTestFunction(k)
    T = F.T / k
    gk = lambda t: 1.0 / (1.0 + F.A * k * t) if 0 <= t <= T else 0.0
    opts = dict(epsabs=1e-10, epsrel=1e-8, limit=100)
    I = integrate.nquad(
        lambda a, b, c: (gk(a) * gk(b) * gk(c)) ** 2,
        [lambda b, c: [0, max(0, min(T, 1 - b - c))], lambda c: [0, max(0, min(T, 1 - c))], [0, T]],
        opts=opts,
    )[0]

    def inner1(a, b):
        lim = min(T, 1 - a - b)
        return integrate.quad(gk, 0, lim, **opts)[0] if lim > 0 else 0.0

    J = integrate.nquad(
        lambda a, b: inner1(a, b) ** 2 * (gk(a) * gk(b)) ** 2, [lambda b: [0, max(0, min(T, 1 - b))], [0, T]], opts=opts
    )[0]

    def inner2(a):
        return integrate.quad(lambda b: gk(b) * inner1(a, b), 0, min(T, 1 - a), **opts)[0]

    L = integrate.quad(lambda a: inner2(a) ** 2 * gk(a) ** 2, 0, min(T, 1), **opts)[0]
    return I, J, L


def test_paths_match_nested_quadrature():
    I, J, L = _nested_oracle(3)
    F = ProductTestFunction(3)
    grid = product_functionals(F, "grid")
    assert grid.I.value == pytest.approx(I, rel=1e-5)
    assert grid.J.value == pytest.approx(J, rel=1e-5)
    assert grid.L.value == pytest.approx(L, rel=1e-5)
    mc = product_functionals(F, "mc", samples=20000)
    for est, ref in ((mc.I, I), (mc.J, J), (mc.L, L)):
        assert abs(est.value / ref - 1) <= 4 * est.rel_stderr
    # the generic entry points dispatch on the product form
    assert integral_I(F).log == pytest.approx(math.log(I), abs=5e-3)
    assert integral_J(F).log == pytest.approx(math.log(J), abs=5e-3)
    assert integral_L(F).log == pytest.approx(math.log(L), abs=5e-3)


def test_grid_and_mc_agree_large_k():
    F = ProductTestFunction(100)
    mc = product_functionals(F, "mc", samples=20000)
    grid = product_functionals(F, "grid")
    assert mc.l_over_i == pytest.approx(grid.l_over_i, rel=1e-3)
    assert mc.j_over_i == pytest.approx(grid.j_over_i, rel=1e-3)


def test_scaling_exponents():
    a = product_functionals(ProductTestFunction(40), "grid")
    b = product_functionals(ProductTestFunction(40, rho=0.5, delta=0.5), "grid")
    s = math.log(0.25)
    assert b.I.log - a.I.log == pytest.approx(40 * s)
    assert b.J.log - a.J.log == pytest.approx(41 * s)
    assert b.L.log - a.L.log == pytest.approx(42 * s)
    assert b.j_over_i == pytest.approx(0.25 * a.j_over_i)


def test_pointwise_inequality():
    chk = pointwise_check(ProductTestFunction(100), n=200)
    assert chk.quad_error < 1e-12
    assert chk.max_excess <= 1e-9


def test_report_bounds():
    r = lemma46_report(100, samples=5000, points=100)
    assert r.j_bound == pytest.approx(math.log(100) / 100)
    assert r.functionals.l_over_i <= r.l_bound
    assert r.functionals.j_over_i <= r.j_bound
