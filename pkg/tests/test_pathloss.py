import math

import numpy as np
import pytest
from scipy import integrate

from alohacorr.errors import DivergenceError
from alohacorr.pathloss import (
    PathLossModel,
    cross_integral,
    evaluate,
    integral_g,
    integral_g_numeric,
    integral_g_squared,
)

# int g(x) g(x - e1) dx for alpha=4, eps=1; scipy dblquad in polar and in
# Cartesian coordinates agree to 1.4e-14 relative.
C1 = 1.6482890770869498

ALPHAS = [2.5, 3, 4, 6]
EPSILONS = [0.01, 0.1, 1, 10]


def scipy_plane_integral(model, power):
    a, eps = model.alpha, model.epsilon
    f = lambda r: 2 * math.pi * r / (eps + r**a) ** power
    ell = eps ** (1 / a)
    head, _ = integrate.quad(f, 0, ell, epsabs=0, epsrel=1e-12, limit=200)
    tail, _ = integrate.quad(f, ell, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    return head + tail


def test_evaluate_examples():
    assert evaluate(PathLossModel(4, 1), 0) == 1.0
    assert evaluate(PathLossModel(4, 1), 1) == 0.5
    assert evaluate(PathLossModel(4, 0), 2) == 0.0625
    np.testing.assert_allclose(evaluate(PathLossModel(4, 1), np.array([0.0, 1.0])), [1.0, 0.5])


def test_evaluate_singular_origin():
    with pytest.raises(DivergenceError):
        evaluate(PathLossModel(4, 0), 0.0)
    with pytest.raises(ValueError):
        evaluate(PathLossModel(4, 1), -1.0)


@pytest.mark.parametrize("alpha,eps", [(2, 1), (1.5, 1), (4, -1), (4, math.inf)])
def test_invalid_models(alpha, eps):
    with pytest.raises(ValueError):
        PathLossModel(alpha, eps)


def test_monotone_and_radial():
    m = PathLossModel(3, 0.5)
    r = np.linspace(0, 20, 401)
    vals = evaluate(m, r)
    assert np.all(np.diff(vals) < 0)
    x = np.array([1.3, -0.4])
    rot = np.array([[0.6, -0.8], [0.8, 0.6]]) @ x
    assert evaluate(m, np.hypot(*x)) == pytest.approx(evaluate(m, np.hypot(*rot)), rel=1e-15)


def test_integral_examples():
    assert integral_g(PathLossModel(4, 1)) == pytest.approx(math.pi**2 / 2, rel=1e-14)
    assert integral_g(PathLossModel(4, 4)) == pytest.approx(math.pi**2 / 4, rel=1e-14)
    assert integral_g_squared(PathLossModel(4, 1)) == pytest.approx(math.pi**2 / 4, rel=1e-14)
    assert integral_g_squared(PathLossModel(4, 0.01)) == pytest.approx(math.pi**2 / 4 * 0.01**-1.5, rel=1e-13)
    assert integral_g_squared(PathLossModel(4, 0.01)) == pytest.approx(2467.40, abs=0.01)


@pytest.mark.parametrize("func", [integral_g, integral_g_squared, lambda m: cross_integral(m, 1.0)])
def test_singular_integrals_diverge(func):
    with pytest.raises(DivergenceError):
        func(PathLossModel(4, 0))


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("eps", EPSILONS)
def test_closed_forms_match_scipy(alpha, eps):
    m = PathLossModel(alpha, eps)
    assert integral_g(m) == pytest.approx(scipy_plane_integral(m, 1), rel=1e-8)
    assert integral_g_squared(m) == pytest.approx(scipy_plane_integral(m, 2), rel=1e-8)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("eps", EPSILONS)
def test_closed_forms_match_own_quadrature(alpha, eps):
    m = PathLossModel(alpha, eps)
    assert integral_g_numeric(m, 1).value == pytest.approx(integral_g(m), rel=1e-8)
    assert integral_g_numeric(m, 2).value == pytest.approx(integral_g_squared(m), rel=1e-8)


def test_cross_integral_oracle_value():
    m = PathLossModel(4, 1)
    assert cross_integral(m, 1.0) == pytest.approx(C1, rel=1e-8)
    assert 0 < C1 < math.pi**2 / 4


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("eps", [0.01, 1, 10])
def test_cross_integral_at_zero_is_g_squared(alpha, eps):
    m = PathLossModel(alpha, eps)
    assert cross_integral(m, 0.0) == pytest.approx(integral_g_squared(m), rel=1e-8)


@pytest.mark.parametrize("alpha,eps", [(2.5, 0.1), (4, 1), (4, 0.01), (6, 1)])
def test_cross_integral_strictly_decreasing(alpha, eps):
    m = PathLossModel(alpha, eps)
    vals = [cross_integral(m, d) for d in [0, 0.1, 0.25, 0.5, 1, 2, 4, 8, 16]]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-2 * vals[0]


@pytest.mark.parametrize("alpha", [2.5, 4, 6])
@pytest.mark.parametrize("eps", [0.01, 0.1, 10])
@pytest.mark.parametrize("d", [0.3, 1.0, 2.5])
def test_cross_integral_scaling_law(alpha, eps, d):
    # fixed compactification scale so the two sides take different quadrature paths
    lhs = cross_integral(PathLossModel(alpha, eps), d, scale=1.0)
    rhs = eps ** (2 / alpha - 2) * cross_integral(PathLossModel(alpha, 1), d * eps ** (-1 / alpha), scale=1.0)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_cross_integral_matches_cartesian_scipy():
    m = PathLossModel(3, 0.5)
    g = lambda x, y: 1 / (0.5 + np.hypot(x, y) ** 3)
    ref, _ = integrate.dblquad(lambda y, x: g(x, y) * g(x - 0.7, y), -np.inf, np.inf,
                               -np.inf, np.inf, epsabs=1e-12, epsrel=1e-10)
    assert cross_integral(m, 0.7) == pytest.approx(ref, rel=1e-7)
