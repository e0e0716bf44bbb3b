import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dephasim.quadrature import (
    NotIntegrable,
    QuadratureConfig,
    _gk15,
    integrate_oscillatory,
    integrate_smooth,
    oscillatory_batch,
)


def test_kronrod_rule_exact_for_polynomials():
    for deg in range(0, 23):
        val, _ = _gk15(lambda x: x**deg, np.array([0.0]), np.array([1.0]))
        assert val[0] == pytest.approx(1.0 / (deg + 1), rel=1e-13)


@pytest.mark.parametrize("f, expected", [
    (lambda x: np.exp(-x), 1.0),
    (lambda x: x**1.5 * np.exp(-x), math.gamma(2.5)),
    (lambda x: x * np.exp(-x * x), 0.5),
    (lambda x: x**-0.5 * np.exp(-x), math.sqrt(math.pi)),
    (lambda x: x**-0.9 * np.exp(-x), math.gamma(0.1)),
])
def test_smooth_known_integrals(f, expected):
    res = integrate_smooth(f)
    assert res.value == pytest.approx(expected, rel=1e-9)
    assert res.error_estimate >= 0
    assert res.panels_used > 0


def test_smooth_finite_range():
    res = integrate_smooth(lambda x: np.cos(x), upper=math.pi / 2)
    assert res.value == pytest.approx(1.0, rel=1e-12)


def test_non_integrable_origin():
    with pytest.raises(NotIntegrable):
        integrate_smooth(lambda x: x**-1.2 * np.exp(-x))


@pytest.mark.parametrize("tau", [0.1, 1.0, 10.0, 100.0, 1000.0])
def test_sin_transform_of_exponential(tau):
    res = integrate_oscillatory(lambda x: np.exp(-x), "sin", tau)
    assert res.value == pytest.approx(tau / (1 + tau * tau), rel=1e-8, abs=1e-11)


@pytest.mark.parametrize("tau", [0.1, 1.0, 10.0, 100.0])
def test_cos_complement_of_exponential(tau):
    res = integrate_oscillatory(lambda x: np.exp(-x), "cos_complement", tau)
    assert res.value == pytest.approx(1 - 1 / (1 + tau * tau), rel=1e-8, abs=1e-11)


def test_oscillatory_at_zero_time():
    assert integrate_oscillatory(lambda x: np.exp(-x), "sin", 0.0).value == 0.0
    assert integrate_oscillatory(lambda x: np.exp(-x), "cos_complement", 0.0).value == 0.0


def test_gaussian_sin_transform_against_dawson():
    from scipy.special import dawsn
    # int_0^inf exp(-x^2) sin(x tau) dx = D(tau / 2)
    for tau in (0.5, 3.0, 30.0):
        res = integrate_oscillatory(lambda x: np.exp(-x * x), "sin", tau)
        assert res.value == pytest.approx(dawsn(tau / 2), rel=1e-8)


def test_batch_matches_single():
    env = lambda x: x**0.5 * np.exp(-x)
    taus = np.array([0.0, 0.3, 2.0, 17.0, 60.0])
    for mode in ("sin", "cos_complement"):
        vals, errs = oscillatory_batch(env, taus, mode)
        single = [integrate_oscillatory(env, mode, t).value for t in taus]
        np.testing.assert_allclose(vals, single, rtol=1e-8, atol=1e-11)
        assert np.all(errs >= 0)


def test_batch_without_errors_gives_nan():
    _, errs = oscillatory_batch(lambda x: np.exp(-x), [1.0, 2.0], "sin", estimate_errors=False)
    assert np.all(np.isnan(errs))


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), tau=st.floats(0.05, 40))
def test_linearity(a, b, tau):
    f1 = lambda x: np.exp(-x)
    f2 = lambda x: x * np.exp(-2 * x)
    combo = integrate_oscillatory(lambda x: a * f1(x) + b * f2(x), "sin", tau).value
    parts = (a * integrate_oscillatory(f1, "sin", tau).value
             + b * integrate_oscillatory(f2, "sin", tau).value)
    assert combo == pytest.approx(parts, abs=1e-9)


def test_deterministic():
    env = lambda x: x**1.3 * np.exp(-x)
    a = integrate_oscillatory(env, "sin", 37.0)
    b = integrate_oscillatory(env, "sin", 37.0)
    assert a == b


@pytest.mark.parametrize("kwargs", [
    {"abs_tol": 0.0}, {"rel_tol": -1.0}, {"max_panels": 0}, {"tail_cut": -5.0},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureConfig(**kwargs)


def test_unknown_mode():
    with pytest.raises(ValueError):
        integrate_oscillatory(lambda x: np.exp(-x), "tan", 1.0)
