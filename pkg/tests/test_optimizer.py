import math

import numpy as np
import pytest

from dephasim.dynamics import stationary_coherence
from dephasim.nonmarkov import BracketFailure
from dephasim.optimizer import (
    SweepResult,
    closed_form_s_opt,
    gamma_minimum_location,
    golden_section,
    ohmicity_sweep,
    optimal_s,
    temperature_sweep,
)
from dephasim.quadrature import QuadratureConfig
from dephasim.specfun import gamma
from dephasim.spectral import CutoffKind, SpectralParams, TemperatureSpec

SOFT, HARD = CutoffKind.SOFT, CutoffKind.HARD
ZERO, HIGH = TemperatureSpec.zero(), TemperatureSpec.high(1.0)


def test_gamma_minimum():
    x = gamma_minimum_location()
    assert x == pytest.approx(1.4616321449683623, abs=1e-12)
    assert gamma(x) == pytest.approx(0.8856031944108887, rel=1e-12)


def test_golden_section_parabola():
    x, fx = golden_section(lambda v: (v - 1.3) ** 2 + 2, 0, 4, xtol=1e-9)
    assert x == pytest.approx(1.3, abs=1e-7)
    assert fx == pytest.approx(2.0)


def test_golden_section_edge_minimum():
    with pytest.raises(BracketFailure):
        golden_section(lambda v: v, 0, 1)


@pytest.mark.parametrize("cutoff, t, expected", [
    (SOFT, ZERO, 2.46), (SOFT, HIGH, 3.46), (HARD, ZERO, 3.92), (HARD, HIGH, 4.92),
])
def test_optimal_s_regimes(cutoff, t, expected):
    opt = optimal_s(cutoff, t)
    assert opt.s_opt == pytest.approx(closed_form_s_opt(cutoff, t), abs=1e-5)
    assert opt.s_opt == pytest.approx(expected, abs=0.01)


def test_coherence_at_optimum():
    opt = optimal_s(SOFT, ZERO)
    assert opt.coherence_at_opt == pytest.approx(math.exp(-2 * 0.8856031944108887), rel=1e-9)
    assert opt.coherence_at_opt == pytest.approx(0.1701, abs=1e-4)


@pytest.mark.parametrize("cutoff, t", [(SOFT, ZERO), (HARD, TemperatureSpec.finite(0.5))])
def test_optimum_is_a_maximum(cutoff, t):
    opt = optimal_s(cutoff, t)
    for ds in (-0.1, 0.1):
        other = stationary_coherence(SpectralParams(opt.s_opt + ds, cutoff), t).value
        assert other < opt.coherence_at_opt


def test_finite_temperature_tolerance_stability():
    t = TemperatureSpec.finite(1.0)
    base = optimal_s(SOFT, t).s_opt
    tight = optimal_s(SOFT, t, QuadratureConfig(abs_tol=5e-11, rel_tol=5e-9)).s_opt
    assert base == pytest.approx(tight, abs=1e-4)


def test_closed_form_rejects_finite():
    with pytest.raises(ValueError):
        closed_form_s_opt(SOFT, TemperatureSpec.finite(1.0))


def test_temperature_sweep_columns():
    res = temperature_sweep([SOFT, HARD], np.geomspace(0.05, 5, 6))
    assert res.header() == ["t_tilde", "s_opt_soft", "coherence_soft", "s_opt_hard",
                            "coherence_hard"]
    assert np.all(np.diff(res.columns["s_opt_soft"]) >= -1e-6)
    assert np.all(res.columns["s_opt_hard"] > res.columns["s_opt_soft"])
    assert len(res.rows()) == 6


def test_ohmicity_sweep_normalisation():
    res = ohmicity_sweep(np.arange(0.5, 5.01, 0.5), ZERO, tau_max=50)
    for c in ("soft", "hard"):
        norm = res.columns[f"coherence_{c}_norm"]
        assert norm.max() == pytest.approx(1.0)
        assert np.all(res.columns[f"coherence_{c}"][res.axis <= 1] == 0)
        nq = res.columns[f"n_q_{c}"]
        assert np.all(nq[res.axis <= 2] == 0)
        assert np.all(nq[res.axis > 2] > 0)


def test_ohmicity_sweep_parallel_matches_serial():
    grid = [1.5, 2.5, 3.5]
    a = ohmicity_sweep(grid, ZERO, 30, with_nq=False)
    b = ohmicity_sweep(grid, ZERO, 30, with_nq=False, jobs=2)
    for name in a.columns:
        np.testing.assert_array_equal(a.columns[name], b.columns[name])


def test_sweep_validation():
    with pytest.raises(ValueError):
        ohmicity_sweep([0.0, 1.0], ZERO)
    with pytest.raises(ValueError):
        SweepResult("s", [2.0, 1.0])
