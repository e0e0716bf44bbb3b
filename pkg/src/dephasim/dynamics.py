"""Dephasing factor, dephasing rate and stationary coherence.

``Lambda(tau) = 2 int_0^inf g(x) (1 - cos(x tau)) dx`` and its time
derivative ``gamma(tau) = 2 int_0^inf x g(x) sin(x tau) dx``, with ``tau``
the time in units of ``1/omega_c``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .quadrature import (
    IntegralResult,
    QuadratureConfig,
    default_tail_cut,
    integrate_oscillatory,
    integrate_smooth,
    oscillatory_batch,
)
from .spectral import (
    CutoffKind,
    OriginClass,
    Regime,
    SpectralParams,
    TemperatureSpec,
    g_function,
    origin_class,
)
from .specfun import gamma as gamma_fn

__all__ = [
    "TimeGrid",
    "DephasingTrace",
    "StationaryCoherence",
    "bath_config",
    "dephasing_factor",
    "dephasing_rate",
    "compute_trace",
    "rate_scan",
    "coherence_evolution",
    "stationary_lambda",
    "stationary_coherence",
]

# Batch evaluation pays off while the shared composite rule stays this small.
_BATCH_PANEL_LIMIT = 6000


@dataclass(frozen=True)
class TimeGrid:
    tau: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if tau.ndim != 1 or tau.size < 1:
            raise ValueError("time grid must be a non-empty 1-d sequence")
        if tau[0] != 0.0:
            raise ValueError("time grid must start at tau = 0")
        if np.any(np.diff(tau) <= 0) or not np.all(np.isfinite(tau)):
            raise ValueError("time grid must be finite and strictly increasing")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @classmethod
    def uniform(cls, tau_max: float, points: int):
        if points < 2 or not tau_max > 0:
            raise ValueError("need tau_max > 0 and at least two points")
        return cls(np.linspace(0.0, tau_max, points))

    def __len__(self):
        return self.tau.size


@dataclass(frozen=True)
class DephasingTrace:
    grid: TimeGrid
    lam: np.ndarray
    gamma: np.ndarray
    lam_err: np.ndarray
    gamma_err: np.ndarray

    @property
    def tau(self):
        return self.grid.tau


@dataclass(frozen=True)
class StationaryCoherence:
    """Long-time coherence relative to its initial value.

    ``trapped`` is False when coherence is lost entirely; ``value`` is 0 then.
    """

    trapped: bool
    value: float
    lam_inf: float

    @classmethod
    def vanishing(cls):
        return cls(False, 0.0, math.inf)


def bath_config(p: SpectralParams, cfg: QuadratureConfig | None = None) -> QuadratureConfig:
    """Fill in the cutoff-specific tail cut when the caller did not set one."""
    cfg = cfg or QuadratureConfig()
    if cfg.tail_cut is None:
        cfg = dataclasses.replace(cfg, tail_cut=default_tail_cut(cfg.abs_tol, p.cutoff.value))
    return cfg


def _rate_envelope(p, t):
    return lambda x: 2.0 * x * g_function(p, t, x)


def _factor_envelope(p, t):
    return lambda x: 2.0 * g_function(p, t, x)


def dephasing_factor(p: SpectralParams, t: TemperatureSpec, tau: float,
                     cfg: QuadratureConfig | None = None, full_output: bool = False):
    """Decoherence factor ``Lambda(tau)``; the coherence decays as ``exp(-Lambda)``."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    res = integrate_oscillatory(_factor_envelope(p, t), "cos_complement", float(tau),
                                bath_config(p, cfg))
    res = IntegralResult(max(res.value, 0.0), res.error_estimate, res.panels_used)
    return res if full_output else res.value


def dephasing_rate(p: SpectralParams, t: TemperatureSpec, tau: float,
                   cfg: QuadratureConfig | None = None, full_output: bool = False):
    """Dephasing rate ``gamma(tau) = dLambda/dtau``; negative during recoherence."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    res = integrate_oscillatory(_rate_envelope(p, t), "sin", float(tau), bath_config(p, cfg))
    return res if full_output else res.value


def _batch_panels(tau_max: float, cfg: QuadratureConfig) -> float:
    return cfg.tail_cut * max(tau_max, 1.0) / (2.0 * math.pi)


def rate_scan(p: SpectralParams, t: TemperatureSpec, tau, cfg: QuadratureConfig | None = None,
              estimate_errors: bool = True):
    """``gamma`` on many time points at once. Returns (values, error estimates)."""
    cfg = bath_config(p, cfg)
    tau = np.asarray(tau, dtype=float)
    if tau.size and _batch_panels(float(tau.max()), cfg) <= _BATCH_PANEL_LIMIT:
        return oscillatory_batch(_rate_envelope(p, t), tau, "sin", cfg,
                                 estimate_errors=estimate_errors)
    res = [dephasing_rate(p, t, x, cfg, full_output=True) for x in tau]
    return (np.array([r.value for r in res]), np.array([r.error_estimate for r in res]))


def compute_trace(p: SpectralParams, t: TemperatureSpec, grid: TimeGrid,
                  cfg: QuadratureConfig | None = None) -> DephasingTrace:
    """Evaluate ``Lambda`` and ``gamma`` on every point of ``grid``.

    Moderate time ranges share one composite quadrature rule across all
    points; long ones fall back to per-point oscillatory quadrature.
    """
    if not isinstance(grid, TimeGrid):
        grid = TimeGrid(grid)
    cfg = bath_config(p, cfg)
    tau = grid.tau
    if _batch_panels(float(tau[-1]), cfg) <= _BATCH_PANEL_LIMIT:
        lam, lam_err = oscillatory_batch(_factor_envelope(p, t), tau, "cos_complement", cfg)
        gam, gam_err = oscillatory_batch(_rate_envelope(p, t), tau, "sin", cfg)
        lam = np.maximum(lam, 0.0)
    else:
        lr = [dephasing_factor(p, t, x, cfg, full_output=True) for x in tau]
        gr = [dephasing_rate(p, t, x, cfg, full_output=True) for x in tau]
        lam = np.array([r.value for r in lr])
        lam_err = np.array([r.error_estimate for r in lr])
        gam = np.array([r.value for r in gr])
        gam_err = np.array([r.error_estimate for r in gr])
    lam[0] = 0.0
    gam[0] = 0.0
    for arr in (lam, gam, lam_err, gam_err):
        arr.setflags(write=False)
    return DephasingTrace(grid, lam, gam, lam_err, gam_err)


def coherence_evolution(initial_offdiag_magnitude: float, trace: DephasingTrace) -> np.ndarray:
    """``|rho_01(tau)|`` for a qubit whose populations stay fixed."""
    if not 0.0 <= initial_offdiag_magnitude <= 0.5:
        raise ValueError("off-diagonal magnitude of a qubit state must lie in [0, 0.5]")
    return initial_offdiag_magnitude * np.exp(-np.asarray(trace.lam))


def _closed_form_lambda_inf(p: SpectralParams, t: TemperatureSpec):
    s = p.s
    if t.regime is Regime.ZERO:
        if p.cutoff is CutoffKind.SOFT:
            return 2.0 * gamma_fn(s - 1.0)
        return gamma_fn(0.5 * (s - 1.0))
    if t.regime is Regime.HIGH:
        if p.cutoff is CutoffKind.SOFT:
            return 2.0 * t.t_tilde * gamma_fn(s - 2.0)
        return t.t_tilde * gamma_fn(0.5 * s - 1.0)
    return None


def stationary_lambda(p: SpectralParams, t: TemperatureSpec,
                      cfg: QuadratureConfig | None = None) -> float:
    """``Lambda(inf)``, or ``inf`` when coherence is not trapped."""
    if origin_class(p, t) is not OriginClass.VANISHES:
        return math.inf
    closed = _closed_form_lambda_inf(p, t)
    if closed is not None:
        return closed
    return integrate_smooth(_factor_envelope(p, t), bath_config(p, cfg)).value


def stationary_coherence(p: SpectralParams, t: TemperatureSpec,
                         cfg: QuadratureConfig | None = None) -> StationaryCoherence:
    lam_inf = stationary_lambda(p, t, cfg)
    if math.isinf(lam_inf):
        return StationaryCoherence.vanishing()
    return StationaryCoherence(True, math.exp(-lam_inf), lam_inf)
