"""Information back-flow and the channel-capacity non-Markovianity measure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import bath_config, dephasing_factor, dephasing_rate, rate_scan
from .quadrature import QuadratureConfig
from .spectral import CutoffKind, SpectralParams, TemperatureSpec

__all__ = [
    "BackflowReport",
    "BracketFailure",
    "binary_entropy",
    "channel_capacity",
    "find_backflow_intervals",
    "has_backflow",
    "nonmarkovianity_measure",
    "markovian_crossover",
]

DEFAULT_TAU_MAX = 200.0
DEFAULT_SCAN_POINTS = 4000
ROOT_TOL = 1e-6


class BracketFailure(ArithmeticError):
    """A search predicate or objective does not change as required over its bracket."""


@dataclass(frozen=True)
class BackflowReport:
    intervals: list[tuple[float, float]] = field(default_factory=list)
    n_q: float = 0.0
    # True when the last interval was still open at tau_max and got cut there.
    truncated: bool = False


def binary_entropy(prob):
    """Shannon entropy in bits of a two-outcome distribution, with ``0 log 0 = 0``."""
    p = np.asarray(prob, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("probability must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0)
              + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return h if h.ndim else float(h)


def channel_capacity(lambda_value):
    """``Q = 1 - H2((1 + exp(-Lambda)) / 2)`` for the dephasing channel.

    Written in terms of ``r = exp(-Lambda)`` as
    ``((1+r) log(1+r) + (1-r) log(1-r)) / (2 ln 2)``, with the even power
    series for small ``r`` so that ``Q`` stays strictly decreasing.
    """
    lam = np.asarray(lambda_value, dtype=float)
    if np.any(lam < 0) or np.any(np.isnan(lam)):
        raise ValueError("decoherence factor must be >= 0")
    r = np.exp(-lam)
    out = np.empty_like(r)
    small = r < 0.1
    rs = r[small]
    r2 = rs * rs
    series = np.zeros_like(rs)
    term = np.ones_like(rs)
    for k in range(1, 14):
        term = term * r2
        series += term / (k * (2 * k - 1))
    out[small] = series
    rl = r[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        big = (1 + rl) * np.log1p(rl) + np.where(rl < 1, (1 - rl) * np.log1p(-rl), 0.0)
    out[~small] = big
    out /= 2.0 * math.log(2.0)
    return out if out.ndim else float(out)


def _noise_floor(cfg: QuadratureConfig) -> float:
    return 1e-2 * cfg.abs_tol


def _scan(p, t, tau_max, cfg, n_scan):
    if not tau_max > 0:
        raise ValueError("tau_max must be positive")
    tau = tau_max * np.arange(1, n_scan + 1) / n_scan
    gam, _ = rate_scan(p, t, tau, cfg, estimate_errors=False)
    return tau, gam < -_noise_floor(cfg)


def has_backflow(p: SpectralParams, t: TemperatureSpec, tau_max: float = DEFAULT_TAU_MAX,
                 cfg: QuadratureConfig | None = None, n_scan: int = DEFAULT_SCAN_POINTS) -> bool:
    """Whether ``gamma`` turns negative anywhere on the scan grid."""
    _, neg = _scan(p, t, tau_max, bath_config(p, cfg), n_scan)
    return bool(neg.any())


def _refine(p, t, lo, hi, lo_negative, cfg):
    """Bisect the sign change of ``gamma`` inside ``[lo, hi]``."""
    floor = _noise_floor(cfg)
    while hi - lo > ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if (dephasing_rate(p, t, mid, cfg) < -floor) == lo_negative:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _intervals(p, t, tau_max, cfg, n_scan):
    tau, neg = _scan(p, t, tau_max, cfg, n_scan)
    if not neg.any():
        return [], False
    out = []
    start = 0.0 if neg[0] else None
    if neg[0]:
        start = _refine(p, t, 0.0, tau[0], False, cfg)
    for k in range(1, tau.size):
        if neg[k] and not neg[k - 1]:
            start = _refine(p, t, tau[k - 1], tau[k], False, cfg)
        elif neg[k - 1] and not neg[k]:
            out.append((start, _refine(p, t, tau[k - 1], tau[k], True, cfg)))
            start = None
    truncated = start is not None
    if truncated:
        out.append((start, float(tau_max)))
    return out, truncated


def find_backflow_intervals(p: SpectralParams, t: TemperatureSpec,
                            tau_max: float = DEFAULT_TAU_MAX,
                            cfg: QuadratureConfig | None = None,
                            n_scan: int = DEFAULT_SCAN_POINTS) -> list[tuple[float, float]]:
    """Maximal time intervals in ``(0, tau_max]`` on which ``gamma < 0``.

    ``gamma`` is scanned on ``n_scan`` uniform points and each sign change is
    refined by bisection to ``1e-6``. An interval still open at ``tau_max``
    is closed there.
    """
    return _intervals(p, t, tau_max, bath_config(p, cfg), n_scan)[0]


def nonmarkovianity_measure(p: SpectralParams, t: TemperatureSpec,
                            tau_max: float = DEFAULT_TAU_MAX,
                            cfg: QuadratureConfig | None = None,
                            n_scan: int = DEFAULT_SCAN_POINTS) -> BackflowReport:
    """Total channel capacity regained over all back-flow intervals."""
    cfg = bath_config(p, cfg)
    intervals, truncated = _intervals(p, t, tau_max, cfg, n_scan)
    gains = []
    for a, b in intervals:
        qa = channel_capacity(dephasing_factor(p, t, a, cfg))
        qb = channel_capacity(dephasing_factor(p, t, b, cfg))
        gains.append(max(qb - qa, 0.0))
    return BackflowReport(intervals, math.fsum(gains), truncated)


def markovian_crossover(t: TemperatureSpec, cutoff: CutoffKind = CutoffKind.SOFT,
                        cfg: QuadratureConfig | None = None, bracket=(1.0, 6.0),
                        tau_max: float = DEFAULT_TAU_MAX, s_tol: float = 0.01,
                        n_scan: int = DEFAULT_SCAN_POINTS) -> float:
    """Smallest Ohmicity at which back-flow appears before ``tau_max``, by bisection."""
    lo, hi = bracket

    def flows(s):
        return has_backflow(SpectralParams(s, cutoff), t, tau_max, cfg, n_scan)

    if flows(lo) or not flows(hi):
        raise BracketFailure(
            f"back-flow predicate does not switch on over s in ({lo}, {hi}] for {t}"
        )
    while hi - lo > s_tol:
        mid = 0.5 * (lo + hi)
        if flows(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
