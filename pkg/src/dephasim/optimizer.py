"""Optimal Ohmicity for coherence trapping and the sweeps behind the figures."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dynamics import stationary_coherence, stationary_lambda
from .nonmarkov import DEFAULT_TAU_MAX, BracketFailure, nonmarkovianity_measure
from .quadrature import QuadratureConfig
from .specfun import digamma
from .spectral import CutoffKind, Regime, SpectralParams, TemperatureSpec

__all__ = [
    "Optimum",
    "SweepResult",
    "golden_section",
    "gamma_minimum_location",
    "closed_form_s_opt",
    "optimal_s",
    "temperature_sweep",
    "ohmicity_sweep",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Optimum:
    s_opt: float
    coherence_at_opt: float


@dataclass
class SweepResult:
    axis_name: str
    axis: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        if self.axis.ndim != 1 or np.any(np.diff(self.axis) <= 0):
            raise ValueError("sweep axis must be strictly increasing")
        for name, col in self.columns.items():
            if len(col) != self.axis.size:
                raise ValueError(f"column {name!r} does not match the axis length")

    def add(self, name: str, values):
        values = np.asarray(values, dtype=float)
        if values.shape != self.axis.shape:
            raise ValueError(f"column {name!r} does not match the axis length")
        self.columns[name] = values

    def header(self):
        return [self.axis_name, *self.columns]

    def rows(self):
        cols = [self.axis, *self.columns.values()]
        return [tuple(float(c[i]) for c in cols) for i in range(self.axis.size)]


def golden_section(f, lo: float, hi: float, xtol: float = 1e-6, max_iter: int = 200):
    """Minimise a unimodal ``f`` on ``[lo, hi]``. Returns ``(x, f(x))``.

    Raises BracketFailure when the minimum sits on a bracket end, since the
    objective is then not unimodal inside the bracket.
    """
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc < fd else (d, fd)
    if x - lo <= 2 * xtol or hi - x <= 2 * xtol:
        raise BracketFailure(f"minimum found at bracket end ({x:.6g} in [{lo}, {hi}])")
    return x, fx


def gamma_minimum_location() -> float:
    """Positive root of the digamma function, where Gamma is smallest (about 1.4616)."""
    return brentq(digamma, 1.0, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def closed_form_s_opt(cutoff: CutoffKind, t: TemperatureSpec) -> float:
    """Optimal Ohmicity from the Gamma-function minimum; zero and high-T limits only."""
    x_star = gamma_minimum_location()
    if t.regime is Regime.FINITE:
        raise ValueError("no closed form at finite temperature")
    offset = 1.0 if t.regime is Regime.ZERO else 2.0
    scale = 1.0 if cutoff is CutoffKind.SOFT else 2.0
    return offset + scale * x_star


def _bracket(t: TemperatureSpec):
    return (1.05, 6.0) if t.regime is Regime.ZERO else (2.05, 6.0)


def optimal_s(cutoff: CutoffKind, t: TemperatureSpec, cfg: QuadratureConfig | None = None,
              xtol: float = 1e-6, bracket=None) -> Optimum:
    """Ohmicity maximising the stationary coherence, by golden-section search on ``Lambda(inf)``."""
    lo, hi = bracket or _bracket(t)
    s_opt, lam = golden_section(
        lambda s: stationary_lambda(SpectralParams(s, cutoff), t, cfg), lo, hi, xtol)
    return Optimum(s_opt, math.exp(-lam))


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _temperature_point(args):
    cutoff, t_tilde, cfg = args
    try:
        return optimal_s(cutoff, TemperatureSpec.finite(t_tilde), cfg)
    except ArithmeticError as exc:
        raise type(exc)(f"temperature sweep failed at t_tilde={t_tilde:g}: {exc}") from exc


def temperature_sweep(cutoff, t_tilde_grid, cfg: QuadratureConfig | None = None,
                      jobs: int = 1) -> SweepResult:
    """``s_opt`` and the coherence it achieves across temperatures.

    ``cutoff`` may be one kind or a sequence of kinds; columns are suffixed
    with the cutoff name.
    """
    cutoffs = [cutoff] if isinstance(cutoff, CutoffKind) else list(cutoff)
    grid = np.asarray(t_tilde_grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("temperatures must be positive")
    out = SweepResult("t_tilde", grid, metadata={
        "regime": "finite",
        "cutoffs": [c.value for c in cutoffs],
        "quadrature": _cfg_dict(cfg),
    })
    for c in cutoffs:
        opts = _map(_temperature_point, [(c, float(x), cfg) for x in grid], jobs)
        out.add(f"s_opt_{c.value}", [o.s_opt for o in opts])
        out.add(f"coherence_{c.value}", [o.coherence_at_opt for o in opts])
    return out


def _ohmicity_point(args):
    s, cutoff, t, tau_max, cfg, with_nq = args
    p = SpectralParams(s, cutoff)
    try:
        coherence = stationary_coherence(p, t, cfg).value
        n_q = nonmarkovianity_measure(p, t, tau_max, cfg).n_q if with_nq else math.nan
    except ArithmeticError as exc:
        raise type(exc)(f"ohmicity sweep failed at s={s:g}: {exc}") from exc
    return coherence, n_q


def _normalised(values: np.ndarray) -> np.ndarray:
    peak = np.max(values) if values.size else 0.0
    return values / peak if peak > 0 else np.zeros_like(values)


def ohmicity_sweep(s_grid, t: TemperatureSpec, tau_max: float = DEFAULT_TAU_MAX,
                   cfg: QuadratureConfig | None = None,
                   cutoffs=(CutoffKind.SOFT, CutoffKind.HARD),
                   with_nq: bool = True, jobs: int = 1) -> SweepResult:
    """Stationary coherence (0 when not trapped) and ``N_Q`` versus Ohmicity.

    Every column also gets a ``*_norm`` copy scaled to a maximum of one.
    """
    grid = np.asarray(s_grid, dtype=float)
    if np.any(grid <= 0) or np.any(grid > 8):
        raise ValueError("Ohmicity values must lie in (0, 8]")
    out = SweepResult("s", grid, metadata={
        "regime": str(t),
        "cutoffs": [c.value for c in cutoffs],
        "tau_max": tau_max,
        "quadrature": _cfg_dict(cfg),
    })
    for c in cutoffs:
        res = _map(_ohmicity_point, [(float(s), c, t, tau_max, cfg, with_nq) for s in grid],
                   jobs)
        out.add(f"coherence_{c.value}", [r[0] for r in res])
        if with_nq:
            out.add(f"n_q_{c.value}", [r[1] for r in res])
    for name in list(out.columns):
        out.add(f"{name}_norm", _normalised(out.columns[name]))
    return out


def _cfg_dict(cfg: QuadratureConfig | None) -> dict:
    cfg = cfg or QuadratureConfig()
    return {"abs_tol": cfg.abs_tol, "rel_tol": cfg.rel_tol, "max_panels": cfg.max_panels,
            "tail_cut": cfg.tail_cut}
