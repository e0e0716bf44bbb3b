"""Ohmic-family spectral densities and the temperature-dressed weight ``g``.

All frequencies are in units of the cutoff frequency (``x = omega / omega_c``)
and temperatures are ``t_tilde = 2 k_B T / omega_c``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CutoffKind",
    "SpectralParams",
    "Regime",
    "TemperatureSpec",
    "OriginClass",
    "Convexity",
    "cutoff_function",
    "coth_factor",
    "spectral_density",
    "g_function",
    "origin_class",
    "convexity_check",
]


class CutoffKind(enum.Enum):
    SOFT = "soft"
    HARD = "hard"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self is CutoffKind.SOFT:
            return np.exp(-x)
        return np.exp(-x * x)


@dataclass(frozen=True)
class SpectralParams:
    """Ohmicity ``s``, cutoff shape and cutoff frequency.

    ``omega_c`` only matters when converting to physical units.
    """

    s: float
    cutoff: CutoffKind = CutoffKind.SOFT
    omega_c: float = 1.0

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ValueError(f"s must be a positive finite number, got {self.s}")
        if not (self.omega_c > 0 and math.isfinite(self.omega_c)):
            raise ValueError(f"omega_c must be positive, got {self.omega_c}")
        if not isinstance(self.cutoff, CutoffKind):
            object.__setattr__(self, "cutoff", CutoffKind(self.cutoff))


class Regime(enum.Enum):
    ZERO = "zero"
    FINITE = "finite"
    HIGH = "high"


@dataclass(frozen=True)
class TemperatureSpec:
    """Bath temperature regime.

    Build instances with :meth:`zero`, :meth:`finite` or :meth:`high`.
    """

    regime: Regime = Regime.ZERO
    t_tilde: float = 0.0

    def __post_init__(self):
        if not isinstance(self.regime, Regime):
            object.__setattr__(self, "regime", Regime(self.regime))
        if self.regime is Regime.ZERO:
            if self.t_tilde != 0.0:
                raise ValueError("zero-temperature regime takes no t_tilde")
        elif not (self.t_tilde > 0 and math.isfinite(self.t_tilde)):
            raise ValueError(f"t_tilde must be positive, got {self.t_tilde}")

    @classmethod
    def zero(cls):
        return cls(Regime.ZERO, 0.0)

    @classmethod
    def finite(cls, t_tilde: float):
        return cls(Regime.FINITE, float(t_tilde))

    @classmethod
    def high(cls, t_tilde: float = 1.0):
        return cls(Regime.HIGH, float(t_tilde))

    def __str__(self):
        if self.regime is Regime.ZERO:
            return "zero"
        return f"{self.regime.value}(t_tilde={self.t_tilde:g})"


class OriginClass(enum.Enum):
    DIVERGES = "diverges"
    FINITE_NONZERO = "finite_nonzero"
    VANISHES = "vanishes"


class Convexity(enum.Enum):
    CONVEX = "convex"
    NON_CONVEX = "non_convex"


def cutoff_function(kind: CutoffKind, x):
    return kind(x)


def coth_factor(x, t_tilde: float):
    """``coth(x / t_tilde)`` evaluated without overflow or cancellation."""
    y = np.asarray(x, dtype=float) / t_tilde
    out = np.ones_like(y)
    small = y < 1e-4
    mid = ~small & (y <= 30.0)
    ys = y[small]
    with np.errstate(divide="ignore"):
        out[small] = 1.0 / ys + ys / 3.0
    out[mid] = 1.0 / np.tanh(y[mid])
    return out if out.ndim else float(out)


def _check_domain(x, strict: bool):
    x = np.asarray(x, dtype=float)
    bad = x <= 0 if strict else x < 0
    if np.any(bad) or np.any(np.isnan(x)):
        bound = "> 0" if strict else ">= 0"
        raise ValueError(f"frequency must be {bound}")
    return x


def spectral_density(p: SpectralParams, x):
    """``J(x) = x**s f(x)`` in units where ``omega_c = 1``."""
    x = _check_domain(x, strict=False)
    out = x ** p.s * p.cutoff(x)
    return out if out.ndim else float(out)


def g_function(p: SpectralParams, t: TemperatureSpec, x):
    """``J(x)/x**2`` dressed by the thermal factor of the regime ``t``.

    Defined for ``x > 0`` only.
    """
    x = _check_domain(x, strict=True)
    if t.regime is Regime.ZERO:
        out = x ** (p.s - 2.0) * p.cutoff(x)
    elif t.regime is Regime.FINITE:
        out = x ** (p.s - 2.0) * p.cutoff(x) * coth_factor(x, t.t_tilde)
    else:
        out = t.t_tilde * x ** (p.s - 3.0) * p.cutoff(x)
    return out if out.ndim else float(out)


def origin_class(p: SpectralParams, t: TemperatureSpec) -> OriginClass:
    """How ``x g(x)`` behaves as ``x -> 0``; the cutoff never matters since ``f(0) = 1``.

    The exponent of ``x g`` at the origin is ``s - 1`` at zero temperature
    and ``s - 2`` once the thermal ``1/x`` factor is present.
    """
    exponent = p.s - 1.0 if t.regime is Regime.ZERO else p.s - 2.0
    if exponent < 0:
        return OriginClass.DIVERGES
    if exponent == 0:
        return OriginClass.FINITE_NONZERO
    return OriginClass.VANISHES


def convexity_check(p: SpectralParams, t: TemperatureSpec, x_max: float = 20.0,
                    n: int = 2048, x_floor: float = 1e-4) -> Convexity:
    """Detect a sign change of ``g''`` on a log-spaced grid over ``[x_floor, x_max]``.

    Second derivatives come from the three-point formula on the
    non-uniform grid. A sample only counts when ``|g''|`` clears the
    finite-difference noise floor ``1e3 * eps * |g| / h**2``.
    """
    if not x_max > x_floor:
        raise ValueError("x_max must exceed x_floor")
    if n < 64:
        raise ValueError("n must be >= 64")
    x = np.geomspace(x_floor, x_max, n)
    g = np.asarray(g_function(p, t, x))
    if not np.all(np.isfinite(g)):
        raise ArithmeticError("g is not finite on the convexity grid")
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    g2 = 2.0 * (h1 * g[2:] - (h1 + h2) * g[1:-1] + h2 * g[:-2]) / (h1 * h2 * (h1 + h2))
    noise = 1e3 * np.finfo(float).eps * np.abs(g[1:-1]) / (h1 * h2)
    significant = np.abs(g2) > noise
    if np.any(significant & (g2 > 0)) and np.any(significant & (g2 < 0)):
        return Convexity.NON_CONVEX
    return Convexity.CONVEX
