"""Exact pure-dephasing dynamics of a qubit coupled to an Ohmic-family boson bath."""

__version__ = "0.1.0"

from .dynamics import (
    DephasingTrace,
    StationaryCoherence,
    TimeGrid,
    coherence_evolution,
    compute_trace,
    dephasing_factor,
    dephasing_rate,
    stationary_coherence,
    stationary_lambda,
)
from .nonmarkov import (
    BackflowReport,
    BracketFailure,
    binary_entropy,
    channel_capacity,
    find_backflow_intervals,
    markovian_crossover,
    nonmarkovianity_measure,
)
from .optimizer import Optimum, SweepResult, ohmicity_sweep, optimal_s, temperature_sweep
from .quadrature import IntegralResult, QuadratureConfig, integrate_oscillatory, integrate_smooth
from .spectral import (
    Convexity,
    CutoffKind,
    OriginClass,
    SpectralParams,
    TemperatureSpec,
    convexity_check,
    g_function,
    origin_class,
    spectral_density,
)
