"""Gamma and digamma for real arguments.

Lanczos approximation (g = 7, nine terms) with the reflection formula below
one half. Relative accuracy is a few ulp over the range the closed-form
stationary coherences need.
"""

import math

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Euler Gamma function.

    Raises ValueError at the poles (non-positive integers).
    """
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for k, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + k)
    t = x + _LANCZOS_G + 0.5
    # t**(x+0.5) overflows for x > ~140 before exp(-t) can bring it back.
    return math.sqrt(2.0 * math.pi) * math.exp((x + 0.5) * math.log(t) - t) * acc


def digamma(x: float) -> float:
    """Logarithmic derivative of the Gamma function."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"digamma has a pole at {x}")
    if x < 0:
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    # Asymptotic series with Bernoulli-number coefficients.
    series = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (
        1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12.0))))))
    return shift + math.log(x) - 0.5 / x - series
