"""Reference solutions and built-in coefficient fields.

The exact solution used throughout the studies is u(x, y) = Ai(x) e^{iy},
which satisfies -Delta u + (x - 1) u = 0 because Ai'' = x Ai.  The Airy
function is evaluated from its Maclaurin series (two independent series
solutions of f'' = x f) with compensated summation; on the working range
|x| <= 8 this is accurate to better than 1e-10 despite the alternating-term
cancellation at negative arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, OutOfValidatedRange
from .gpw import CoefficientField
from .poly2 import TruncatedPoly2

__all__ = [
    "AI_ZERO",
    "AI_PRIME_ZERO",
    "AIRY_RANGE",
    "airy_ai",
    "airy_derivatives",
    "AnalyticSolution",
    "airy_plane_solution",
    "field_affine",
    "field_constant",
    "field_cutoff_profile",
    "field_from_poly",
]

AI_ZERO = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AI_PRIME_ZERO = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
AIRY_RANGE = 8.0
MAX_AIRY_DERIVATIVE = 20


class _Kahan:
    """Compensated accumulator."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, term: float):
        y = term - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t


@lru_cache(maxsize=4096)
def airy_ai(x: float) -> tuple[float, float]:
    """(Ai(x), Ai'(x)) on |x| <= 8 by the Maclaurin series.

    Uses Ai = Ai(0) f + Ai'(0) g where f, g are the series solutions of
    w'' = x w with (f, f')(0) = (1, 0) and (g, g')(0) = (0, 1):
    f = sum a_k x^{3k}, g = sum b_k x^{3k+1}.
    """
    if abs(x) > AIRY_RANGE:
        raise OutOfValidatedRange(f"airy_ai validated on |x| <= {AIRY_RANGE}, got {x}")
    f_sum, fp_sum = _Kahan(), _Kahan()
    g_sum, gp_sum = _Kahan(), _Kahan()
    a = 1.0  # a_k, coefficient of x^{3k} in f
    b = 1.0  # b_k, coefficient of x^{3k+1} in g
    x2 = x * x
    x3 = x2 * x
    xf = 1.0  # x^{3k}
    xfm = 0.0  # x^{3k-1}, zero stands in for the absent k = 0 term
    xg = x  # x^{3k+1}
    f_sum.add(1.0)
    g_sum.add(xg)
    gp_sum.add(1.0)
    for k in range(1, 120):
        a /= (3 * k) * (3 * k - 1)
        b /= (3 * k + 1) * (3 * k)
        xf *= x3
        xg *= x3
        xfm = x2 if k == 1 else xfm * x3
        tf = a * xf
        tg = b * xg
        f_sum.add(tf)
        fp_sum.add(3 * k * a * xfm)
        g_sum.add(tg)
        gp_sum.add((3 * k + 1) * b * xf)
        if abs(tf) < 1e-20 * (1.0 + abs(f_sum.total)) and abs(tg) < 1e-20 * (
            1.0 + abs(g_sum.total)
        ):
            break
    ai = AI_ZERO * f_sum.total + AI_PRIME_ZERO * g_sum.total
    aip = AI_ZERO * fp_sum.total + AI_PRIME_ZERO * gp_sum.total
    return ai, aip


def airy_derivatives(x: float, m: int) -> np.ndarray:
    """Ai^(k)(x) for k = 0..m by the ODE recurrence.

    Differentiating Ai'' = x Ai gives Ai^(k+2) = x Ai^(k) + k Ai^(k-1).
    """
    if m < 0 or m > MAX_AIRY_DERIVATIVE:
        raise OutOfValidatedRange(
            f"airy derivatives supported for 0 <= m <= {MAX_AIRY_DERIVATIVE}"
        )
    ai, aip = airy_ai(x)
    out = np.zeros(m + 1)
    out[0] = ai
    if m >= 1:
        out[1] = aip
    for k in range(m - 1):
        out[k + 2] = x * out[k] + (k * out[k - 1] if k >= 1 else 0.0)
    return out


@dataclass(frozen=True)
class AnalyticSolution:
    """An exact solution given by value and derivative oracles.

    ``derivative_fn(x, y, i, j)`` returns d^i_x d^j_y u(x, y); ``max_order``
    caps the supported total derivative order (None means unbounded).
    """

    name: str
    derivative_fn: Callable[[float, float, int, int], complex]
    max_order: Optional[int] = None

    def value(self, x: float, y: float) -> complex:
        return self.derivative(x, y, 0, 0)

    def derivative(self, x: float, y: float, i: int, j: int) -> complex:
        if i < 0 or j < 0:
            raise ConfigurationError("derivative orders must be nonnegative")
        if self.max_order is not None and i + j > self.max_order:
            raise ConfigurationError(
                f"solution {self.name!r} supports derivatives up to {self.max_order}"
            )
        return complex(self.derivative_fn(x, y, i, j))

    def gradient(self, x: float, y: float) -> np.ndarray:
        return np.array([self.derivative(x, y, 1, 0), self.derivative(x, y, 0, 1)])

    def values(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.array([self.value(x, y) for x, y in pts])

    def gradients(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.array([self.gradient(x, y) for x, y in pts])


def airy_plane_solution() -> AnalyticSolution:
    """u(x, y) = Ai(x) e^{iy}, the exact solution for beta = x - 1.

    d^i_x d^j_y u = Ai^(i)(x) (i)^j e^{iy} with (i)^j powers of the imaginary
    unit; the x-derivatives come from the Airy ODE recurrence.
    """

    def deriv(x: float, y: float, i: int, j: int) -> complex:
        ai_k = airy_derivatives(x, i)[i]
        return ai_k * (1j**j) * complex(math.cos(y), math.sin(y))

    return AnalyticSolution(
        name="airy_plane", derivative_fn=deriv, max_order=MAX_AIRY_DERIVATIVE
    )


def field_affine() -> CoefficientField:
    """beta(x, y) = x - 1: vanishes on the line x = 1."""

    def deriv(x, y, i, j):
        if (i, j) == (0, 0):
            return x - 1.0
        if (i, j) == (1, 0):
            return 1.0
        return 0.0

    return CoefficientField(name="affine", derivative_fn=deriv)


def field_constant(c: complex) -> CoefficientField:
    """Constant coefficient; only the order-(0,0) derivative is nonzero."""

    def deriv(x, y, i, j):
        return c if (i, j) == (0, 0) else 0.0

    return CoefficientField(name=f"constant({c})", derivative_fn=deriv)


def field_cutoff_profile(kappa: float) -> CoefficientField:
    """Piecewise-linear profile: -kappa^2 for x < 2, -kappa^2 (x-4)/2 beyond.

    The coefficient crosses zero at x = 4 (the cut-off).  Smoothness breaks
    on the line x = 2; evaluation there uses the right-hand piece, and the
    derivative oracle is valid per piece only, so anchors must sit strictly
    inside one piece and meshes must align a cell boundary with x = 2.
    """
    k2 = kappa * kappa

    def deriv(x, y, i, j):
        if x < 2.0:
            return -k2 if (i, j) == (0, 0) else 0.0
        if (i, j) == (0, 0):
            return -k2 * (x - 4.0) / 2.0
        if (i, j) == (1, 0):
            return -k2 / 2.0
        return 0.0

    return CoefficientField(
        name=f"cutoff(kappa={kappa})", derivative_fn=deriv, breakline_x=2.0
    )


def field_from_poly(
    poly: TruncatedPoly2, center: tuple[float, float] = (0.0, 0.0)
) -> CoefficientField:
    """Coefficient field beta(x, y) = poly(x - cx, y - cy) with exact oracle."""
    partials: dict[tuple[int, int], TruncatedPoly2] = {(0, 0): poly}

    def get_partial(i, j):
        if (i, j) not in partials:
            if i > 0:
                partials[(i, j)] = get_partial(i - 1, j).partial("x")
            else:
                partials[(i, j)] = get_partial(0, j - 1).partial("y")
        return partials[(i, j)]

    def deriv(x, y, i, j):
        if i + j > poly.degree_cap:
            return 0.0
        return get_partial(i, j).evaluate(x - center[0], y - center[1])

    return CoefficientField(name="polynomial", derivative_fn=deriv)
