"""Generalized plane waves for -Delta u + beta u = 0 with smooth beta.

A generalized plane wave (GPW) is a shape function ``phi = exp(P)`` whose
phase ``P`` is a complex bivariate polynomial in local coordinates around an
anchor G.  The linear part of P is ``N (cos(theta), sin(theta))``, mimicking a
classical plane wave with (possibly complex) local wavenumber ``N / i``; the
second-and-higher coefficients are chosen so that the Taylor expansion of
``beta - (Delta e^P)/e^P`` at G vanishes up to a requested order q, making
``(-Delta + beta) phi = O(|M - G|^q) * phi`` near the anchor.

The module also provides exact Taylor tables of phi at the anchor, computed
two independent ways: a linear-cost series recurrence (the workhorse) and an
explicit multivariate chain rule over integer-pair partitions (the oracle).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConfigurationError,
    OrderTooLarge,
    UnsupportedDerivativeOrder,
    ZeroLocalWavenumber,
    ZeroN,
)
from .poly2 import TruncatedPoly2, exp_laplacian_ratio, flat_index, multi_indices, tri_size

__all__ = [
    "Normalization",
    "CoefficientField",
    "TaylorTable",
    "Gpw",
    "design_gpw",
    "basis_set",
    "plane_wave_basis",
    "residual",
    "design_defect",
    "taylor_table",
    "taylor_table_via_partitions",
    "gpw_to_record",
    "gpw_from_record",
]

# Below this magnitude beta(G) is treated as an exact zero when resolving the
# beta-normalization; merely small values are allowed (their degradation is a
# study subject, not an error).
ZERO_WAVENUMBER_TOL = 1e-14


@dataclass(frozen=True)
class Normalization:
    """Choice of the nonzero constant N fixing the linear phase terms.

    ``beta_local`` takes N = sqrt(beta(G)) (principal branch, so beta < 0
    gives a purely imaginary N and the classical plane wave is recovered),
    ``constant_i`` takes N = i everywhere, and ``custom`` uses a caller-given
    nonzero complex value.
    """

    kind: str
    value: Optional[complex] = None

    @classmethod
    def beta_local(cls) -> "Normalization":
        return cls("beta")

    @classmethod
    def constant_i(cls) -> "Normalization":
        return cls("const")

    @classmethod
    def custom(cls, value: complex) -> "Normalization":
        if value == 0:
            raise ZeroN("custom normalization requires a nonzero value")
        return cls("custom", complex(value))

    @classmethod
    def parse(cls, text: str) -> "Normalization":
        if text == "beta":
            return cls.beta_local()
        if text == "const":
            return cls.constant_i()
        raise ConfigurationError(f"unknown normalization {text!r}")

    def resolve(self, beta_at_anchor: complex) -> complex:
        if self.kind == "beta":
            if abs(beta_at_anchor) < ZERO_WAVENUMBER_TOL:
                raise ZeroLocalWavenumber(
                    "beta-normalization undefined where the coefficient vanishes"
                )
            return cmath.sqrt(beta_at_anchor)
        if self.kind == "const":
            return 1j
        if self.kind == "custom":
            if self.value == 0:
                raise ZeroN("normalization constant must be nonzero")
            return complex(self.value)
        raise ConfigurationError(f"unknown normalization kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "custom":
            return f"custom({self.value})"
        return self.kind


@dataclass(frozen=True)
class CoefficientField:
    """The coefficient beta as an exact derivative oracle.

    ``derivative_fn(x, y, i, j)`` returns d^i_x d^j_y beta(x, y).  The oracle
    is deterministic and mixed partials are symmetric by construction.
    ``max_order`` caps the supported total derivative order (None means
    unbounded); ``breakline_x`` marks a vertical line across which the field
    is only piecewise smooth, which meshes must respect.
    """

    name: str
    derivative_fn: Callable[[float, float, int, int], complex]
    max_order: Optional[int] = None
    breakline_x: Optional[float] = None

    def derivative(self, x: float, y: float, i: int, j: int) -> complex:
        if i < 0 or j < 0:
            raise ConfigurationError("derivative orders must be nonnegative")
        if self.max_order is not None and i + j > self.max_order:
            raise UnsupportedDerivativeOrder(
                f"field {self.name!r} supports derivatives up to order {self.max_order}"
            )
        return complex(self.derivative_fn(x, y, i, j))

    def value(self, x: float, y: float) -> complex:
        return self.derivative(x, y, 0, 0)

    def taylor_at(self, anchor: tuple[float, float], cap: int) -> TruncatedPoly2:
        """Scaled Taylor coefficients d^i_x d^j_y beta / (i! j!) up to degree cap."""
        x, y = anchor
        data = np.zeros(tri_size(cap), dtype=complex)
        for (i, j) in multi_indices(cap):
            data[flat_index(i, j)] = self.derivative(x, y, i, j) / (
                math.factorial(i) * math.factorial(j)
            )
        return TruncatedPoly2(cap, data)


@dataclass(frozen=True)
class TaylorTable:
    """Scaled derivatives c[i,j] = d^i_x d^j_y f(anchor) / (i! j!), i+j <= order.

    Entries use the same flat triangular layout as :class:`TruncatedPoly2`,
    which is also the row numbering of the fit matrices in
    :mod:`gpwave.interp`.
    """

    anchor: tuple[float, float]
    order: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (tri_size(self.order),):
            raise ConfigurationError(
                f"need {tri_size(self.order)} entries for order {self.order}"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def entry(self, i: int, j: int) -> complex:
        if i < 0 or j < 0 or i + j > self.order:
            raise IndexError(f"entry ({i},{j}) outside order {self.order}")
        return complex(self.entries[flat_index(i, j)])

    def as_vector(self) -> np.ndarray:
        return self.entries


@dataclass(frozen=True)
class Gpw:
    """One shape function phi = exp(phase(. - anchor)).

    ``q`` is the cancellation order the phase was designed for; bases built
    directly from a prescribed phase (e.g. classical plane waves) carry
    ``q = 0``.
    """

    anchor: tuple[float, float]
    normalization: complex
    theta: float
    q: int
    phase: TruncatedPoly2

    @cached_property
    def phase_dx(self) -> TruncatedPoly2:
        return self.phase.partial("x")

    @cached_property
    def phase_dy(self) -> TruncatedPoly2:
        return self.phase.partial("y")

    @cached_property
    def exp_laplacian(self) -> TruncatedPoly2:
        """Cached (Delta e^P)/e^P of the phase."""
        return exp_laplacian_ratio(self.phase)

    def lam(self, i: int, j: int) -> complex:
        """Phase coefficient of (x - x_G)^i (y - y_G)^j, zero above the cap."""
        if i + j > self.phase.degree_cap:
            return 0j
        return self.phase.coeff(i, j)

    def value(self, point) -> complex:
        x, y = point
        return cmath.exp(self.phase.evaluate(x - self.anchor[0], y - self.anchor[1]))

    def gradient(self, point) -> np.ndarray:
        x, y = point
        dx, dy = x - self.anchor[0], y - self.anchor[1]
        phi = cmath.exp(self.phase.evaluate(dx, dy))
        return np.array(
            [self.phase_dx.evaluate(dx, dy) * phi, self.phase_dy.evaluate(dx, dy) * phi]
        )

    def values(self, points: np.ndarray) -> np.ndarray:
        """phi at an (m, 2) array of points."""
        pts = np.asarray(points, dtype=float)
        dx = pts[:, 0] - self.anchor[0]
        dy = pts[:, 1] - self.anchor[1]
        return np.exp(self.phase.evaluate_many(dx, dy))

    def gradients(self, points: np.ndarray) -> np.ndarray:
        """grad phi at an (m, 2) array of points, returned as (m, 2) complex."""
        pts = np.asarray(points, dtype=float)
        dx = pts[:, 0] - self.anchor[0]
        dy = pts[:, 1] - self.anchor[1]
        phi = np.exp(self.phase.evaluate_many(dx, dy))
        return np.stack(
            [self.phase_dx.evaluate_many(dx, dy) * phi,
             self.phase_dy.evaluate_many(dx, dy) * phi],
            axis=-1,
        )


def design_gpw(
    field: CoefficientField,
    anchor: tuple[float, float],
    q: int,
    theta: float,
    norm: Normalization,
) -> Gpw:
    """Construct the GPW of cancellation order q at the anchor.

    The phase has degree q + 1.  Its constant term is zero, the linear terms
    are ``N (cos theta, sin theta)``, all remaining terms with first exponent
    0 or 1 are zero, and each coefficient with first exponent >= 2 follows
    from cancelling one Taylor coefficient of ``beta - (Delta e^P)/e^P``:

        lam[i+2, j] = ( d^i_x d^j_y beta(G) / (i! j!)
                        - (j+2)(j+1) lam[i, j+2]
                        - sum_{k<=i, l<=j} (i-k+1)(k+1) lam[i-k+1, j-l] lam[k+1, l]
                        - sum_{k<=j, l<=i} (j-k+1)(k+1) lam[i-l, j-k+1] lam[l, k+1]
                      ) / ((i+2)(i+1))

    swept with i ascending so every referenced coefficient is already known.
    """
    if q < 1:
        raise ConfigurationError("approximation order q must be >= 1")
    if field.max_order is not None and q - 1 > field.max_order:
        raise UnsupportedDerivativeOrder(
            f"design order q={q} needs coefficient derivatives up to {q - 1}, "
            f"field {field.name!r} caps at {field.max_order}"
        )
    x_g, y_g = anchor
    n_value = norm.resolve(field.value(x_g, y_g))

    cap = q + 1
    lam = np.zeros((cap + 1, cap + 1), dtype=complex)
    lam[1, 0] = n_value * math.cos(theta)
    lam[0, 1] = n_value * math.sin(theta)

    for i in range(q):
        for j in range(q - i):
            rhs = field.derivative(x_g, y_g, i, j) / (
                math.factorial(i) * math.factorial(j)
            )
            rhs -= (j + 2) * (j + 1) * lam[i, j + 2]
            for k in range(i + 1):
                for l in range(j + 1):
                    rhs -= (i - k + 1) * (k + 1) * lam[i - k + 1, j - l] * lam[k + 1, l]
            for k in range(j + 1):
                for l in range(i + 1):
                    rhs -= (j - k + 1) * (k + 1) * lam[i - l, j - k + 1] * lam[l, k + 1]
            lam[i + 2, j] = rhs / ((i + 2) * (i + 1))

    data = np.zeros(tri_size(cap), dtype=complex)
    for (i, j) in multi_indices(cap):
        data[flat_index(i, j)] = lam[i, j]
    phase = TruncatedPoly2(cap, data)
    return Gpw(anchor=(x_g, y_g), normalization=n_value, theta=theta, q=q, phase=phase)


def basis_set(
    field: CoefficientField,
    anchor: tuple[float, float],
    q: int,
    p: int,
    norm: Normalization,
) -> list[Gpw]:
    """p GPWs sharing (anchor, N, q) with equi-spaced directions 2*pi*l/p."""
    if p < 3:
        raise ConfigurationError("a basis set needs p >= 3 directions")
    return [
        design_gpw(field, anchor, q, 2.0 * math.pi * l / p, norm) for l in range(p)
    ]


def plane_wave_basis(anchor: tuple[float, float], n_value: complex, p: int) -> list[Gpw]:
    """p classical plane waves exp(N((x-x_G) cos + (y-y_G) sin)), q = 0."""
    if n_value == 0:
        raise ZeroN("plane waves need a nonzero wavenumber factor")
    if p < 3:
        raise ConfigurationError("a basis set needs p >= 3 directions")
    out = []
    for l in range(p):
        theta = 2.0 * math.pi * l / p
        phase = TruncatedPoly2.from_terms(
            1,
            {(1, 0): n_value * math.cos(theta), (0, 1): n_value * math.sin(theta)},
        )
        out.append(
            Gpw(anchor=tuple(anchor), normalization=complex(n_value), theta=theta,
                q=0, phase=phase)
        )
    return out


def residual(g: Gpw, field: CoefficientField, point) -> complex:
    """beta(M) - (Delta e^P)/e^P (M - G), i.e. ((-Delta + beta) phi)(M) / phi(M)."""
    x, y = point
    dx, dy = x - g.anchor[0], y - g.anchor[1]
    return field.value(x, y) - g.exp_laplacian.evaluate(dx, dy)


def design_defect(g: Gpw, field: CoefficientField) -> float:
    """Largest Taylor coefficient of beta - (Delta e^P)/e^P below degree q.

    The design makes these vanish exactly in real arithmetic; the returned
    maximum magnitude measures the floating-point defect.
    """
    if g.q < 1:
        raise ConfigurationError("design_defect needs a designed GPW (q >= 1)")
    beta_taylor = field.taylor_at(g.anchor, g.q - 1)
    diff = beta_taylor - g.exp_laplacian
    low = [abs(diff.coeff(i, j)) for (i, j) in multi_indices(g.q - 1)]
    return max(low)


def taylor_table(g: Gpw, order: int) -> TaylorTable:
    """Taylor table of phi at the anchor via the series recurrence.

    Writing t[a,b] for the scaled coefficients of phi and using that the
    coefficients of d_x phi equal those of (d_x P) * phi (and likewise in y),
    each new total degree follows linearly from the previous ones, starting
    from t[0,0] = exp(P(0,0)) = 1.
    """
    if order < 0:
        raise ConfigurationError("order must be nonnegative")
    t = np.zeros((order + 1, order + 1), dtype=complex)
    t[0, 0] = 1.0
    for m in range(order):
        for a in range(m + 2):
            b = m + 1 - a
            if a >= 1:
                acc = 0j
                for c in range(a):
                    for d in range(b + 1):
                        coef = (c + 1) * g.lam(c + 1, d)
                        if coef != 0:
                            acc += coef * t[a - 1 - c, b - d]
                t[a, b] = acc / a
            else:
                acc = 0j
                for d in range(b):
                    coef = (d + 1) * g.lam(0, d + 1)
                    if coef != 0:
                        acc += coef * t[0, b - 1 - d]
                t[0, b] = acc / b
    data = np.zeros(tri_size(order), dtype=complex)
    for (i, j) in multi_indices(order):
        data[flat_index(i, j)] = t[i, j]
    return TaylorTable(anchor=g.anchor, order=order, entries=data)


MAX_PARTITION_ORDER = 8


@lru_cache(maxsize=None)
def _pair_partitions(i: int, j: int) -> tuple[tuple[tuple[int, int, int], ...], ...]:
    """All multisets {(a, b) with multiplicity k} with sum k*(a,b) = (i, j).

    Each partition is a tuple of (a, b, k) triples; candidate pairs are the
    nonzero pairs componentwise below (i, j).
    """
    candidates = [
        (a, b) for a in range(i + 1) for b in range(j + 1) if (a, b) != (0, 0)
    ]
    out: list[tuple[tuple[int, int, int], ...]] = []

    def rec(pos: int, ri: int, rj: int, acc: list[tuple[int, int, int]]):
        if ri == 0 and rj == 0:
            out.append(tuple(acc))
            return
        if pos == len(candidates):
            return
        a, b = candidates[pos]
        rec(pos + 1, ri, rj, acc)
        k = 1
        while k * a <= ri and k * b <= rj:
            acc.append((a, b, k))
            rec(pos + 1, ri - k * a, rj - k * b, acc)
            acc.pop()
            k += 1

    rec(0, i, j, [])
    return tuple(out)


def taylor_table_via_partitions(g: Gpw, order: int) -> TaylorTable:
    """Taylor table of phi by the explicit chain rule for exp(P).

    Since every derivative of exp evaluated at the anchor is exp(P(0,0)) = 1,
    the scaled derivative c[i,j] is the sum over all partitions of (i, j)
    of prod_l lam[a_l, b_l]^{k_l} / k_l!.  Exponential cost; serves as an
    independent oracle for :func:`taylor_table`.
    """
    if order > MAX_PARTITION_ORDER:
        raise OrderTooLarge(
            f"partition enumeration supported up to order {MAX_PARTITION_ORDER}"
        )
    if order < 0:
        raise ConfigurationError("order must be nonnegative")
    data = np.zeros(tri_size(order), dtype=complex)
    data[0] = 1.0
    for (i, j) in multi_indices(order):
        if i + j == 0:
            continue
        total = 0j
        for part in _pair_partitions(i, j):
            term = 1.0 + 0j
            for (a, b, k) in part:
                lam = g.lam(a, b)
                if lam == 0:
                    term = 0j
                    break
                term *= lam**k / math.factorial(k)
            total += term
        data[flat_index(i, j)] = total
    return TaylorTable(anchor=g.anchor, order=order, entries=data)


def gpw_to_record(g: Gpw) -> str:
    """Serialize to a JSON text record; floats round-trip exactly."""
    coeffs = [
        [i, j, g.phase.coeff(i, j).real, g.phase.coeff(i, j).imag]
        for (i, j) in multi_indices(g.phase.degree_cap)
        if g.phase.coeff(i, j) != 0
    ]
    record = {
        "anchor": [g.anchor[0], g.anchor[1]],
        "normalization": [g.normalization.real, g.normalization.imag],
        "theta": g.theta,
        "q": g.q,
        "degree": g.phase.degree_cap,
        "coeffs": coeffs,
    }
    return json.dumps(record)


def gpw_from_record(text: str) -> Gpw:
    record = json.loads(text)
    terms = {
        (int(i), int(j)): complex(re, im) for i, j, re, im in record["coeffs"]
    }
    phase = TruncatedPoly2.from_terms(int(record["degree"]), terms)
    return Gpw(
        anchor=(record["anchor"][0], record["anchor"][1]),
        normalization=complex(record["normalization"][0], record["normalization"][1]),
        theta=record["theta"],
        q=int(record["q"]),
        phase=phase,
    )
