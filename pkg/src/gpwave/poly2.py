"""Truncated bivariate complex polynomials.

A ``TruncatedPoly2`` stores the coefficients c[i, j] of
``p(x, y) = sum c[i,j] x^i y^j`` for all ``i + j <= degree_cap`` in a dense
triangular layout: total degree ascending, and within one degree the first
index descending.  The flat slot of (i, j) is ``(i+j)(i+j+1)/2 + j``, which is
also the row numbering used by the Taylor-coefficient matrices in
:mod:`gpwave.interp`.

Coefficient arrays are frozen after construction, so values can be shared
freely between threads.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "TruncatedPoly2",
    "tri_size",
    "flat_index",
    "multi_indices",
    "exp_laplacian_ratio",
]


def tri_size(cap: int) -> int:
    """Number of coefficient slots for total degree <= cap."""
    return (cap + 1) * (cap + 2) // 2


def flat_index(i: int, j: int) -> int:
    """Flat slot of the monomial x^i y^j."""
    m = i + j
    return m * (m + 1) // 2 + j


def multi_indices(cap: int) -> list[tuple[int, int]]:
    """All (i, j) with i + j <= cap, in flat-slot order."""
    return [(m - j, j) for m in range(cap + 1) for j in range(m + 1)]


class TruncatedPoly2:
    """Bivariate complex polynomial truncated at a fixed total degree."""

    __slots__ = ("degree_cap", "coeffs")

    def __init__(self, degree_cap: int, coeffs=None):
        if degree_cap < 0:
            raise ValueError("degree_cap must be nonnegative")
        n = tri_size(degree_cap)
        if coeffs is None:
            data = np.zeros(n, dtype=complex)
        else:
            data = np.asarray(coeffs, dtype=complex).copy()
            if data.shape != (n,):
                raise ValueError(f"expected {n} coefficients for cap {degree_cap}")
        data.setflags(write=False)
        object.__setattr__(self, "degree_cap", degree_cap)
        object.__setattr__(self, "coeffs", data)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedPoly2 is immutable")

    @classmethod
    def zero(cls, cap: int) -> "TruncatedPoly2":
        return cls(cap)

    @classmethod
    def from_terms(cls, cap: int, terms: dict[tuple[int, int], complex]) -> "TruncatedPoly2":
        """Build from a sparse {(i, j): coefficient} mapping."""
        data = np.zeros(tri_size(cap), dtype=complex)
        for (i, j), c in terms.items():
            if i < 0 or j < 0 or i + j > cap:
                raise ValueError(f"monomial ({i},{j}) exceeds cap {cap}")
            data[flat_index(i, j)] = c
        return cls(cap, data)

    def coeff(self, i: int, j: int) -> complex:
        """Coefficient of x^i y^j (structurally zero above the cap)."""
        if i < 0 or j < 0:
            raise IndexError("negative exponent")
        if i + j > self.degree_cap:
            raise IndexError(f"monomial ({i},{j}) exceeds cap {self.degree_cap}")
        return complex(self.coeffs[flat_index(i, j)])

    def padded(self, cap: int) -> "TruncatedPoly2":
        """Same polynomial with a larger (or equal) degree cap."""
        if cap < self.degree_cap:
            raise ValueError("padded() cannot shrink the cap")
        if cap == self.degree_cap:
            return self
        data = np.zeros(tri_size(cap), dtype=complex)
        data[: self.coeffs.size] = self.coeffs
        return TruncatedPoly2(cap, data)

    def __add__(self, other: "TruncatedPoly2") -> "TruncatedPoly2":
        cap = max(self.degree_cap, other.degree_cap)
        a = self.padded(cap)
        b = other.padded(cap)
        return TruncatedPoly2(cap, a.coeffs + b.coeffs)

    def __sub__(self, other: "TruncatedPoly2") -> "TruncatedPoly2":
        cap = max(self.degree_cap, other.degree_cap)
        a = self.padded(cap)
        b = other.padded(cap)
        return TruncatedPoly2(cap, a.coeffs - b.coeffs)

    def __neg__(self) -> "TruncatedPoly2":
        return TruncatedPoly2(self.degree_cap, -self.coeffs)

    def scaled(self, factor: complex) -> "TruncatedPoly2":
        return TruncatedPoly2(self.degree_cap, factor * self.coeffs)

    def mul_truncated(self, other: "TruncatedPoly2", cap: int) -> "TruncatedPoly2":
        """Product with all terms of total degree > cap discarded."""
        if cap < 0:
            raise ValueError("cap must be nonnegative")
        data = np.zeros(tri_size(cap), dtype=complex)
        for (i1, j1) in multi_indices(self.degree_cap):
            c1 = self.coeffs[flat_index(i1, j1)]
            if c1 == 0:
                continue
            for (i2, j2) in multi_indices(other.degree_cap):
                if i1 + j1 + i2 + j2 > cap:
                    continue
                c2 = other.coeffs[flat_index(i2, j2)]
                if c2 == 0:
                    continue
                data[flat_index(i1 + i2, j1 + j2)] += c1 * c2
        return TruncatedPoly2(cap, data)

    def partial(self, axis: str) -> "TruncatedPoly2":
        """Formal partial derivative along "x" or "y"; cap drops by one."""
        cap = max(self.degree_cap - 1, 0)
        data = np.zeros(tri_size(cap), dtype=complex)
        for (i, j) in multi_indices(self.degree_cap):
            c = self.coeffs[flat_index(i, j)]
            if c == 0:
                continue
            if axis == "x":
                if i >= 1:
                    data[flat_index(i - 1, j)] += i * c
            elif axis == "y":
                if j >= 1:
                    data[flat_index(i, j - 1)] += j * c
            else:
                raise ValueError("axis must be 'x' or 'y'")
        return TruncatedPoly2(cap, data)

    def evaluate(self, dx: float, dy: float) -> complex:
        """Value at (dx, dy), accumulated in ascending total-degree order."""
        return complex(self.evaluate_many(np.array([dx]), np.array([dy]))[0])

    def evaluate_many(self, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at arrays of points."""
        dx = np.asarray(dx, dtype=float)
        dy = np.asarray(dy, dtype=float)
        cap = self.degree_cap
        # power tables: xp[:, i] = dx**i
        xp = np.ones(dx.shape + (cap + 1,))
        yp = np.ones(dy.shape + (cap + 1,))
        for k in range(1, cap + 1):
            xp[..., k] = xp[..., k - 1] * dx
            yp[..., k] = yp[..., k - 1] * dy
        idx = multi_indices(cap)
        ii = np.array([i for i, _ in idx])
        jj = np.array([j for _, j in idx])
        return (xp[..., ii] * yp[..., jj]) @ self.coeffs

    def __call__(self, dx, dy):
        return self.evaluate(dx, dy)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedPoly2):
            return NotImplemented
        cap = max(self.degree_cap, other.degree_cap)
        return bool(
            np.array_equal(self.padded(cap).coeffs, other.padded(cap).coeffs)
        )

    def __hash__(self):
        return hash((self.degree_cap, self.coeffs.tobytes()))

    def __repr__(self):
        terms = [
            f"({c:.6g})*x^{i}*y^{j}"
            for (i, j), c in zip(multi_indices(self.degree_cap), self.coeffs)
            if c != 0
        ]
        body = " + ".join(terms) if terms else "0"
        return f"TruncatedPoly2(cap={self.degree_cap}, {body})"


def exp_laplacian_ratio(p: TruncatedPoly2) -> TruncatedPoly2:
    """The polynomial (Delta e^p) / e^p.

    Equals ``p_xx + (p_x)^2 + p_yy + (p_y)^2``, truncated at
    ``2 * (deg p - 1)``, the exact degree of the untruncated expression.
    """
    if p.degree_cap < 1:
        raise ValueError("need degree cap >= 1")
    cap = 2 * (p.degree_cap - 1)
    px = p.partial("x")
    py = p.partial("y")
    out = px.mul_truncated(px, cap) + py.mul_truncated(py, cap)
    out = out + px.partial("x").padded(cap) + py.partial("y").padded(cap)
    return out
