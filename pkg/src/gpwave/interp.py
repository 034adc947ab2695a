"""Local approximation of wave-equation solutions by GPW bases.

The order-n Taylor coefficients of the basis functions at a common anchor are
collected column-wise into a rectangular matrix (rows in the same triangular
numbering as :class:`gpwave.poly2.TruncatedPoly2`).  Fitting a target solution
means matching its own Taylor coefficients in the least-squares sense; with
p = 2n+1 basis functions of design order q >= n+1 the system is consistent
and the resulting approximant converges at order n+1 on shrinking disks.
This module provides the matrix builders, rank and triangular-structure
diagnostics, the fit itself, and the disk-convergence studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    MixedAnchors,
    RankDeficient,
    ZeroN,
)
from .gpw import (
    CoefficientField,
    Gpw,
    Normalization,
    TaylorTable,
    basis_set,
    plane_wave_basis,
    taylor_table,
)
from .poly2 import flat_index, multi_indices, tri_size
from .special import AnalyticSolution, airy_plane_solution, field_affine

__all__ = [
    "RANK_TOL",
    "SATURATION_FLOOR",
    "plane_wave_taylor_matrix",
    "basis_taylor_matrix",
    "rank_diagnostics",
    "triangular_reconstruction_residual",
    "solution_taylor",
    "pde_recurrence_defect",
    "FitResult",
    "fit_local",
    "disk_samples",
    "disk_error",
    "StudyRow",
    "convergence_study",
    "HdSweepResult",
    "hd_sweep",
    "NSweepRow",
    "n_sweep",
    "study_rows_csv",
    "hd_sweep_csv",
    "n_sweep_csv",
]

RANK_TOL = 1e-10
# Disk errors below this fraction of the target's sup on the disk are treated
# as machine-precision saturated and excluded from order checks.
SATURATION_FLOOR = 1e-13

STUDY_ANCHORS = {
    "propagative": (-3.0, 1.0),
    "nonpropagative": (2.0, 1.0),
    "on_cutoff": (1.0, 1.0),
}


def plane_wave_taylor_matrix(
    n_value: complex,
    order: int,
    thetas: Optional[Sequence[float]] = None,
    count: Optional[int] = None,
) -> np.ndarray:
    """Column-wise Taylor tables of plane waves exp(N(dx cos + dy sin)).

    Entry at row (k1, k2), column l is N^{k1+k2} cos^{k1} sin^{k2} / (k1! k2!).
    Defaults to 2*order + 1 equi-spaced directions.
    """
    if n_value == 0:
        raise ZeroN("plane-wave matrix needs a nonzero N")
    if order < 1:
        raise ConfigurationError("order must be >= 1")
    if thetas is None:
        if count is None:
            count = 2 * order + 1
        thetas = [2.0 * math.pi * l / count for l in range(count)]
    thetas = np.asarray(thetas, dtype=float)
    rows = tri_size(order)
    out = np.zeros((rows, thetas.size), dtype=complex)
    cos_t = np.cos(thetas)
    sin_t = np.sin(thetas)
    for (k1, k2) in multi_indices(order):
        scale = complex(n_value) ** (k1 + k2) / (math.factorial(k1) * math.factorial(k2))
        out[flat_index(k1, k2)] = scale * cos_t**k1 * sin_t**k2
    return out


def basis_taylor_matrix(basis: Sequence[Gpw], order: int) -> np.ndarray:
    """Column-wise order-n Taylor tables of the basis at its shared anchor."""
    if not basis:
        raise ConfigurationError("empty basis")
    anchor = basis[0].anchor
    for g in basis:
        if g.anchor != anchor:
            raise MixedAnchors("all basis functions must share one anchor")
        if 0 < g.q < order:
            raise ConfigurationError(
                f"basis designed to order q={g.q} cannot provide an order-{order} table"
            )
    cols = [taylor_table(g, order).as_vector() for g in basis]
    return np.stack(cols, axis=1)


def rank_diagnostics(matrix: np.ndarray) -> tuple[int, np.ndarray]:
    """Numerical rank (threshold sigma_max * 1e-10) and singular spectrum."""
    sigma = np.linalg.svd(np.asarray(matrix, dtype=complex), compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0, sigma
    rank = int(np.sum(sigma > RANK_TOL * sigma[0]))
    return rank, sigma


def triangular_reconstruction_residual(basis: Sequence[Gpw], order: int) -> float:
    """Defect of expressing each basis-matrix row via earlier plane-wave rows.

    Row r of the basis Taylor matrix should equal row r of the matched
    plane-wave matrix plus a combination of its rows < r (a unit-diagonal
    lower-triangular relation).  Returns the worst relative reconstruction
    residual over all rows.
    """
    m_basis = basis_taylor_matrix(basis, order)
    thetas = [g.theta for g in basis]
    m_pw = plane_wave_taylor_matrix(basis[0].normalization, order, thetas=thetas)
    worst = 0.0
    for r in range(m_basis.shape[0]):
        diff = m_basis[r] - m_pw[r]
        if r == 0:
            resid = float(np.linalg.norm(diff))
        else:
            coeffs = np.linalg.lstsq(m_pw[:r].T, diff, rcond=None)[0]
            resid = float(np.linalg.norm(m_pw[:r].T @ coeffs - diff))
        scale = max(float(np.linalg.norm(m_basis[r])), 1e-300)
        worst = max(worst, resid / scale)
    return worst


def solution_taylor(u: AnalyticSolution, anchor: tuple[float, float], order: int) -> TaylorTable:
    """Order-n Taylor table of the target solution at the anchor."""
    x, y = anchor
    data = np.zeros(tri_size(order), dtype=complex)
    for (i, j) in multi_indices(order):
        data[flat_index(i, j)] = u.derivative(x, y, i, j) / (
            math.factorial(i) * math.factorial(j)
        )
    return TaylorTable(anchor=(x, y), order=order, entries=data)


def pde_recurrence_defect(
    entries: np.ndarray,
    field: CoefficientField,
    anchor: tuple[float, float],
    order: int,
) -> float:
    """Defect of the wave-equation Taylor recurrence on a coefficient vector.

    For Taylor coefficients C of a function with (-Delta + beta) f = O(r^{n-1})
    the relation

        (k1+1)(k1+2) C[k1+2,k2] + (k2+1)(k2+2) C[k1,k2+2]
            = sum_{i<=k1, j<=k2} (d^i_x d^j_y beta / i! j!) C[k1-i, k2-j]

    holds for k1 + k2 <= n - 2.  Returns the worst absolute defect divided by
    max(1, largest side magnitude).
    """
    entries = np.asarray(entries, dtype=complex)
    if entries.shape != (tri_size(order),):
        raise ConfigurationError("entries do not match the stated order")
    if order < 2:
        return 0.0
    x, y = anchor
    worst = 0.0
    scale = 1.0
    for (k1, k2) in multi_indices(order - 2):
        lhs = (k1 + 1) * (k1 + 2) * entries[flat_index(k1 + 2, k2)]
        lhs += (k2 + 1) * (k2 + 2) * entries[flat_index(k1, k2 + 2)]
        rhs = 0j
        for i in range(k1 + 1):
            for j in range(k2 + 1):
                beta_ij = field.derivative(x, y, i, j) / (
                    math.factorial(i) * math.factorial(j)
                )
                if beta_ij != 0:
                    rhs += beta_ij * entries[flat_index(k1 - i, k2 - j)]
        worst = max(worst, abs(lhs - rhs))
        scale = max(scale, abs(lhs), abs(rhs))
    return worst / scale


@dataclass(frozen=True)
class FitResult:
    """Coefficients of the local approximant u_a = sum x_l phi_l."""

    basis: tuple[Gpw, ...]
    order: int
    coefficients: np.ndarray
    residual: float

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(pts.shape[0], dtype=complex)
        for x_l, g in zip(self.coefficients, self.basis):
            out += x_l * g.values(pts)
        return out

    def gradient(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((pts.shape[0], 2), dtype=complex)
        for x_l, g in zip(self.coefficients, self.basis):
            out += x_l * g.gradients(pts)
        return out


def min_norm_solve(matrix: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution and its residual norm."""
    x = np.linalg.lstsq(matrix, rhs, rcond=None)[0]
    resid = float(np.linalg.norm(matrix @ x - rhs))
    return x, resid


def fit_local(
    basis: Sequence[Gpw],
    target: TaylorTable,
    enforce_order: bool = True,
    allow_rank_deficient: bool = False,
) -> FitResult:
    """Fit the target Taylor table on the span of the basis.

    Requires p = 2n+1 basis functions; designed bases must satisfy q >= n+1
    (skipped for directly-built bases or with ``enforce_order=False``).
    Raises :class:`RankDeficient` when the numerical rank drops below 2n+1,
    which signals a too-small N or collided directions.
    """
    n = target.order
    if len(basis) != 2 * n + 1:
        raise ConfigurationError(
            f"fit at order {n} needs p = {2 * n + 1} basis functions, got {len(basis)}"
        )
    if enforce_order:
        for g in basis:
            if 0 < g.q < n + 1:
                raise ConfigurationError(
                    f"fit at order {n} needs design order q >= {n + 1}, got q={g.q}"
                )
    matrix = basis_taylor_matrix(basis, n)
    rank, _ = rank_diagnostics(matrix)
    if rank < 2 * n + 1 and not allow_rank_deficient:
        raise RankDeficient(
            f"fit matrix has numerical rank {rank} < {2 * n + 1}"
        )
    x, resid = min_norm_solve(matrix, target.as_vector())
    return FitResult(basis=tuple(basis), order=n, coefficients=x, residual=resid)


N_CIRCLES = 8
N_ANGLES = 64


def disk_samples(center: tuple[float, float], h: float) -> np.ndarray:
    """Sampling set on the closed disk: 8 circles x 64 angles, plus the center."""
    angles = 2.0 * math.pi * np.arange(N_ANGLES) / N_ANGLES
    radii = h * np.arange(1, N_CIRCLES + 1) / N_CIRCLES
    pts = [np.array(center)[None, :]]
    for r in radii:
        pts.append(
            np.stack(
                [center[0] + r * np.cos(angles), center[1] + r * np.sin(angles)],
                axis=1,
            )
        )
    return np.concatenate(pts, axis=0)


def _disk_error_full(
    u: AnalyticSolution, fit: FitResult, center: tuple[float, float], h: float
) -> tuple[float, float, float]:
    """(max value error, max gradient error, sup |u|) over the disk samples."""
    pts = disk_samples(center, h)
    u_vals = u.values(pts)
    u_grads = u.gradients(pts)
    a_vals = fit.evaluate(pts)
    a_grads = fit.gradient(pts)
    val_err = float(np.max(np.abs(u_vals - a_vals)))
    grad_err = float(np.max(np.linalg.norm(u_grads - a_grads, axis=1)))
    return val_err, grad_err, float(np.max(np.abs(u_vals)))


def disk_error(
    u: AnalyticSolution, fit: FitResult, center: tuple[float, float], h: float
) -> tuple[float, float]:
    """Max |u - u_a| and max ||grad u - grad u_a|| over the radius-h disk."""
    if h <= 0:
        raise ConfigurationError("disk radius must be positive")
    val_err, grad_err, _ = _disk_error_full(u, fit, center, h)
    return val_err, grad_err


@dataclass(frozen=True)
class StudyRow:
    """One disk radius of a convergence study."""

    h: float
    err_val: float
    err_grad: float
    order_val: Optional[float]
    order_grad: Optional[float]
    saturated: bool


def _rows_from_errors(
    radii: Sequence[float], errs: list[tuple[float, float, float]]
) -> list[StudyRow]:
    rows: list[StudyRow] = []
    for idx, (h, (e_val, e_grad, u_sup)) in enumerate(zip(radii, errs)):
        if idx == 0:
            order_val = order_grad = None
        else:
            h_prev = radii[idx - 1]
            e_val_prev, e_grad_prev, _ = errs[idx - 1]
            denom = math.log(h_prev / h)
            order_val = math.log(e_val_prev / e_val) / denom if e_val > 0 else None
            order_grad = math.log(e_grad_prev / e_grad) / denom if e_grad > 0 else None
        rows.append(
            StudyRow(
                h=h,
                err_val=e_val,
                err_grad=e_grad,
                order_val=order_val,
                order_grad=order_grad,
                saturated=e_val < SATURATION_FLOOR * u_sup,
            )
        )
    return rows


def default_radii() -> list[float]:
    return [2.0**-k for k in range(1, 7)]


def convergence_study(
    scenario: str,
    n: int,
    norm: Normalization,
    radii: Optional[Sequence[float]] = None,
    basis_kind: str = "gpw",
) -> list[StudyRow]:
    """Disk-convergence study for the affine-coefficient Airy target.

    Scenarios fix the anchor: propagative (-3, 1), nonpropagative (2, 1),
    on_cutoff (1, 1), or toward_cutoff with the h-dependent anchor (1-h, 1).
    Uses q = n+1 and p = 2n+1.  ``basis_kind="pw"`` replaces the designed
    basis by classical plane waves with N = sqrt(beta(anchor)) as a control.
    """
    scenario = scenario.replace("-", "_")
    if radii is None:
        radii = default_radii()
    radii = [float(h) for h in radii]
    if any(h <= 0 for h in radii) or any(
        radii[i] <= radii[i + 1] for i in range(len(radii) - 1)
    ):
        raise ConfigurationError("radii must be positive and strictly decreasing")
    if basis_kind not in ("gpw", "pw"):
        raise ConfigurationError(f"unknown basis kind {basis_kind!r}")
    field = field_affine()
    u = airy_plane_solution()
    q = n + 1
    p = 2 * n + 1

    def make_fit(anchor):
        if basis_kind == "gpw":
            basis = basis_set(field, anchor, q, p, norm)
            enforce = True
        else:
            n_value = Normalization.beta_local().resolve(field.value(*anchor))
            basis = plane_wave_basis(anchor, n_value, p)
            enforce = False
        target = solution_taylor(u, anchor, n)
        return fit_local(basis, target, enforce_order=enforce)

    errs: list[tuple[float, float, float]] = []
    if scenario in STUDY_ANCHORS:
        anchor = STUDY_ANCHORS[scenario]
        fit = make_fit(anchor)
        for h in radii:
            errs.append(_disk_error_full(u, fit, anchor, h))
    elif scenario == "toward_cutoff":
        for h in radii:
            anchor = (1.0 - h, 1.0)
            fit = make_fit(anchor)
            errs.append(_disk_error_full(u, fit, anchor, h))
    else:
        raise ConfigurationError(
            f"unknown scenario {scenario!r} (hd_sweep has its own entry point)"
        )
    return _rows_from_errors(radii, errs)


@dataclass(frozen=True)
class HdSweepResult:
    """Disk errors e(h, d) for anchors (1 - d, 1) at disk radii h."""

    h_values: tuple[float, ...]
    d_values: tuple[float, ...]
    errors: np.ndarray  # shape (len(h_values), len(d_values))


def hd_sweep(
    n: int = 5,
    h_values: Optional[Sequence[float]] = None,
    d_values: Optional[Sequence[float]] = None,
    norm: Optional[Normalization] = None,
) -> HdSweepResult:
    """Error on disks of radius h centered at distance d from the cut-off."""
    if h_values is None:
        h_values = [2.0**-k for k in range(1, 11)]
    if d_values is None:
        d_values = [2.0**-k for k in range(1, 11)]
    if norm is None:
        norm = Normalization.beta_local()
    field = field_affine()
    u = airy_plane_solution()
    q, p = n + 1, 2 * n + 1
    errors = np.zeros((len(h_values), len(d_values)))
    for jd, d in enumerate(d_values):
        anchor = (1.0 - d, 1.0)
        basis = basis_set(field, anchor, q, p, norm)
        target = solution_taylor(u, anchor, n)
        fit = fit_local(basis, target)
        for ih, h in enumerate(h_values):
            errors[ih, jd] = disk_error(u, fit, anchor, h)[0]
    return HdSweepResult(
        h_values=tuple(float(h) for h in h_values),
        d_values=tuple(float(d) for d in d_values),
        errors=errors,
    )


@dataclass(frozen=True)
class NSweepRow:
    n_value: complex
    max_coeff: float
    residual: float


def n_sweep(
    anchor: tuple[float, float],
    n: int,
    n_values: Sequence[complex],
) -> list[NSweepRow]:
    """Fit-coefficient magnitudes for shrinking |N| at a fixed anchor.

    Rebuilds the basis with each custom N and fits the Airy target; the
    growth of max |x_l| as N shrinks measures the blow-up of the
    approximation constant.  Rank deficiency is tolerated here (it is the
    phenomenon under study) and shows up as a growing fit residual.
    """
    field = field_affine()
    u = airy_plane_solution()
    target = solution_taylor(u, anchor, n)
    rows = []
    for n_value in n_values:
        basis = basis_set(
            field, anchor, n + 1, 2 * n + 1, Normalization.custom(n_value)
        )
        fit = fit_local(basis, target, allow_rank_deficient=True)
        rows.append(
            NSweepRow(
                n_value=complex(n_value),
                max_coeff=float(np.max(np.abs(fit.coefficients))),
                residual=fit.residual,
            )
        )
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def study_rows_csv(scenario: str, n: int, norm_label: str, rows: Sequence[StudyRow]) -> str:
    lines = ["scenario,n,norm,h,err_val,err_grad,order_val,order_grad,saturated"]
    for row in rows:
        lines.append(
            ",".join(
                [
                    scenario,
                    str(n),
                    norm_label,
                    _fmt(row.h),
                    _fmt(row.err_val),
                    _fmt(row.err_grad),
                    _fmt(row.order_val),
                    _fmt(row.order_grad),
                    "1" if row.saturated else "0",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def hd_sweep_csv(result: HdSweepResult) -> str:
    header = "h_over_d," + ",".join(_fmt(d) for d in result.d_values)
    lines = [header]
    for ih, h in enumerate(result.h_values):
        lines.append(
            _fmt(h) + "," + ",".join(_fmt(e) for e in result.errors[ih])
        )
    return "\n".join(lines) + "\n"


def n_sweep_csv(rows: Sequence[NSweepRow]) -> str:
    lines = ["n_re,n_im,abs_n,max_coeff,fit_residual"]
    for row in rows:
        lines.append(
            ",".join(
                [
                    _fmt(row.n_value.real),
                    _fmt(row.n_value.imag),
                    _fmt(abs(row.n_value)),
                    _fmt(row.max_coeff),
                    _fmt(row.residual),
                ]
            )
        )
    return "\n".join(lines) + "\n"
