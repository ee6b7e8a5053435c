"""Desk-scale experiment operators exposed as black-box oracles.

Three problem families: a second-kind boundary integral operator on a
smooth planar contour (Nystrom/trapezoidal discretization of the Laplace
double layer), a Neumann-to-Dirichlet operator assembled as a product of
layer-potential matrices with a dense factorization of the second-kind
part, and the Schur complement of a five-point Poisson stencil onto a grid
separator.  Dense matrices and synthetic factorizations can also be
wrapped directly, which is how the test oracles are built.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import factorization
from .errors import DimensionError
from .oracle import MatVecOracle

_ASSEMBLY_CHUNK = 4 * 1024 * 1024  # entries per row block when assembling kernels


class Contour:
    """Smooth simple closed curve in polar form rho(theta) about the origin.

    Vectorized evaluators for points, tangents, outward normals, arclength
    density, and curvature; `quadrature(n)` places n equispaced-parameter
    nodes with trapezoidal weights (spectrally accurate for smooth closed
    curves).
    """

    def __init__(self, radius, dradius, ddradius):
        self._radius = radius
        self._dradius = dradius
        self._ddradius = ddradius

    def points(self, theta):
        rho = self._radius(theta)
        return np.stack((rho * np.cos(theta), rho * np.sin(theta)), axis=-1)

    def derivatives(self, theta):
        rho, drho = self._radius(theta), self._dradius(theta)
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        return np.stack(
            (drho * cos_t - rho * sin_t, drho * sin_t + rho * cos_t), axis=-1
        )

    def second_derivatives(self, theta):
        rho, drho, ddrho = self._radius(theta), self._dradius(theta), self._ddradius(theta)
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        return np.stack(
            (
                ddrho * cos_t - 2.0 * drho * sin_t - rho * cos_t,
                ddrho * sin_t + 2.0 * drho * cos_t - rho * sin_t,
            ),
            axis=-1,
        )

    def speed(self, theta):
        return np.linalg.norm(self.derivatives(theta), axis=-1)

    def normals(self, theta):
        """Outward unit normals (the parametrization is counterclockwise)."""
        d = self.derivatives(theta)
        return np.stack((d[..., 1], -d[..., 0]), axis=-1) / np.linalg.norm(
            d, axis=-1, keepdims=True
        )

    def curvature(self, theta):
        d = self.derivatives(theta)
        dd = self.second_derivatives(theta)
        return (d[..., 0] * dd[..., 1] - d[..., 1] * dd[..., 0]) / self.speed(theta) ** 3

    def quadrature(self, n: int):
        """Equispaced parameter nodes with trapezoidal arclength weights:
        returns (theta, points, normals, weights)."""
        theta = 2.0 * np.pi * np.arange(n) / n
        weights = (2.0 * np.pi / n) * self.speed(theta)
        return theta, self.points(theta), self.normals(theta), weights


_STAR_LOBES = 5
_STAR_AMPLITUDE = 0.15


def default_contour() -> Contour:
    """Five-lobed smooth star rho(theta) = 1 + 0.15 cos(5 theta); simple,
    closed, with bounded curvature.  The lobe amplitude is chosen so the
    benchmark rank budgets resolve the operator's off-diagonal blocks with
    comfortable margin (deeper lobes raise the coarse-level block ranks)."""
    return Contour(
        radius=lambda t: 1.0 + _STAR_AMPLITUDE * np.cos(_STAR_LOBES * t),
        dradius=lambda t: -_STAR_AMPLITUDE * _STAR_LOBES * np.sin(_STAR_LOBES * t),
        ddradius=lambda t: -_STAR_AMPLITUDE * _STAR_LOBES**2 * np.cos(_STAR_LOBES * t),
    )


def circle_contour(radius: float = 1.0) -> Contour:
    """Circle of the given radius, for closed-form kernel checks."""
    r = float(radius)
    return Contour(
        radius=lambda t: np.full_like(np.asarray(t, dtype=np.float64), r),
        dradius=lambda t: np.zeros_like(np.asarray(t, dtype=np.float64)),
        ddradius=lambda t: np.zeros_like(np.asarray(t, dtype=np.float64)),
    )


def _dl_kernel_pointwise(contour, theta_targets, theta_sources):
    """Double-layer kernel (x - y) . n(y) / (4 pi |x - y|^2) evaluated
    elementwise at paired parameter values (used for diagonal limits)."""
    x = contour.points(theta_targets)
    y = contour.points(theta_sources)
    ny = contour.normals(theta_sources)
    diff = x - y
    r2 = np.sum(diff * diff, axis=-1)
    return np.sum(diff * ny, axis=-1) / (4.0 * np.pi * r2)


def _adl_kernel_pointwise(contour, theta_targets, theta_sources):
    """Adjoint double-layer kernel n(x) . (x - y) / (2 pi |x - y|^2),
    elementwise at paired parameter values."""
    x = contour.points(theta_targets)
    y = contour.points(theta_sources)
    nx = contour.normals(theta_targets)
    diff = x - y
    r2 = np.sum(diff * diff, axis=-1)
    return np.sum(diff * nx, axis=-1) / (2.0 * np.pi * r2)


def _diagonal_limit(kernel_pointwise, contour, theta):
    """Smooth diagonal limit of a layer kernel along the contour, by
    symmetric evaluation at theta +/- eps and one Richardson step (the
    symmetric average has only even-order error terms)."""
    eps_coarse, eps_fine = 1.0e-3, 5.0e-4
    values = []
    for eps in (eps_coarse, eps_fine):
        plus = kernel_pointwise(contour, theta, theta + eps)
        minus = kernel_pointwise(contour, theta, theta - eps)
        values.append(0.5 * (plus + minus))
    return (4.0 * values[1] - values[0]) / 3.0


def _assemble_weighted_kernel(n, contour, numerator, diagonal):
    """Fill the n x n Nystrom matrix K[i, j] = w_j * kernel(i, j) in row
    blocks; `numerator(diff, r2, row_slice, source_normals)` returns the
    kernel values for a block of targets, `diagonal` the smooth limits at
    the nodes."""
    theta, pts, normals, weights = contour.quadrature(n)
    out = np.empty((n, n))
    rows_per_block = max(1, _ASSEMBLY_CHUNK // n)
    for start in range(0, n, rows_per_block):
        stop = min(start + rows_per_block, n)
        diff = pts[start:stop, None, :] - pts[None, :, :]
        r2 = np.sum(diff * diff, axis=-1)
        np.fill_diagonal(r2[:, start:stop], 1.0)  # keep self-pairs finite
        out[start:stop] = numerator(diff, r2, slice(start, stop), normals) * weights[None, :]
    np.fill_diagonal(out, weights * diagonal)
    return out, theta, weights


def double_layer_matrix(n: int, contour: Contour) -> np.ndarray:
    """Nystrom matrix of the second-kind operator 1/2 I + K, where K is the
    Laplace double layer (x - y) . n(y) / (4 pi |x - y|^2) on n equispaced
    nodes with trapezoidal weights and extrapolated diagonal limits."""
    if n < 16:
        raise DimensionError(f"need at least 16 quadrature nodes, got {n}")

    def numerator(diff, r2, rows, normals):
        return np.sum(diff * normals[None, :, :], axis=-1) / (4.0 * np.pi * r2)

    theta = 2.0 * np.pi * np.arange(n) / n
    diag = _diagonal_limit(_dl_kernel_pointwise, contour, theta)
    out, _, _ = _assemble_weighted_kernel(n, contour, numerator, diag)
    out[np.diag_indices(n)] += 0.5
    return out


def single_layer_matrix(n: int, contour: Contour) -> np.ndarray:
    """Nystrom matrix of the single layer -(1/2 pi) log |x - y| with a
    panel-averaged self-interaction rule on the diagonal:
    S[i, i] = w_i * (-1/2 pi) * log(w_i / (2 e))."""
    if n < 16:
        raise DimensionError(f"need at least 16 quadrature nodes, got {n}")

    def numerator(diff, r2, rows, normals):
        return -np.log(r2) / (4.0 * np.pi)  # -(1/2 pi) log r as -(1/4 pi) log r^2

    _, _, _, weights = contour.quadrature(n)
    diag = -np.log(weights / (2.0 * np.e)) / (2.0 * np.pi)
    out, _, _ = _assemble_weighted_kernel(n, contour, numerator, diag)
    return out


def adjoint_double_layer_matrix(n: int, contour: Contour) -> np.ndarray:
    """Nystrom matrix of the adjoint double layer
    n(x) . (x - y) / (2 pi |x - y|^2), diagonal by extrapolated limits."""
    if n < 16:
        raise DimensionError(f"need at least 16 quadrature nodes, got {n}")
    theta = 2.0 * np.pi * np.arange(n) / n
    target_normals = contour.normals(theta)

    def numerator(diff, r2, rows, normals):
        return np.sum(diff * target_normals[rows, None, :], axis=-1) / (2.0 * np.pi * r2)

    diag = _diagonal_limit(_adl_kernel_pointwise, contour, theta)
    out, _, _ = _assemble_weighted_kernel(n, contour, numerator, diag)
    return out


def dense_oracle(a: np.ndarray) -> MatVecOracle:
    """Wrap an explicit square matrix as a black-box oracle."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"dense oracle needs a square matrix, got shape {a.shape}")
    return MatVecOracle(a.shape[0], lambda x: a @ x, lambda x: a.T @ x)


def hbs_oracle(f: "factorization.HbsFactorization") -> MatVecOracle:
    """Wrap a telescoping factorization as a matrix-free oracle (used for
    large synthetic problems that must never be densified)."""
    return MatVecOracle(
        f.n,
        lambda x: factorization.apply_matrix(f, x),
        lambda x: factorization.apply_matrix(f, x, transpose=True),
    )


def bie_oracle(n: int, contour: Contour) -> MatVecOracle:
    """Black-box oracle for the second-kind double-layer operator (a dense
    desk-scale stand-in; the product interface is the contract)."""
    return dense_oracle(double_layer_matrix(n, contour))


def ntd_oracle(n: int, contour: Contour) -> MatVecOracle:
    """Neumann-to-Dirichlet operator S (1/2 I + D*)^-1 as a black-box
    oracle: assembles both layer matrices, factorizes the second-kind part
    once, and applies the product without ever forming it densely."""
    s_mat = single_layer_matrix(n, contour)
    system = adjoint_double_layer_matrix(n, contour)
    system[np.diag_indices(n)] += 0.5
    lu_piv = scipy.linalg.lu_factor(system)

    def apply_batch(x):
        return s_mat @ scipy.linalg.lu_solve(lu_piv, x)

    def apply_transpose_batch(x):
        return scipy.linalg.lu_solve(lu_piv, s_mat.T @ x, trans=1)

    return MatVecOracle(n, apply_batch, apply_transpose_batch)


@dataclass(frozen=True)
class GridProblem:
    """Rectangular five-point-stencil grid split by its middle row:
    index sets for top half, bottom half, and the separator line, plus the
    assembled stiffness matrix."""

    width: int
    height: int
    stiffness: scipy.sparse.csr_matrix
    interior_top: np.ndarray
    interior_bottom: np.ndarray
    separator: np.ndarray


def grid_problem(width: int, height: int = 51) -> GridProblem:
    """Assemble the Poisson five-point stencil on a width x height grid and
    partition it so no stencil edge joins the two interior halves."""
    if width < 8:
        raise DimensionError(f"grid width must be at least 8, got {width}")
    if height < 3 or height % 2 == 0:
        raise DimensionError(f"grid height must be odd and at least 3, got {height}")
    total = width * height
    idx = np.arange(total).reshape(height, width)
    row_idx = [np.arange(total)]
    col_idx = [np.arange(total)]
    data = [4.0 * np.ones(total)]
    for shift_r, shift_c in ((0, 1), (1, 0)):
        src = idx[: height - shift_r, : width - shift_c].ravel()
        dst = idx[shift_r:, shift_c:].ravel()
        link = -np.ones(src.size)
        row_idx += [src, dst]
        col_idx += [dst, src]
        data += [link, link]
    stiffness = scipy.sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(row_idx), np.concatenate(col_idx))),
        shape=(total, total),
    )
    mid = height // 2
    return GridProblem(
        width=width,
        height=height,
        stiffness=stiffness,
        interior_top=idx[:mid].ravel(),
        interior_bottom=idx[mid + 1 :].ravel(),
        separator=idx[mid].ravel(),
    )


def schur_oracle(width: int, height: int = 51) -> MatVecOracle:
    """Schur complement of the grid Laplacian onto its middle separator
    line, applied via one sparse factorization per interior half.  The
    target is symmetric, so the transpose path reuses the forward apply."""
    problem = grid_problem(width, height)
    c = problem.stiffness.tocsc()
    i1, i2, i3 = problem.interior_top, problem.interior_bottom, problem.separator
    c11 = scipy.sparse.linalg.splu(c[i1][:, i1])
    c22 = scipy.sparse.linalg.splu(c[i2][:, i2])
    c13 = c[i1][:, i3].tocsr()
    c31 = c[i3][:, i1].tocsr()
    c23 = c[i2][:, i3].tocsr()
    c32 = c[i3][:, i2].tocsr()
    c33 = c[i3][:, i3].toarray()

    def apply_batch(x):
        return c33 @ x - c31 @ c11.solve(c13 @ x) - c32 @ c22.solve(c23 @ x)

    return MatVecOracle(width, apply_batch, apply_batch)
