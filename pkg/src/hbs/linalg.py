"""Dense linear-algebra primitives: seeded Gaussian test matrices, QR-based
column/nullspace bases, pseudoinverse action against wide probe matrices,
and a power-method estimator for relative operator norms.

All routines work on float64 ndarrays and are pure functions of their
inputs, so identical seeds reproduce runs bit-for-bit on one platform.
"""

import numpy as np

from .errors import DimensionError, IllConditionedProbeError
from .flops import add_madds, matmul_madds, qr_madds, svd_madds

# Named substreams of a single user seed, so one seed reproduces a full run.
STREAM_OMEGA = 0
STREAM_PSI = 1
STREAM_POWER = 2
STREAM_SYNTHETIC = 3

DEFAULT_ILL_CONDITIONING_TOL = 1e-10


def gaussian_matrix(n: int, s: int, seed: int, stream: int = 0) -> np.ndarray:
    """Draw an n x s matrix of iid standard normals.

    `stream` selects a decorrelated substream of `seed`; the same
    (n, s, seed, stream) always yields the same matrix.
    """
    if n < 1 or s < 1:
        raise DimensionError(f"gaussian_matrix needs positive dimensions, got {n} x {s}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))
    return rng.standard_normal((n, s))


def col(b: np.ndarray, k: int) -> np.ndarray:
    """Return k orthonormal columns spanning the column space captured by an
    unpivoted QR of `b` (safe here because callers only pass random-derived
    matrices, for which leading columns are generic)."""
    rows, cols = b.shape
    if k > min(rows, cols):
        raise DimensionError(f"cannot extract {k} basis columns from a {rows} x {cols} matrix")
    add_madds(qr_madds(rows, cols))
    q, _ = np.linalg.qr(b)
    q = q[:, :k]
    if k == cols:
        # Full-width request must reproduce the input's column space exactly.
        scale = np.linalg.norm(b)
        assert scale == 0.0 or np.linalg.norm(b - q @ (q.T @ b)) <= 1e-8 * scale
    return q


def nullspace(b: np.ndarray, k: int) -> np.ndarray:
    """Return k orthonormal columns of the nullspace of a wide matrix `b`,
    taken as the trailing columns of the full QR factor of b^T."""
    rows, cols = b.shape
    if cols - rows < k:
        raise DimensionError(
            f"a {rows} x {cols} matrix only guarantees nullity {max(cols - rows, 0)}, need {k}"
        )
    add_madds(qr_madds(cols, rows, full=True))
    q, _ = np.linalg.qr(b.T, mode="complete")
    return q[:, cols - k :]


def lstsq_right(
    b: np.ndarray, m: np.ndarray, tol: float = DEFAULT_ILL_CONDITIONING_TOL
) -> np.ndarray:
    """Solve min_X ||X M - B||_F for wide, full-row-rank M (i.e. apply M's
    pseudoinverse on the right: X = B M^+).

    Uses an SVD of M so rank deficiency is detected explicitly; singular
    values below tol * sigma_max raise IllConditionedProbeError.
    """
    m_rows, m_cols = m.shape
    if m_rows > m_cols:
        raise DimensionError(f"probe matrix must be wide, got {m_rows} x {m_cols}")
    if b.shape[1] != m_cols:
        raise DimensionError(
            f"column mismatch: B is {b.shape[0]} x {b.shape[1]}, M is {m_rows} x {m_cols}"
        )
    add_madds(svd_madds(m_rows, m_cols))
    u, sig, vt = np.linalg.svd(m, full_matrices=False)
    if sig[0] == 0.0 or sig[-1] < tol * sig[0]:
        raise IllConditionedProbeError(
            f"probe matrix ({m_rows} x {m_cols}) is rank deficient within tolerance "
            f"{tol:g} (sigma_min/sigma_max = {sig[-1] / max(sig[0], np.finfo(float).tiny):.3e}); "
            "increase the probe count s"
        )
    add_madds(matmul_madds(b.shape[0], m_cols, m_rows) + matmul_madds(b.shape[0], m_rows, m_rows))
    return (b @ vt.T / sig) @ u.T


def _gram_norm_estimate(op, op_t, x0, iters):
    """Power iteration on the Gram operator x <- op_t(op(x)); returns a
    lower-bound estimate of the largest singular value of op."""
    x = x0 / np.linalg.norm(x0)
    estimate = 0.0
    for _ in range(iters):
        y = op_t(op(x))
        gain = np.linalg.norm(y)
        if gain == 0.0:
            return 0.0
        estimate = np.sqrt(gain)
        x = y / gain
    return estimate


def power_method_relnorm(op_e, op_et, op_a, op_at, n, iters=20, seed=0):
    """Estimate ||E|| / ||A|| from matvec handles only.

    Both norms are estimated by `iters` power iterations on the respective
    Gram operators, started from the same random vector, so each estimate is
    a lower bound on its true norm (up to roundoff) and E == A reports
    exactly 1.  One iteration costs one apply of the operator and one of its
    transpose.
    """
    if iters < 1:
        raise DimensionError("power method needs at least one iteration")
    stream = STREAM_POWER
    x0 = gaussian_matrix(n, 1, seed, stream)[:, 0]
    while not np.linalg.norm(x0) > 0.0:
        # Probability-zero start-vector collision: move to the next stream.
        stream += 1
        x0 = gaussian_matrix(n, 1, seed, stream)[:, 0]
    e_norm = _gram_norm_estimate(op_e, op_et, x0, iters)
    a_norm = _gram_norm_estimate(op_a, op_at, x0, iters)
    if a_norm == 0.0:
        raise ValueError("reference operator norm estimate is zero; relative error undefined")
    return e_norm / a_norm
