"""Kernel-smoothed covariance of the regression scores.

The score at index k is the lag vector times the fitted residual; the
simulated null distributions of the structure tests draw Gaussian
vectors with the covariance estimated here. Because the model is
banded, scores more than b indices apart are uncorrelated, so the
covariance is stored as a block-banded matrix: m = n - b block rows of
size b, with lags 0..b only. Smoothing in rescaled time uses the
Epanechnikov kernel; windows truncate naturally at the sample edges
(no boundary correction).
"""

from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import eigh

from .errors import KernelWindowError, NumericalError

# desk-scale caps: eigendecomposition and dense debugging export
PSD_MAX_DIM = 8192
DENSE_EXPORT_MAX_N = 512


def epanechnikov(u):
    """Epanechnikov kernel 0.75 (1 - u^2) on [-1, 1], zero outside."""
    u = np.asarray(u, dtype=float)
    out = np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    return float(out) if out.ndim == 0 else out


def score_series(sample, fit):
    """Scores for rows b+1..n as an (n - b, b) array.

    Row r holds x_{k-1} e_k, ..., x_{k-b} e_k for k = b + 1 + r, where
    e_k is the fitted residual at index k.
    """
    if sample.n != fit.n:
        raise ValueError("sample and fit disagree on n")
    n, b = fit.n, fit.b
    x = sample.values
    out = np.empty((n - b, b))
    for j in range(1, b + 1):
        out[:, j - 1] = x[b - j : n - j] * fit.residuals
    return out


def kernel_cov_block(scores, t, lag, h):
    """One kernel-weighted covariance block by direct summation.

    Averages score outer products at the given lag with Epanechnikov
    weights centred at rescaled time t: sum_k K((k/n - t)/h) s_k
    s_{k+lag}' / (n h) over k = b+1 .. n-lag.
    """
    scores = np.asarray(scores, dtype=float)
    m, b = scores.shape
    n = m + b
    if not 0 <= lag <= b:
        raise ValueError(f"lag must lie in 0..{b}")
    if not 0.0 < h < 1.0:
        raise ValueError("bandwidth must lie in (0, 1)")
    k = np.arange(b + 1, n - lag + 1)
    inside = np.abs(k / n - t) <= h
    if not np.any(inside):
        raise KernelWindowError(f"no score indices within h={h} of t={t}")
    kk = k[inside]
    w = epanechnikov((kk / n - t) / h) / (n * h)
    left = scores[kk - (b + 1)]
    right = scores[kk + lag - (b + 1)]
    return np.einsum("k,ki,kj->ij", w, left, right)


def _smoothed_blocks(scores, lag, h):
    """Kernel smooth of lagged outer products at every product index.

    On the grid t = k/n the kernel weights form a Toeplitz band, so each
    of the b^2 entry series is one convolution with the weight vector.
    Returns (smoothed, products, self_weight): arrays of shape
    (m - lag, b, b) where row r belongs to index k = b + 1 + r, plus the
    weight a product places on its own centre.
    """
    m, b = scores.shape
    n = m + b
    dmax = int(np.floor(n * h))
    kv = epanechnikov(np.arange(-dmax, dmax + 1) / (n * h)) / (n * h)
    prods = scores[: m - lag, :, None] * scores[lag:, None, :]
    rows = m - lag
    if rows == 0:
        empty = np.zeros((0, b, b))
        return empty, prods, kv[dmax]
    flat = prods.reshape(rows, b * b)
    out = np.empty((rows, b * b))
    for col in range(b * b):
        out[:, col] = np.convolve(flat[:, col], kv)[dmax : dmax + rows]
    return out.reshape(rows, b, b), prods, kv[dmax]


@dataclass(frozen=True)
class BlockBandedCov:
    """Block-banded score covariance: m = n - b block rows of size b.

    diag[a] is the block at block-row a+1; off[j-1][a] is the block at
    (a+1, a+1+j). Lower blocks are transposes of the stored upper ones.
    """

    n: int
    b: int
    h: float
    diag: np.ndarray
    off: tuple

    def __post_init__(self):
        m = self.m
        if self.diag.shape != (m, self.b, self.b):
            raise ValueError("diagonal blocks must have shape (m, b, b)")
        if len(self.off) != self.b:
            raise ValueError("one off-diagonal block array per lag 1..b")
        for j, blocks in enumerate(self.off, start=1):
            if blocks.shape != (max(m - j, 0), self.b, self.b):
                raise ValueError(f"lag-{j} blocks must have shape (m-{j}, b, b)")

    @property
    def m(self):
        return self.n - self.b

    def dense(self):
        """Densify; symmetric by construction."""
        b = self.b
        dim = self.m * b
        if dim > PSD_MAX_DIM:
            raise NumericalError(f"densification capped at dimension {PSD_MAX_DIM}")
        out = np.zeros((dim, dim))
        for a in range(self.m):
            out[a * b : (a + 1) * b, a * b : (a + 1) * b] = self.diag[a]
        for j, blocks in enumerate(self.off, start=1):
            for a in range(blocks.shape[0]):
                rows = slice(a * b, (a + 1) * b)
                cols = slice((a + j) * b, (a + j + 1) * b)
                out[rows, cols] = blocks[a]
                out[cols, rows] = blocks[a].T
        return out


def assemble_score_cov(sample, fit, h):
    """Estimate the block-banded score covariance at bandwidth h.

    Block row a (index k = b + a) takes the smoothed lag-j product
    evaluated at t = (b + a)/n for j = 0..b.
    """
    if not 0.0 < h < 1.0:
        raise ValueError("bandwidth must lie in (0, 1)")
    scores = score_series(sample, fit)
    b = fit.b
    diag, _, _ = _smoothed_blocks(scores, 0, h)
    off = tuple(_smoothed_blocks(scores, j, h)[0] for j in range(1, b + 1))
    return BlockBandedCov(n=fit.n, b=b, h=float(h), diag=diag, off=off)


def psd_sqrt(cov):
    """Square root of the positive part: F with F F' = projection of the
    input onto the PSD cone (negative eigenvalues clipped to zero).

    Accepts a BlockBandedCov (densified first) or a symmetric array.
    """
    mat = cov.dense() if isinstance(cov, BlockBandedCov) else np.asarray(cov, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    if mat.shape[0] > PSD_MAX_DIM:
        raise NumericalError(f"eigendecomposition capped at dimension {PSD_MAX_DIM}")
    try:
        lam, vec = eigh(mat)
    except LinAlgError as exc:
        raise NumericalError("eigendecomposition of the score covariance failed") from exc
    return vec * np.sqrt(np.clip(lam, 0.0, None))


def cv_profile(sample, fit, grid):
    """Leave-one-out cross-validation objective at each bandwidth.

    For each lag the criterion matrix averages the entrywise squared
    leave-one-out residuals (1/n) sum_k (y_k - S_{-k}) o (y_k - S_{-k}),
    with y_k the raw lagged product at index k and S_{-k} the smooth at
    t = k/n with the self term removed; the objective is the largest
    spectral norm over lags 0..b. Entries are nonnegative, so smaller
    norm means better out-of-sample fit.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty bandwidth grid")
    if np.any(grid <= 0.0) or np.any(grid > 0.5):
        raise ValueError("bandwidths must lie in (0, 0.5]")
    scores = score_series(sample, fit)
    n = fit.n
    out = np.empty(grid.size)
    for pos, h in enumerate(grid):
        worst = 0.0
        for lag in range(0, fit.b + 1):
            smooth, prods, self_weight = _smoothed_blocks(scores, lag, h)
            if smooth.shape[0] == 0:
                continue
            resid = prods - (smooth - self_weight * prods)
            crit = np.einsum("kij,kij->ij", resid, resid) / n
            worst = max(worst, np.linalg.norm(crit, 2))
        out[pos] = worst
    return out


def bandwidth_cv(sample, fit, grid):
    """Bandwidth minimizing the cross-validation objective.

    Ties break toward the smaller bandwidth.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    profile = cv_profile(sample, fit, grid)
    return float(grid[int(np.argmin(profile))])


def export_dense_csv(cov, path):
    """Write the dense score covariance as a CSV grid (debugging aid)."""
    if cov.n > DENSE_EXPORT_MAX_N:
        raise NumericalError(f"dense export capped at n = {DENSE_EXPORT_MAX_N}")
    np.savetxt(path, cov.dense(), delimiter=",", fmt="%.17g")
