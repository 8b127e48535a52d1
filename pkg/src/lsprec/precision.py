# Banded Cholesky-factor storage of the precision estimate.
#
# The estimate is kept factored as Phi' D Phi where Phi is unit lower
# triangular with at most b nonzero subdiagonals and D is diagonal with
# strictly positive entries, so the whole object costs O(nb) memory and
# is positive definite by construction. Densification is a diagnostic
# only and is capped at n = 4096.

import csv
from dataclasses import dataclass

import numpy as np

from .cholfit import fit_boundary, fit_interior
from .errors import NumericalError, PowerIterationError
from .procsim import make_rng
from .varfit import estimate_variances

DENSE_MAX_N = 4096
_POWER_SEED = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class PrecisionEstimate:
    """Factored precision matrix.

    phi_offdiag[i-1, j-1] holds the lag-j regression coefficient of row i,
    so the factor entry at (i, i-j) is its negative; entries with j >= i
    are structural zeros and row 1 carries only the unit diagonal. dinv
    holds the inverse innovation variances.
    """

    n: int
    b: int
    phi_offdiag: np.ndarray   # (n, b)
    dinv: np.ndarray          # (n,)

    def __post_init__(self):
        if self.phi_offdiag.shape != (self.n, self.b):
            raise ValueError("phi_offdiag must have shape (n, b)")
        if self.dinv.shape != (self.n,):
            raise ValueError("dinv must have shape (n,)")
        if not np.all(self.dinv > 0.0):
            raise ValueError("dinv entries must be strictly positive")
        cols = np.arange(1, self.b + 1)
        beyond = cols[None, :] >= np.arange(1, self.n + 1)[:, None]
        if np.any(self.phi_offdiag[beyond] != 0.0):
            raise ValueError("coefficients present beyond the row's history")


def assemble(fit, boundary, variances):
    """Combine interior fit, boundary fits, and variances into one factor."""
    n, b = fit.n, fit.b
    if boundary.n != n or boundary.b != b or variances.n != n or variances.b != b:
        raise ValueError("components disagree on (n, b)")
    phi = np.zeros((n, b))
    phi[b:, :] = fit.phi(np.arange(b + 1, n + 1) / n)
    for i in range(2, b + 1):
        phi[i - 1, : i - 1] = boundary.coeff_values[i]
    return PrecisionEstimate(n=n, b=b, phi_offdiag=phi, dinv=1.0 / variances.sigma_star)


def matvec(est, v):
    """Apply the precision estimate to a vector in O(nb)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (est.n,):
        raise ValueError("vector length mismatch")
    phi = est.phi_offdiag
    w = v.copy()
    for j in range(1, est.b + 1):
        w[j:] -= phi[j:, j - 1] * v[:-j]
    u = est.dinv * w
    out = u.copy()
    for j in range(1, est.b + 1):
        out[:-j] -= phi[j:, j - 1] * u[j:]
    return out


def dense_factor(est):
    """The unit-lower-triangular factor as a dense matrix (diagnostics)."""
    if est.n > DENSE_MAX_N:
        raise NumericalError(f"densification capped at n = {DENSE_MAX_N}")
    out = np.eye(est.n)
    for j in range(1, est.b + 1):
        idx = np.arange(j, est.n)
        out[idx, idx - j] = -est.phi_offdiag[idx, j - 1]
    return out


def dense(est):
    """The full precision matrix as a dense array (diagnostics only)."""
    phi = dense_factor(est)
    out = phi.T @ (est.dinv[:, None] * phi)
    # floating matmul is not bitwise symmetric; averaging restores that
    # without disturbing the exact zeros outside the band
    return 0.5 * (out + out.T)


def operator_norm_error(est, truth):
    """Spectral norm of (estimate - truth) by power iteration.

    The difference is symmetric, so the dominant |eigenvalue| equals the
    largest singular value; tracking the norm ratio instead of the
    Rayleigh quotient keeps convergence clean when the extreme
    eigenvalues come in a +/- pair. Deterministic start vector.
    """
    truth = np.asarray(truth, dtype=float)
    if truth.shape != (est.n, est.n):
        raise ValueError("truth matrix has wrong shape")
    if est.n > DENSE_MAX_N:
        raise NumericalError(f"dense comparison capped at n = {DENSE_MAX_N}")
    diff = dense(est) - truth
    v = make_rng(_POWER_SEED).standard_normal(est.n)
    v /= np.linalg.norm(v)
    prev = None
    for iteration in range(1, 10001):
        w = diff @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            # the start vector is annihilated; spectral norm 0 for diff = 0
            return 0.0
        if prev is not None and abs(norm - prev) <= 1e-6 * norm:
            return norm
        prev = norm
        v = w / norm
    raise PowerIterationError(
        "power iteration did not converge",
        last_estimate=prev,
        iterations=10000,
    )


def export_banded_csv(est, path):
    """Write the factor in banded coordinates: matrix, i, j, value.

    Rows tagged "phi" cover every structural entry of the triangular
    factor (unit diagonal plus the in-band subdiagonals); rows tagged
    "dinv" hold the diagonal inverse variances.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["matrix", "i", "j", "value"])
        for i in range(1, est.n + 1):
            writer.writerow(["phi", i, i, repr(1.0)])
            for j in range(1, min(est.b, i - 1) + 1):
                writer.writerow(["phi", i, i - j, repr(float(-est.phi_offdiag[i - 1, j - 1]))])
        for i in range(1, est.n + 1):
            writer.writerow(["dinv", i, i, repr(float(est.dinv[i - 1]))])


@dataclass(frozen=True)
class FitBundle:
    """Everything produced by one end-to-end estimation pass."""

    fit: object
    boundary: object
    variances: object
    estimate: PrecisionEstimate


def estimate_precision(sample, b, c, basis):
    """Run the full pipeline: interior fit, boundary fits, variances, assembly."""
    fit = fit_interior(sample, b, c, basis)
    boundary = fit_boundary(sample, b, c, basis)
    variances = estimate_variances(fit, boundary, sample)
    return FitBundle(
        fit=fit,
        boundary=boundary,
        variances=variances,
        estimate=assemble(fit, boundary, variances),
    )
