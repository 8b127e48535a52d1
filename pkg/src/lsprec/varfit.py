# Innovation-variance estimation by sieve regression on squared residuals.
#
# Interior rows share one smooth variance function fitted to the squared
# interior residuals; each boundary row i <= b gets its own function from
# the squared residuals of that row's regression, evaluated at t = i/n
# only. Row 1 has no regression residuals, so its variance function is
# fitted to the squared observations themselves. A floor of 1/n keeps
# every fitted variance positive.

from dataclasses import dataclass

import numpy as np

from .cholfit import guarded_lstsq
from .sievebasis import basis_matrix, evaluate_basis


def fit_variance_interior(resid, c, basis, n, b):
    """Sieve coefficients of the interior variance function.

    Regresses the squared residuals (times b+1..n) on the basis columns
    evaluated at those times. Returns the coefficient vector of length c.
    """
    resid = np.asarray(resid)
    if len(resid) != n - b:
        raise ValueError("residual length does not match n - b")
    if c >= n - b:
        raise ValueError("sieve size too large for the residual count")
    design = basis_matrix(basis, np.arange(b + 1, n + 1) / n)
    d, _ = guarded_lstsq(design, resid ** 2)
    return d


def fit_variance_boundary(boundary, sample, c, basis):
    """Boundary variance values g^i(i/n) for i = 1..b.

    Row 1 regresses the squared observations on the basis over all k and
    evaluates at t = 1/n; rows 2..b use each row's squared regression
    residuals over k = i..n.
    """
    n = sample.n
    x = sample.values
    out = {}
    design = basis_matrix(basis, np.arange(1, n + 1) / n)
    d, _ = guarded_lstsq(design, x ** 2)
    out[1] = float(d @ evaluate_basis(basis, 1.0 / n))
    for i in sorted(boundary.sq_residuals):
        rows = basis_matrix(basis, np.arange(i, n + 1) / n)
        d, _ = guarded_lstsq(rows, boundary.sq_residuals[i])
        out[i] = float(d @ evaluate_basis(basis, i / n))
    return out


def clamp_positive(raw, n):
    """Floor the variance values at 1/n.

    @Returns (clamped array, count of entries that hit the floor)
    """
    raw = np.asarray(raw, dtype=float)
    floor = 1.0 / n
    clamped = np.maximum(raw, floor)
    return clamped, int(np.count_nonzero(raw < floor))


@dataclass(frozen=True)
class VarianceEstimate:
    """Clamped per-time innovation variances and their building blocks.

    sigma_star[i-1] is the clamped variance for time i. boundary_values
    keeps the raw (unclamped) boundary fits; clamp_count says how many of
    the n entries hit the 1/n floor.
    """

    n: int
    b: int
    c: int
    sigma_star: np.ndarray     # (n,) clamped variances
    ghat_coeffs: np.ndarray    # (c,) interior sieve coefficients
    boundary_values: dict      # i -> raw g^i(i/n), i = 1..b
    clamp_count: int


def estimate_variances(fit, boundary, sample):
    """Assemble the full variance vector from interior and boundary fits."""
    if fit.n != sample.n or boundary.n != sample.n or boundary.b != fit.b:
        raise ValueError("fit, boundary, and sample disagree on dimensions")
    n, b, c = fit.n, fit.b, fit.c
    ghat = fit_variance_interior(fit.residuals, c, fit.basis, n, b)
    bvals = fit_variance_boundary(boundary, sample, c, fit.basis)
    raw = np.empty(n)
    for i in range(1, b + 1):
        raw[i - 1] = bvals[i]
    raw[b:] = basis_matrix(fit.basis, np.arange(b + 1, n + 1) / n) @ ghat
    sigma_star, count = clamp_positive(raw, n)
    return VarianceEstimate(
        n=n,
        b=b,
        c=c,
        sigma_star=sigma_star,
        ghat_coeffs=ghat,
        boundary_values=bvals,
        clamp_count=count,
    )
