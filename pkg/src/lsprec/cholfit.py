# Sieve least squares for the Cholesky regression coefficients.
#
# Each row i of the precision factor regresses x_i on its previous values.
# For i past the band the b lag coefficients are smooth functions of
# rescaled time expanded in a sieve basis, so one global regression with
# b*c regressors covers all interior rows at once. The first b rows get
# their own shorter regressions (fewer past values exist), one per row.

from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditionedError
from .sievebasis import BasisSet, basis_matrix, evaluate_basis

COND_LIMIT = 1e12  # on the Gram matrix, i.e. squared design condition


def _as_basis(basis, c):
    """Accept a BasisSet or a bare family name."""
    return BasisSet(family=basis, c=c) if isinstance(basis, str) else basis


def guarded_lstsq(design, response):
    """Least squares via SVD with a conditioning guard.

    @Returns (solution, gram_cond) where gram_cond = cond(design)^2.
    Raises IllConditionedError when gram_cond exceeds COND_LIMIT (also
    covers rank-deficient designs, where the ratio is infinite).
    """
    sol, _, _, sv = np.linalg.lstsq(design, response, rcond=None)
    if sv[0] == 0.0 or sv[-1] == 0.0:
        raise IllConditionedError("degenerate design matrix", cond=np.inf)
    gram_cond = float((sv[0] / sv[-1]) ** 2)
    if not np.isfinite(gram_cond) or gram_cond > COND_LIMIT:
        raise IllConditionedError(
            f"gram condition number {gram_cond:.3e} exceeds {COND_LIMIT:.0e}",
            cond=gram_cond,
        )
    return sol, gram_cond


def flatten_coeffs(a):
    """Row-major flattening of the (b, c) coefficient array: lag-major blocks."""
    return np.asarray(a).reshape(-1)


def unflatten_coeffs(beta, b, c):
    """Inverse of flatten_coeffs."""
    beta = np.asarray(beta)
    if beta.size != b * c:
        raise ValueError("coefficient vector has wrong length")
    return beta.reshape(b, c)


@dataclass(frozen=True)
class SieveFit:
    """Interior regression result.

    a holds the sieve coefficients, one row per lag; gram is the scaled
    design Gram matrix design'design/n; residuals cover times b+1..n in
    order. The lag coefficient functions are recovered through phi().
    """

    b: int
    c: int
    n: int
    a: np.ndarray            # (b, c)
    beta: np.ndarray         # (b*c,) flattened, lag-major
    gram: np.ndarray         # (b*c, b*c)
    residuals: np.ndarray    # (n - b,)
    basis: object
    gram_cond: float = field(default=np.nan)

    def phi(self, tgrid):
        """Lag coefficient functions on a grid: shape (len(tgrid), b)."""
        return basis_matrix(self.basis, np.atleast_1d(tgrid)) @ self.a.T

    def phi_at(self, t):
        """All b lag coefficients at one time point."""
        return self.a @ evaluate_basis(self.basis, t)


@dataclass(frozen=True)
class BoundaryFit:
    """Row-wise regressions for rows 2..b.

    Row i uses exactly i-1 lags. coeff_values[i] are the lag coefficients
    evaluated at t = i/n; sq_residuals[i] is the squared residual series
    over k = i..n feeding the boundary variance regressions.
    """

    b: int
    c: int
    n: int
    basis: object
    coeff_values: dict      # i -> (i-1,) lag coefficients at t = i/n
    coeff_arrays: dict      # i -> (i-1, c) sieve coefficients
    sq_residuals: dict      # i -> (n-i+1,) squared residuals, k = i..n
    gram_conds: dict        # i -> float


def build_design(sample, b, c, basis):
    """Interior design matrix: one row per time i = b+1..n.

    Flat column s (0-based) pairs lag j = s//c + 1 with basis function
    k = s%c + 1 and holds alpha_k(i/n) * x_{i-j}.
    """
    if b < 1 or c < 1:
        raise ValueError("b and c must be positive")
    basis = _as_basis(basis, c)
    if basis.c != c:
        raise ValueError("basis size does not match c")
    n = sample.n
    if b * c >= n - b:
        raise ValueError("underdetermined design: need b*c < n - b")
    x = sample.values
    bmat = basis_matrix(basis, np.arange(b + 1, n + 1) / n)
    design = np.empty((n - b, b * c))
    for j in range(1, b + 1):
        design[:, (j - 1) * c : j * c] = bmat * x[b - j : n - j, None]
    return design


def fit_interior(sample, b, c, basis):
    """Fit all interior lag coefficient functions in one regression."""
    basis = _as_basis(basis, c)
    design = build_design(sample, b, c, basis)
    response = sample.values[b:]
    beta, cond = guarded_lstsq(design, response)
    resid = response - design @ beta
    return SieveFit(
        b=b,
        c=c,
        n=sample.n,
        a=unflatten_coeffs(beta, b, c),
        beta=beta,
        gram=design.T @ design / sample.n,
        residuals=resid,
        basis=basis,
        gram_cond=cond,
    )


def fit_boundary(sample, b, c, basis):
    """Per-row regressions for rows i = 2..b (empty when b = 1)."""
    if b < 1 or c < 1:
        raise ValueError("b and c must be positive")
    basis = _as_basis(basis, c)
    if basis.c != c:
        raise ValueError("basis size does not match c")
    n = sample.n
    x = sample.values
    coeff_values, coeff_arrays, sq_residuals, conds = {}, {}, {}, {}
    for i in range(2, b + 1):
        nrows = n - i + 1
        p = (i - 1) * c
        if p >= nrows:
            raise ValueError(f"underdetermined boundary regression at row {i}")
        bmat = basis_matrix(basis, np.arange(i, n + 1) / n)
        design = np.empty((nrows, p))
        for j in range(1, i):
            # x_{k-j} over k = i..n
            design[:, (j - 1) * c : j * c] = bmat * x[i - j - 1 : n - j, None]
        response = x[i - 1 :]
        d, cond = guarded_lstsq(design, response)
        arr = d.reshape(i - 1, c)
        resid = response - design @ d
        coeff_values[i] = arr @ evaluate_basis(basis, i / n)
        coeff_arrays[i] = arr
        sq_residuals[i] = resid ** 2
        conds[i] = cond
    return BoundaryFit(
        b=b,
        c=c,
        n=n,
        basis=basis,
        coeff_values=coeff_values,
        coeff_arrays=coeff_arrays,
        sq_residuals=sq_residuals,
        gram_conds=conds,
    )


def residuals(fit, sample):
    """Recompute the interior residuals from scratch.

    Matches the stored fit.residuals bitwise because the arithmetic is
    identical: response minus design @ beta.
    """
    if sample.n != fit.n:
        raise ValueError("sample does not match the fitted length")
    design = build_design(sample, fit.b, fit.c, fit.basis)
    return sample.values[fit.b :] - design @ fit.beta
