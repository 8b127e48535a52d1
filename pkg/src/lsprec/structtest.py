"""L2-type structure tests with simulated null distributions.

Two hypotheses about the autoregressive coefficient functions: that
every lag vanishes (the series is a possibly heteroscedastic white
noise) and that all lags beyond k0 vanish (the precision matrix is
k0-banded). The observed statistic aggregates the squared fitted
coefficient functions over the tested lags; its null distribution is
simulated by drawing Gaussian score vectors with the kernel-estimated
covariance and pushing them through the same least-squares projection
and quadratic form as the data. Observed statistic and null draws share
one code path, so the comparison in the decision rule is
unit-consistent by construction.
"""

from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_factor, cho_solve
from scipy.stats import skew

from .cholfit import fit_interior
from .errors import NumericalError
from .lrcov import assemble_score_cov, psd_sqrt
from .procsim import make_rng
from .sievebasis import basis_matrix

KINDS = ("whitenoise", "banded")


def _lag_set(b, kind, k0):
    """Tested lags: 1..b for the white-noise test, k0+1..b for bandedness."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if kind == "whitenoise":
        if k0 not in (None, 0):
            raise ValueError("k0 only applies to the banded test")
        return np.arange(1, b + 1)
    if k0 is None:
        raise ValueError("the banded test needs k0")
    if not 0 <= k0 < b:
        raise ValueError("k0 must satisfy 0 <= k0 < b")
    return np.arange(k0 + 1, b + 1)


def statistic_whitenoise(fit):
    """Sum over all lags of the integrated squared coefficient function.

    With an orthonormal basis the integral of each squared function is
    the sum of its squared coefficients, so this is exact.
    """
    return float(np.sum(fit.a ** 2))


def statistic_banded(fit, k0):
    """Same sum restricted to lags beyond k0."""
    if not 0 <= k0 < fit.b:
        raise ValueError("k0 must satisfy 0 <= k0 < b")
    return float(np.sum(fit.a[k0:, :] ** 2))


def _design_gram(fit):
    """Basis Gram over the interior design grid (b+1..n)/n."""
    bm = basis_matrix(fit.basis, np.arange(fit.b + 1, fit.n + 1) / fit.n)
    return bm.T @ bm


def riemann_statistic(fit, kind, k0=None):
    """Observed statistic as the Riemann-sum quadratic form.

    (1/n) sum_j a_j' (B'B) a_j over the tested lags; this is the grid
    version of the integrated squared coefficient functions and is the
    exact functional applied to the simulated null coefficients.
    """
    lags = _lag_set(fit.b, kind, k0)
    gb = _design_gram(fit)
    per_lag = np.einsum("jc,cd,jd->j", fit.a, gb, fit.a) / fit.n
    return float(per_lag[lags - 1].sum())


def simulate_null(fit, factor, kind, B, seed, k0=None):
    """Draw B realizations of the statistic under the null.

    Each draw feeds a Gaussian score vector F z through the normal
    equations: the simulated coefficient vector solves (Y'Y) beta = M F z,
    where M aggregates scores into the design cross-products basis
    block by basis block. The statistic is then the same Riemann-sum
    quadratic form used for the observed coefficients. The scores never
    materialize any (mb x mb) quadratic-form matrix per time point;
    only the factor itself is dense.
    """
    lags = _lag_set(fit.b, kind, k0)
    n, b, c = fit.n, fit.b, fit.c
    m = n - b
    factor = np.asarray(factor, dtype=float)
    if factor.shape != (m * b, m * b):
        raise ValueError(f"factor must have shape ({m * b}, {m * b})")
    if B < 1:
        raise ValueError("B must be positive")
    bm = basis_matrix(fit.basis, np.arange(b + 1, n + 1) / n)
    gb = bm.T @ bm
    mmat = np.zeros((b * c, m * b))
    for s in range(b):
        mmat[s * c : (s + 1) * c, s::b] = bm.T
    mf = mmat @ factor
    try:
        chol = cho_factor(n * fit.gram)
    except LinAlgError as exc:
        raise NumericalError("design Gram is not positive definite") from exc
    z = make_rng(seed).standard_normal((B, m * b))
    beta = cho_solve(chol, mf @ z.T)
    a3 = beta.reshape(b, c, B)
    per_lag = np.einsum("jcx,cd,jdx->jx", a3, gb, a3) / n
    return per_lag[lags - 1].sum(axis=0)


def null_moments(draws):
    """Mean, variance, and skewness of the simulated null (diagnostic).

    The limiting null is Gaussian, so heavy skewness flags an
    uncalibrated simulation; the decision rule never uses these.
    """
    draws = np.asarray(draws, dtype=float)
    return {
        "mean": float(draws.mean()),
        "variance": float(draws.var()),
        "skewness": float(skew(draws)),
    }


@dataclass(frozen=True)
class TestResult:
    """Outcome of one structure test."""

    kind: str
    k0: int | None
    statistic: float
    null_draws: np.ndarray
    p_value: float
    level: float
    reject: bool

    def null_diagnostics(self):
        return null_moments(self.null_draws)


def decide(statistic, draws, level):
    """P-value and decision from simulated null draws.

    p = 1 - (#draws <= statistic)/B; rejection compares the statistic
    with the floor(B(1-level))-th smallest draw.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.size < 1:
        raise ValueError("need at least one null draw")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    below = int(np.sum(draws <= statistic))
    p_value = 1.0 - below / draws.size
    order = min(max(int(np.floor(draws.size * (1.0 - level))), 1), draws.size)
    threshold = np.sort(draws)[order - 1]
    return float(p_value), bool(statistic > threshold)


def run_test(sample, kind, level, b, c, basis, h, B, seed, k0=None):
    """Fit, simulate the null, and decide at the given level.

    The p-value is the fraction of null draws above the observed
    statistic; rejection compares the observed statistic with the
    floor(B(1-level))-th order statistic of the draws.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if B < 100:
        raise ValueError("B must be at least 100")
    fit = fit_interior(sample, b, c, basis)
    factor = psd_sqrt(assemble_score_cov(sample, fit, h))
    draws = simulate_null(fit, factor, kind, B, seed, k0=k0)
    stat = riemann_statistic(fit, kind, k0=k0)
    p_value, reject = decide(stat, draws, level)
    return TestResult(
        kind=kind,
        k0=k0 if kind == "banded" else None,
        statistic=stat,
        null_draws=draws,
        p_value=p_value,
        level=float(level),
        reject=reject,
    )
