# Orthonormal sieve bases on [0, 1].
#
# Three families are provided. All are orthonormal with respect to their
# natural weight: Fourier and shifted Legendre under the flat weight,
# Chebyshev under w(t) = 1/(pi*sqrt(t(1-t))). The first function of every
# family is the constant 1, so a constant regression function is always in
# the span.

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_chebyt, eval_legendre

FAMILIES = ("Fourier", "LegendreShifted", "ChebyshevWeighted")

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class BasisSet:
    family: str
    c: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown basis family {self.family!r}; choose from {FAMILIES}")
        if not isinstance(self.c, (int, np.integer)) or self.c < 1:
            raise ValueError("basis size c must be a positive integer")


def basis_matrix(basis, tgrid):
    """Evaluate all c basis functions on a grid.

    @Parameters
        basis : BasisSet
        tgrid : array of points in [0, 1]
    @Returns
        array of shape (len(tgrid), c); column k-1 holds function k
    """
    t = np.asarray(tgrid, dtype=float)
    if t.ndim != 1:
        t = np.atleast_1d(t)
    if not np.all((t >= 0.0) & (t <= 1.0)):  # also rejects NaN
        raise ValueError("basis argument outside [0, 1]")
    c = basis.c
    out = np.empty((t.size, c))
    out[:, 0] = 1.0
    if basis.family == "Fourier":
        # convention: 1, sqrt2*cos(2*pi*m*t), sqrt2*sin(2*pi*m*t), m = 1, 2, ...
        for k in range(2, c + 1):
            m = k // 2
            ang = 2.0 * np.pi * m * t
            out[:, k - 1] = _SQRT2 * (np.cos(ang) if k % 2 == 0 else np.sin(ang))
    elif basis.family == "LegendreShifted":
        # sqrt(2k-1) * P_{k-1}(2t-1) is orthonormal on [0,1]
        x = 2.0 * t - 1.0
        for k in range(2, c + 1):
            out[:, k - 1] = np.sqrt(2.0 * k - 1.0) * eval_legendre(k - 1, x)
    else:  # ChebyshevWeighted
        x = 2.0 * t - 1.0
        for k in range(2, c + 1):
            out[:, k - 1] = _SQRT2 * eval_chebyt(k - 1, x)
    return out


def evaluate_basis(basis, t):
    """All c basis functions at a single point t in [0, 1]."""
    return basis_matrix(basis, np.array([float(t)]))[0]


def basis_diagnostics(basis, n):
    """Sup-norm diagnostics of the basis vector over the grid i/n, i = 1..n.

    Returns a dict with
        max_vector_norm : largest Euclidean norm of the c-vector on the grid
        max_abs_value   : largest absolute value of any single function
    Both scale the variance of sieve regressions, so they are reported by
    the tuning and testing layers.
    """
    if n < basis.c:
        raise ValueError("need n >= c grid points for the diagnostics")
    grid = np.arange(1, n + 1) / n
    mat = basis_matrix(basis, grid)
    return {
        "max_vector_norm": float(np.max(np.linalg.norm(mat, axis=1))),
        "max_abs_value": float(np.max(np.abs(mat))),
    }


def orthonormality_gram(basis, npoints=2048):
    """Gram matrix of the basis under a 2048-point quadrature rule.

    Should be the identity to about 1e-6 for c <= 64. The rule is chosen per
    family so the stated tolerance is actually reachable:
      - Fourier: composite midpoint on t (exact for trigonometric products
        up to frequency npoints-1),
      - LegendreShifted: Gauss-Legendre nodes (exact for the polynomial
        products involved),
      - ChebyshevWeighted: midpoint in theta after t = (1+cos(theta))/2,
        which turns the weighted integral into a flat one (plain midpoint
        on t cannot handle the endpoint singularity of the weight).
    """
    if basis.family == "LegendreShifted":
        x, w = np.polynomial.legendre.leggauss(npoints)
        t = 0.5 * (x + 1.0)
        mat = basis_matrix(basis, t)
        return (mat * (0.5 * w)[:, None]).T @ mat
    if basis.family == "ChebyshevWeighted":
        theta = (np.arange(npoints) + 0.5) * np.pi / npoints
        t = 0.5 * (1.0 + np.cos(theta))
        mat = basis_matrix(basis, t)
        return mat.T @ mat / npoints
    t = (np.arange(npoints) + 0.5) / npoints
    mat = basis_matrix(basis, t)
    return mat.T @ mat / npoints
