"""Data-driven choice of lag order, sieve size, and bandwidth.

The two-step selector first finds the lag order by scanning tail
significance tests downward from a pilot fit, then picks the sieve size
by leave-one-out cross-validation at that order, and finally selects
the smoothing bandwidth for the score covariance. Every step records
enough state to audit the choice afterwards.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cholfit import build_design, fit_interior, guarded_lstsq
from .errors import IllConditionedError, NumericalError
from .lrcov import PSD_MAX_DIM, assemble_score_cov, bandwidth_cv, psd_sqrt
from .procsim import derive_seed
from .sievebasis import BasisSet
from .structtest import decide, riemann_statistic, simulate_null


def default_lag_cap(n):
    """Largest admissible pilot lag order, ceil(4 n^(1/4))."""
    return math.ceil(4.0 * n ** 0.25)


def _feasible_lag(n):
    """Largest b whose score-covariance factor fits the dense-eigh cap."""
    b = 1
    while (b + 1) * (n - b - 1) <= PSD_MAX_DIM and b + 1 < n:
        b += 1
    return b


def _lower_median(seq):
    return sorted(seq)[(len(seq) - 1) // 2]


def cv_select_c(sample, b, grid_c, family):
    """Sieve size by leave-one-out CV at a fixed lag order.

    CV(c) = (1/n) sum_i (e_i / (1 - v_i))^2 with v_i the hat-matrix
    diagonal of the interior design. Candidates where some leverage
    reaches 1, or whose design is too ill-conditioned to solve, score
    +inf and are skipped. Ties break toward the smaller size.
    """
    grid = sorted(set(int(c) for c in grid_c))
    if not grid:
        raise ValueError("empty sieve-size grid")
    n = sample.n
    for c in grid:
        if c < 1 or b * c >= n - b:
            raise ValueError(f"candidate c={c} leaves no residual degrees of freedom")
    response = sample.values[b:]
    curve = []
    best_c, best = None, np.inf
    for c in grid:
        design = build_design(sample, b, c, BasisSet(family=family, c=c))
        q = np.linalg.qr(design)[0]
        leverage = np.einsum("il,il->i", q, q)
        if np.any(leverage >= 1.0):
            score = np.inf
        else:
            try:
                sol, _ = guarded_lstsq(design, response)
            except IllConditionedError:
                score = np.inf
            else:
                resid = response - design @ sol
                score = float(np.mean((resid / (1.0 - leverage)) ** 2))
        curve.append((c, score))
        if score < best:
            best_c, best = c, score
    if best_c is None:
        raise NumericalError("every sieve-size candidate was degenerate")
    return best_c, tuple(curve)


def select_b(sample, b0, level, c, family, B, h=0.15, seed=0):
    """Lag order by downward tail-significance scan.

    Fits once at the pilot order b0, then for b1 = b0-1 .. 1 tests
    whether the coefficient functions at lags b1..b0 are jointly zero,
    using the simulated null at bandwidth h. Returns (bstar, trace):
    the largest b1 whose test rejects (1 if none does) and the full
    (b1, p-value) trace in scan order.
    """
    cap = default_lag_cap(sample.n)
    if not 2 <= b0 <= cap:
        raise ValueError(f"b0 must lie in 2..{cap}")
    basis = BasisSet(family=family, c=c)
    fit = fit_interior(sample, b0, c, basis)
    factor = psd_sqrt(assemble_score_cov(sample, fit, h))
    trace = []
    bstar = 1
    for b1 in range(b0 - 1, 0, -1):
        draws = simulate_null(fit, factor, "banded", B, derive_seed(seed, b1), k0=b1 - 1)
        stat = riemann_statistic(fit, "banded", k0=b1 - 1)
        p_value, reject = decide(stat, draws, level)
        trace.append((b1, p_value))
        if reject:
            bstar = max(bstar, b1)
    return bstar, tuple(trace)


@dataclass(frozen=True)
class TuningGrids:
    """Search grids and knobs for the two-step selector."""

    c_grid: tuple
    h_grid: tuple
    b0: int = None
    B: int = 500
    seed: int = 0


@dataclass(frozen=True)
class TuningReport:
    """Chosen (b, c, h) plus the evidence they were chosen from."""

    chosen_b: int
    chosen_c: int
    chosen_h: float
    cv_curve: tuple
    bstar_trace: tuple


def two_step(sample, grids, level, family):
    """Lag order by significance scan, then sieve size by CV, then bandwidth.

    The scan runs at pilot values (lower medians of the grids); the CV
    step then fixes the chosen order, and the bandwidth is
    cross-validated on the final fit.
    """
    c_grid = tuple(sorted(set(int(c) for c in grids.c_grid)))
    h_grid = tuple(sorted(set(float(h) for h in grids.h_grid)))
    if not c_grid or not h_grid:
        raise ValueError("empty tuning grids")
    n = sample.n
    b0 = grids.b0
    if b0 is None:
        b0 = max(2, min(default_lag_cap(n), _feasible_lag(n), 5))
    pilot_c = _lower_median(c_grid)
    pilot_h = _lower_median(h_grid)
    bstar, trace = select_b(
        sample, b0, level, pilot_c, family, grids.B,
        h=pilot_h, seed=derive_seed(grids.seed, 1),
    )
    chosen_c, curve = cv_select_c(sample, bstar, c_grid, family)
    fit = fit_interior(sample, bstar, chosen_c, BasisSet(family=family, c=chosen_c))
    chosen_h = bandwidth_cv(sample, fit, h_grid)
    return TuningReport(
        chosen_b=bstar,
        chosen_c=chosen_c,
        chosen_h=chosen_h,
        cv_curve=curve,
        bstar_trace=trace,
    )
