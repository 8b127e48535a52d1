# Test-process simulation and exact covariance/precision oracles.
#
# The model zoo is a family of time-varying MA and AR recursions whose
# coefficient functions are fixed closed forms of rescaled time t = i/n.
# Both the simulator and the oracles follow one documented convention:
#
#   * innovations are i.i.d. N(0, 1) scaled by innovation_sd, drawn as one
#     block of length L + n so regeneration is bit-identical;
#   * AR recursions run a burn-in of L = ceil(20 * log n) steps, with the
#     time argument clamped to t = 1/n while i <= 0 and zero state before
#     the burn-in window.
#
# Because the oracle reproduces exactly this initialization, simulator and
# oracle agree to the stated truncation error and Monte Carlo moments can
# be checked against analytic targets.

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IllConditionedError, NumericalError

MODEL_KINDS = (
    "WhiteNoise",
    "TvMA1",
    "TvMA2",
    "TvMA3",
    "TvAR1",
    "TvAR2",
    "TvAR3delta",
    "StatAR1",
)

_MASK64 = (1 << 64) - 1

DENSE_ORACLE_MAX_N = 4096


def splitmix64(x):
    """One step of the splitmix64 mixer; returns a 64-bit integer."""
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed, index):
    """Per-replication stream seed: seed XOR splitmix64(index)."""
    return (int(seed) & _MASK64) ^ splitmix64(index)


def make_rng(seed):
    """Counter-based generator (Philox) keyed directly by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    delta: float = None
    innovation_sd: float = 1.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        if self.kind == "TvAR3delta":
            # delta = 0 drops the third lag entirely, giving the banded null;
            # the upper bound keeps the AR polynomial safely stable.
            if self.delta is None or not (0.0 <= self.delta < 0.3):
                raise ValueError("TvAR3delta requires delta in [0, 0.3)")
        elif self.delta is not None:
            raise ValueError(f"delta is only meaningful for TvAR3delta, not {self.kind}")
        if not (self.innovation_sd > 0.0):
            raise ValueError("innovation_sd must be > 0")

    def ma_coeffs(self, t):
        """MA coefficient functions (theta_1(t), ...), empty for AR kinds."""
        t = np.asarray(t, dtype=float)
        if self.kind == "WhiteNoise":
            return []
        if self.kind == "TvMA1":
            return [0.6 * np.cos(2.0 * np.pi * t)]
        if self.kind == "TvMA2":
            return [0.6 * np.cos(2.0 * np.pi * t), 0.3 * np.sin(2.0 * np.pi * t)]
        if self.kind == "TvMA3":
            return [
                0.6 * np.cos(2.0 * np.pi * t),
                0.3 * np.sin(2.0 * np.pi * t),
                t * np.ones_like(t),
            ]
        raise ValueError(f"{self.kind} is not a moving-average kind")

    def ar_coeffs(self, t):
        """AR coefficient functions (a_1(t), ...), empty for MA kinds."""
        t = np.asarray(t, dtype=float)
        if self.kind == "TvAR1":
            return [0.6 * np.cos(2.0 * np.pi * t)]
        if self.kind == "StatAR1":
            return [0.6 * np.ones_like(t)]
        if self.kind == "TvAR2":
            return [0.6 * np.cos(2.0 * np.pi * t), 0.3 * np.sin(2.0 * np.pi * t)]
        if self.kind == "TvAR3delta":
            return [
                0.6 * np.cos(2.0 * np.pi * t),
                0.3 * np.sin(2.0 * np.pi * t),
                self.delta * np.sin(2.0 * np.pi * t),
            ]
        raise ValueError(f"{self.kind} is not an autoregressive kind")

    @property
    def is_ar(self):
        return self.kind in ("TvAR1", "TvAR2", "TvAR3delta", "StatAR1")


@dataclass(frozen=True)
class TimeSeriesSample:
    values: np.ndarray
    n: int
    model: ModelSpec
    seed: int

    def __post_init__(self):
        if len(self.values) != self.n:
            raise ValueError("values length does not match n")


@dataclass(frozen=True)
class AssumptionParams:
    """Decay/smoothness exponents governing default band and sieve sizes.

    tau    : dependence decay exponent, > 10
    d      : smoothness order, positive integer
    alpha1 : sieve-size exponent in (0, 1)

    The side constraint 4/tau + d*alpha1 < 1 is reported, not enforced;
    parameter sets violating it still define a band but lose the rate
    guarantees.
    """

    tau: float
    d: int
    alpha1: float

    def __post_init__(self):
        if not (self.tau > 10.0):
            raise ValueError("tau must be > 10")
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise ValueError("d must be a positive integer")
        if not (0.0 < self.alpha1 < 1.0):
            raise ValueError("alpha1 must lie in (0, 1)")

    def constraint_satisfied(self):
        return 4.0 / self.tau + self.d * self.alpha1 < 1.0

    def default_band(self, n):
        """Default band order b = ceil(n^(2/tau))."""
        return int(math.ceil(n ** (2.0 / self.tau)))

    def default_sieve_size(self, n):
        """Default sieve size c = ceil(n^alpha1)."""
        return int(math.ceil(n ** self.alpha1))


def burn_in_length(n):
    return int(math.ceil(20.0 * math.log(n)))


def simulate(model, n, seed):
    """Generate one realization x_1..x_n of the model.

    Deterministic in (model, n, seed): the same triple always returns the
    same bits. n must be at least 16.
    """
    if n < 16:
        raise ValueError("n must be at least 16")
    L = burn_in_length(n)
    rng = make_rng(seed)
    eps = model.innovation_sd * rng.standard_normal(L + n)
    # eps[L + i - 1] is the innovation at time i, i = 1-L .. n
    if not model.is_ar:
        x = eps[L:].copy()
        tgrid = np.arange(1, n + 1) / n
        for j, coef in enumerate(model.ma_coeffs(tgrid), start=1):
            x += coef * eps[L - j : L - j + n]
        return TimeSeriesSample(values=x, n=n, model=model, seed=int(seed))
    x = np.zeros(L + n)
    coefs = _clamped_ar_coefs(model, n, L)
    order = coefs.shape[1]
    for pos in range(L + n):
        acc = eps[pos]
        for j in range(1, min(order, pos) + 1):
            acc += coefs[pos, j - 1] * x[pos - j]
        x[pos] = acc
    return TimeSeriesSample(values=x[L:], n=n, model=model, seed=int(seed))


def _clamped_ar_coefs(model, n, L):
    """AR coefficients per recursion step; time clamped to 1/n while i <= 0."""
    i = np.arange(1 - L, n + 1)
    t = np.maximum(i, 1) / n
    return np.column_stack(model.ar_coeffs(t))


def _ar_ma_rows(model, n):
    """Truncated moving-average rows of the AR recursion.

    Row for absolute time i (i = 1-L .. n) holds coefficients c_{i,k} of
    x_i = sum_k c_{i,k} eps_{i-k}, truncated at K = ceil(40 * log n). The
    recursion mirrors simulate() exactly, including the burn-in clamp, so
    the truncation error (coefficient decay is geometric with ratio below
    0.85 for every model here) is the only source of disagreement.
    """
    L = burn_in_length(n)
    K = int(math.ceil(40.0 * math.log(n)))
    rows = np.zeros((L + n, K + 1))
    coefs = _clamped_ar_coefs(model, n, L)
    order = coefs.shape[1]
    for pos in range(L + n):
        rows[pos, 0] = 1.0
        for j in range(1, min(order, pos) + 1):
            rows[pos, j:] += coefs[pos, j - 1] * rows[pos - j, : K + 1 - j]
    return rows, L, K


def true_covariance(model, n):
    """Exact n x n covariance of the simulated process (dense oracle).

    MA kinds use the closed-form finite moving-average autocovariances; AR
    kinds expand the recursion into a truncated moving average replicating
    the simulator's initialization. Only available at desk scale.
    """
    if n > DENSE_ORACLE_MAX_N:
        raise ValueError(f"dense oracle limited to n <= {DENSE_ORACLE_MAX_N}")
    var = model.innovation_sd ** 2
    if not model.is_ar:
        tgrid = np.arange(1, n + 1) / n
        thetas = [np.ones(n)] + model.ma_coeffs(tgrid)  # theta_0 = 1
        q = len(thetas) - 1
        gamma = np.zeros((n, n))
        for d in range(q + 1):
            diag = np.zeros(n - d)
            for k in range(d, q + 1):
                # Cov(x_i, x_{i-d}) picks up theta_k(t_i) * theta_{k-d}(t_{i-d})
                lhs = thetas[k][d:]
                rhs = thetas[k - d][: n - d]
                diag += lhs * rhs
            idx = np.arange(n - d)
            gamma[idx + d, idx] = var * diag
            gamma[idx, idx + d] = var * diag
        return gamma
    rows, L, K = _ar_ma_rows(model, n)
    # spread rows over absolute innovation indices m = 1-L .. n
    m_count = n + L
    mat = np.zeros((n, m_count))
    for k in range(K + 1):
        r0 = max(0, k - L)
        rsel = np.arange(r0, n)
        mat[rsel, rsel + L - k] = rows[rsel + L, k]
    return var * (mat @ mat.T)


def true_precision(model, n):
    """Numerical inverse of true_covariance with conditioning guards."""
    return invert_covariance(true_covariance(model, n))


def invert_covariance(gamma):
    """Guarded inverse of a symmetric covariance matrix.

    Raises IllConditionedError unless the matrix is positive definite with
    condition number at most 1e12, and NumericalError if the inverse fails
    the residual check max|omega gamma - I| < 1e-8.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0]
    eigs = np.linalg.eigvalsh(gamma)
    if eigs[0] <= 0.0:
        raise IllConditionedError("covariance oracle is not positive definite", cond=np.inf)
    cond = float(eigs[-1] / eigs[0])
    if cond > 1e12:
        raise IllConditionedError(
            f"covariance oracle condition number {cond:.3e} exceeds 1e12", cond=cond
        )
    cho = scipy.linalg.cho_factor(gamma, lower=True)
    omega = scipy.linalg.cho_solve(cho, np.eye(n))
    omega = 0.5 * (omega + omega.T)
    resid = float(np.max(np.abs(omega @ gamma - np.eye(n))))
    if resid >= 1e-8:
        raise NumericalError(f"precision oracle residual {resid:.3e} exceeds 1e-8")
    return omega
