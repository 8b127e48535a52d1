# Banded precision assembly, matvec, dense forms, and the operator-norm probe.

import csv

import numpy as np
import pytest

from lsprec.errors import NumericalError, PowerIterationError
from lsprec.precision import (
    DENSE_MAX_N,
    PrecisionEstimate,
    dense,
    dense_factor,
    estimate_precision,
    export_banded_csv,
    matvec,
    operator_norm_error,
)
from lsprec.procsim import (
    ModelSpec,
    TimeSeriesSample,
    derive_seed,
    make_rng,
    simulate,
    true_precision,
)
from lsprec.sievebasis import BasisSet

WN = ModelSpec(kind="WhiteNoise")


def identity_estimate(n, b):
    return PrecisionEstimate(n=n, b=b, phi_offdiag=np.zeros((n, b)), dinv=np.ones(n))


def test_zero_coefficients_give_identity():
    est = identity_estimate(12, 3)
    assert np.array_equal(dense(est), np.eye(12))
    v = np.arange(12.0)
    assert np.array_equal(matvec(est, v), v)


def test_white_noise_error_distribution():
    basis = BasisSet(family="Fourier", c=2)
    eye = np.eye(500)
    errs = np.array([
        operator_norm_error(
            estimate_precision(simulate(WN, 500, derive_seed(1234, r)), 2, 2, basis).estimate,
            eye,
        )
        for r in range(200)
    ])
    assert errs.mean() < 0.5
    assert int((errs < 0.8).sum()) >= 185


def test_stationary_ar_error_small_with_constant_basis():
    m = ModelSpec(kind="StatAR1")
    truth = true_precision(m, 2000)
    basis = BasisSet(family="Fourier", c=1)
    for r in range(10):
        s = simulate(m, 2000, derive_seed(4321, r))
        bundle = estimate_precision(s, 1, 1, basis)
        assert operator_norm_error(bundle.estimate, truth) < 0.25


def test_matvec_matches_dense():
    s = simulate(ModelSpec(kind="TvMA2"), 64, 99)
    est = estimate_precision(s, 2, 3, BasisSet(family="Fourier", c=3)).estimate
    full = dense(est)
    rng = make_rng(7)
    for v in [np.ones(64), np.eye(64)[0], rng.standard_normal(64)]:
        ref = full @ v
        assert np.linalg.norm(matvec(est, v) - ref) <= 1e-12 * np.linalg.norm(ref)


def test_operator_norm_error_exact_cases():
    est = identity_estimate(10, 2)
    assert operator_norm_error(est, np.eye(10)) == 0.0
    assert operator_norm_error(est, 2.0 * np.eye(10)) == pytest.approx(1.0, abs=1e-9)
    # mixed-sign spectrum of the difference
    truth = np.diag(np.linspace(-0.5, 2.5, 10))
    gap = np.max(np.abs(1.0 - np.diag(truth)))
    assert operator_norm_error(est, truth) == pytest.approx(gap, rel=1e-6)


def test_estimate_is_positive_definite():
    s = simulate(ModelSpec(kind="TvAR2"), 300, 17)
    est = estimate_precision(s, 3, 3, BasisSet(family="Fourier", c=3)).estimate
    rng = make_rng(1001)
    v = rng.standard_normal((1000, 300))
    quad = np.einsum("ki,ki->k", v, np.stack([matvec(est, row) for row in v]))
    assert np.all(quad > 0.0)


def test_dense_is_banded_exactly():
    s = simulate(ModelSpec(kind="TvAR1"), 120, 5)
    bundle = estimate_precision(s, 3, 4, BasisSet(family="LegendreShifted", c=4))
    full = dense(bundle.estimate)
    i, j = np.ogrid[:120, :120]
    assert np.all(full[np.abs(i - j) > 3] == 0.0)
    assert np.array_equal(full, full.T)


def test_scale_equivariance():
    s = simulate(WN, 400, 55)
    doubled = TimeSeriesSample(values=2.0 * s.values, n=400, model=WN, seed=55)
    basis = BasisSet(family="Fourier", c=2)
    b1 = estimate_precision(s, 2, 2, basis)
    b2 = estimate_precision(doubled, 2, 2, basis)
    assert b1.variances.clamp_count == 0 and b2.variances.clamp_count == 0
    assert np.allclose(b2.estimate.phi_offdiag, b1.estimate.phi_offdiag, rtol=1e-10, atol=1e-12)
    assert np.allclose(b2.estimate.dinv, 0.25 * b1.estimate.dinv, rtol=1e-10)


def test_factorization_consistency():
    s = simulate(ModelSpec(kind="TvMA1"), 128, 3)
    est = estimate_precision(s, 2, 2, BasisSet(family="Fourier", c=2)).estimate
    phi = dense_factor(est)
    assert np.array_equal(np.diag(phi), np.ones(128))
    rebuilt = phi.T @ (est.dinv[:, None] * phi)
    assert np.allclose(rebuilt, dense(est), atol=1e-12)


def test_dense_size_cap():
    est = identity_estimate(DENSE_MAX_N + 1, 1)
    with pytest.raises(NumericalError):
        dense(est)
    with pytest.raises(NumericalError):
        dense_factor(est)


def test_export_banded_csv_roundtrip(tmp_path):
    s = simulate(ModelSpec(kind="TvMA1"), 50, 21)
    est = estimate_precision(s, 2, 2, BasisSet(family="Fourier", c=2)).estimate
    path = tmp_path / "factor.csv"
    export_banded_csv(est, path)
    phi = np.zeros((50, 50))
    dinv = np.zeros(50)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        assert header == ["matrix", "i", "j", "value"]
        for name, i, j, value in reader:
            if name == "phi":
                phi[int(i) - 1, int(j) - 1] = float(value)
            else:
                assert name == "dinv" and i == j
                dinv[int(i) - 1] = float(value)
    # repr round-trips float64 exactly
    assert np.array_equal(phi, dense_factor(est))
    assert np.array_equal(dinv, est.dinv)


def test_validation_errors():
    with pytest.raises(ValueError):
        PrecisionEstimate(n=5, b=2, phi_offdiag=np.zeros((4, 2)), dinv=np.ones(5))
    with pytest.raises(ValueError):
        PrecisionEstimate(n=5, b=2, phi_offdiag=np.zeros((5, 2)), dinv=np.zeros(5))
    bad = np.zeros((5, 2))
    bad[0, 0] = 0.5  # row 1 has no preceding observation
    with pytest.raises(ValueError):
        PrecisionEstimate(n=5, b=2, phi_offdiag=bad, dinv=np.ones(5))


def test_power_iteration_error_attributes():
    err = PowerIterationError("no convergence", last_estimate=1.5, iterations=10_000)
    assert err.last_estimate == 1.5 and err.iterations == 10_000
