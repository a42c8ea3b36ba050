import numpy as np
import pytest
from hypothesis import given, strategies as st

from gcca.baselines import cca_two_view, maxvar
from gcca.errors import RankError
from gcca.linalg import orth, subspace_angle
from gcca.model import ModelDims, add_noise, synthesize
from gcca.racing import RacingConfig, racing


def test_cca_self():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((12, 4))
    res = cca_two_view(X, X, 4)
    np.testing.assert_allclose(res.correlations, 1.0, atol=1e-10)


def test_cca_explicit_intersection():
    E = np.eye(3)
    res = cca_two_view(E[:, :2], E[:, 1:], 1)
    assert res.correlations[0] == pytest.approx(1.0)
    assert subspace_angle(res.M_hat, E[:, 1:2]) <= 1e-12


def test_cca_noiseless_synthetic():
    model, views = synthesize(ModelDims.uniform(60, 5, 20, 2), 0)
    X1, X2 = views.X
    res = cca_two_view(X1, X2, 5, signal_ranks=(25, 25))
    np.testing.assert_allclose(res.correlations, 1.0, atol=1e-8)
    assert subspace_angle(res.M_hat, orth(model.M)) <= 1e-6
    for X, Q in ((X1, res.Q1), (X2, res.Q2)):
        Z = X @ Q
        assert np.linalg.norm(Z.T @ Z - np.eye(5)) <= 1e-8
    # Noiseless agreement up to sign of each canonical pair.
    Z1, Z2 = X1 @ res.Q1, X2 @ res.Q2
    for k in range(5):
        assert min(np.linalg.norm(Z1[:, k] - Z2[:, k]), np.linalg.norm(Z1[:, k] + Z2[:, k])) <= 1e-6


def test_cca_rank_error():
    E = np.eye(4)
    with pytest.raises(RankError):
        cca_two_view(E[:, :1], E[:, 1:3], 2)


@given(seed=st.integers(0, 2**31))
def test_cca_mixing_invariance(seed):
    rng = np.random.default_rng(seed)
    X1 = rng.standard_normal((15, 4))
    X2 = rng.standard_normal((15, 5))
    base = cca_two_view(X1, X2, 3)
    A1 = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    A2 = rng.standard_normal((5, 5)) + 4 * np.eye(5)
    mixed = cca_two_view(X1 @ A1, X2 @ A2, 3)
    np.testing.assert_allclose(base.correlations, mixed.correlations, atol=1e-8)
    assert np.all(np.diff(base.correlations) <= 1e-12)
    assert np.all((base.correlations >= 0) & (base.correlations <= 1 + 1e-10))


def test_maxvar_identical_views():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((20, 3))
    X = M @ rng.standard_normal((3, 6))
    res = maxvar([X, X, X], 3, signal_ranks=[3, 3, 3])
    assert subspace_angle(res.M_hat, orth(M)) <= 1e-12


def test_maxvar_noiseless_identifiable():
    model, views = synthesize(ModelDims.uniform(60, 5, 20, 3), 2)
    res = maxvar(views, 5)
    assert subspace_angle(res.M_hat, orth(model.M)) <= 1e-6
    np.testing.assert_allclose(res.eigenvalues[:5], 3.0, atol=1e-8)
    # Eigengap between the common block and the rest.
    assert res.eigenvalues[5] < 3.0 - 1e-3
    assert np.all((res.eigenvalues >= -1e-12) & (res.eigenvalues <= 3 + 1e-12))


def test_maxvar_full_whitening_fails_on_low_rank():
    model, views = synthesize(ModelDims.uniform(100, 3, 40, 6), 3, mode="low_rank")
    noisy, _ = add_noise(views, 20.0, 4)
    truth = orth(model.M)
    full = maxvar(noisy, 3, whitening="full")
    sig = maxvar(noisy, 3, whitening="signal")
    assert subspace_angle(full.M_hat, truth) > 0.5
    assert subspace_angle(sig.M_hat, truth) < 0.5


def test_maxvar_errors():
    X = np.eye(5)[:, :2]
    with pytest.raises(RankError):
        maxvar([X, X], 3, signal_ranks=[2, 2])
    with pytest.raises(ValueError):
        maxvar([X, X], 1)


@given(seed=st.integers(0, 2**31))
def test_methods_agree_on_two_views(seed):
    rng = np.random.default_rng(seed)
    R, L = int(rng.integers(1, 4)), int(rng.integers(0, 4))
    model, views = synthesize(ModelDims.uniform(R + 2 * L + 2, R, L, 2), seed)
    ranks = [R + L] * 2
    a = racing(views, RacingConfig(R, [L, L])).M_hat
    b = maxvar(views, R, signal_ranks=ranks).M_hat
    c = cca_two_view(*views.X, R, signal_ranks=ranks).M_hat
    for x, y in ((a, b), (a, c), (b, c)):
        assert subspace_angle(x, y) <= 1e-6
