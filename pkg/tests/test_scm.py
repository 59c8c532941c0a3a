import numpy as np
import pytest

from cfcp import (
    InvalidParameterError,
    SynthClassification,
    SynthRegression,
    UnsupportedOperationError,
    counterfactual_features,
    counterfactual_matrices,
    gen_classification,
    gen_regression,
    make_rng,
)


def test_regression_feature_equation():
    scm = SynthRegression()
    assert scm.features(np.zeros(2), 0)[0, 0] == pytest.approx(1.1, abs=1e-15)
    assert scm.features(np.zeros(2), 1)[0, 0] == pytest.approx(2.1, abs=1e-15)


def test_regression_attribute_rate_and_shapes():
    ds = gen_regression(10**5, make_rng(1, "reg"))
    assert ds.X.shape == (10**5, 1) and ds.U.shape == (10**5, 2)
    assert abs(ds.A.mean() - 0.4) < 0.01
    assert ds.domain == (0, 1)


def test_regression_label_equation_residual_has_configured_std():
    ds = gen_regression(10**5, make_rng(2, "reg"))
    x = ds.X[:, 0]
    resid = ds.Y - (0.2 * x**2 + 1.2 * x + 0.2)
    assert abs(resid.mean()) < 0.01
    assert resid.std() == pytest.approx(0.6, abs=0.01)
    var_scm = SynthRegression(label_noise_is_variance=True)
    assert var_scm.label_std == pytest.approx(np.sqrt(0.6))


def test_classification_matrices():
    scm = SynthClassification.sample(make_rng(3, "scm"))
    assert scm.D_U.shape == (10, 10) and scm.W_X.shape == (10, 10) and scm.W_U.shape == (10, 10)
    assert np.linalg.matrix_rank(scm.D_U) == 10
    for M in (scm.D_U, scm.W_X, scm.W_U):
        off = M - np.eye(10)
        assert off.min() >= 0 and off.max() <= 0.2
    assert np.all((scm.w_A[:3] >= 2) & (scm.w_A[:3] <= 2.2))
    assert np.all(scm.w_A[3:] == 0)


def test_classification_noise_free_feature():
    scm = SynthClassification.sample(make_rng(3, "scm"))
    assert np.array_equal(scm.features(np.zeros(10), 1)[0], 0.5 * scm.w_A)


def test_attribute_flip_changes_only_the_support():
    scm = SynthClassification.sample(make_rng(3, "scm"))
    U = make_rng(4, "u").normal(0, 1, (50, 10))
    diff = scm.features(U, 1) - scm.features(U, 0)
    assert np.allclose(diff[:, 3:], 0.0)
    assert np.allclose(diff[:, :3], scm.w_A[:3])


def _independent_sampler(scm, x, u, n, seed):
    # plain numpy reimplementation of the label equation
    gen = np.random.default_rng(seed)
    E = gen.normal(0.0, scm.sigma_logit, (n, scm.K))
    z = (x**3) @ scm.W_X + u @ scm.W_U + E
    p = np.exp(z - z.max(axis=1, keepdims=True))
    p /= p.sum(axis=1, keepdims=True)
    c = p.cumsum(axis=1)
    return (gen.random((n, 1)) > c).sum(axis=1)


def test_label_frequencies_match_independent_sampler():
    scm = SynthClassification.sample(make_rng(5, "scm"))
    n = 10**5
    u = np.full((n, 10), 0.3)
    u[:, 1] = -0.4
    a = 1
    x = scm.features(u, a)
    # compare at one fixed (x, u) so the class distribution is a single vector
    rng = make_rng(6, "lab")
    E = rng.normal(0.0, scm.sigma_logit, (n, scm.K))
    mine = rng.categorical(scm.class_probs(x, u, E))
    ref = _independent_sampler(scm, x, u, n, 0)
    f1 = np.bincount(mine, minlength=10) / n
    f2 = np.bincount(ref, minlength=10) / n
    assert np.max(np.abs(f1 - f2)) < 0.02


def test_classification_dataset_fields():
    scm = SynthClassification.sample(make_rng(7, "scm"))
    ds = gen_classification(2000, scm, make_rng(7, "data"))
    assert ds.task == "classification" and ds.K == 10
    assert ds.E.shape == (2000, 10)
    assert abs(ds.A.mean() - 0.5) < 0.05
    assert ds.Y.min() >= 0 and ds.Y.max() < 10


def test_counterfactual_features_examples():
    scm = SynthRegression()
    assert counterfactual_features(scm, [0, 0], 0)[0] == pytest.approx(1.1)
    assert counterfactual_features(scm, [0, 0], 1)[0] == pytest.approx(2.1)
    with pytest.raises(InvalidParameterError):
        counterfactual_features(scm, [0, 0], 2)
    with pytest.raises(UnsupportedOperationError):
        counterfactual_features(scm, None, 0)


def test_noisy_counterfactual_perturbation_matches_monte_carlo():
    scm = SynthRegression()
    rng = make_rng(8, "u")
    U = rng.normal(0, 1, (10**4, 2))
    A = rng.bernoulli(0.4, 10**4)
    cf, _ = counterfactual_matrices(scm, U, 0.4, make_rng(8, "noise"))
    factual = scm.features(U, A)[:, 0]
    got = np.mean(np.abs(np.where(A == 1, cf[1][:, 0], cf[0][:, 0]) - factual))
    gen = np.random.default_rng(1)
    Ut = U + gen.normal(0, 0.4, U.shape)
    oracle = np.mean(np.abs(scm.features(Ut, A)[:, 0] - factual))
    assert got == pytest.approx(oracle, rel=0.05)


def test_oracle_matrices_reproduce_factual_rows():
    scm = SynthRegression()
    ds = gen_regression(500, make_rng(9, "d"))
    cf, Ut = counterfactual_matrices(scm, ds.U)
    assert Ut is ds.U
    for a in (0, 1):
        rows = ds.A == a
        assert np.array_equal(cf[a][rows], ds.X[rows])


def test_generate_rejects_bad_sizes():
    with pytest.raises(InvalidParameterError):
        SynthRegression().generate(0, make_rng(1, "x"))
    with pytest.raises(InvalidParameterError):
        SynthClassification.sample(make_rng(1, "x"), r=11)
