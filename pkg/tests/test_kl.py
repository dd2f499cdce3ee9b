import logging

import numpy as np
import pytest

from ensemble import (
    CovMatrix,
    center,
    draw_samples,
    evaluate_ensemble,
    sample_covariance,
    samples_from_rule,
    synthesize_covariance
)
from errors import DataQualityError, DegenerateVarianceError, EnsembleError, OffGridError
from kl import (
    KLSurrogate,
    build_kl_surrogate,
    fit_mode_surrogates,
    kl_modes,
    nkl_for_ratio,
    normalized_eigenvalues,
    nystrom_eig,
    spectrum_convergence,
    spectrum_table,
    truncated_pointwise_variance,
    truncated_variance_curves,
    variance_ratio
)
from pce import nisp_project, total_degree_basis
from quadrature import gauss_legendre, tensor_rule, trapezoid_rule


class SineModel:
    """f(t, xi) = xi_1 sin t, a rank-one process."""

    name = "sine"
    param_names = ("a",)
    vectorized = True
    dim = 1

    def evaluate(self, xi, t):
        return xi[0] * np.sin(t)

    def evaluate_many(self, xis, t):
        return np.atleast_2d(xis)[:, [0]] * np.sin(np.asarray(t, dtype=float))[None, :]


@pytest.fixture(scope="module")
def mc_spectrum(mc_ensemble):
    cov = sample_covariance(center(mc_ensemble))
    return cov, nystrom_eig(cov, mc_ensemble.time_rule, method="dense")


def test_eigenvectors_are_w_orthonormal(mc_spectrum, coarse_rule):
    _, s = mc_spectrum
    E = s.eigenvectors
    gram = E.T @ (E * coarse_rule.weights[:, None])
    np.testing.assert_allclose(gram, np.eye(s.count), atol=1e-8)


def test_eigenpairs_solve_the_weighted_problem(mc_spectrum, coarse_rule):
    cov, s = mc_spectrum
    lam1 = s.eigenvalues[0]
    for i in range(5):
        e = s.eigenvectors[:, i]
        residual = cov.K @ (coarse_rule.weights * e) - s.eigenvalues[i] * e
        assert np.max(np.abs(residual)) <= 1e-8 * lam1


def test_eigenvalues_sum_to_weighted_trace(mc_spectrum):
    cov, s = mc_spectrum
    assert np.all(np.diff(s.eigenvalues) <= 0)
    assert s.eigenvalues.sum() == pytest.approx(s.trace, rel=1e-8)
    assert s.trace == pytest.approx(float(np.sum(s.weights * np.diag(cov.K))))


def test_largest_entry_of_each_eigenvector_is_positive(mc_spectrum):
    _, s = mc_spectrum
    for i in range(10):
        e = s.eigenvectors[:, i]
        assert e[np.argmax(np.abs(e))] > 0


def test_lanczos_matches_dense(mc_spectrum, coarse_rule):
    cov, dense = mc_spectrum
    sparse = nystrom_eig(cov, coarse_rule, k=10, method="lanczos")
    assert sparse.method == "lanczos"
    assert sparse.count == 10
    np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues[:10], atol=1e-8 * dense.eigenvalues[0])
    assert nystrom_eig(cov, coarse_rule, k=5).method == "lanczos"
    assert nystrom_eig(cov, coarse_rule, k=150).method == "dense"


def test_lanczos_failure_falls_back_to_dense(mc_spectrum, coarse_rule, monkeypatch, caplog):
    import kl.spectrum
    from scipy.sparse.linalg import ArpackError

    def stalled(*args, **kwargs):
        raise ArpackError(-9999, {})

    monkeypatch.setattr(kl.spectrum, "eigsh", stalled)
    cov, dense = mc_spectrum
    with caplog.at_level(logging.WARNING):
        s = nystrom_eig(cov, coarse_rule, k=10, method="lanczos")
    assert s.method == "dense"
    np.testing.assert_allclose(s.eigenvalues, dense.eigenvalues[:10], atol=1e-10 * dense.eigenvalues[0])
    assert "falling back to dense" in caplog.text


def test_asymmetric_covariance_is_rejected():
    rule = trapezoid_rule([0.0, 1.0])
    with pytest.raises(DataQualityError):
        nystrom_eig(CovMatrix(K=np.array([[1.0, 0.5], [0.0, 1.0]]), estimator="test"), rule)


def test_negative_eigenvalue_beyond_tolerance_is_rejected():
    rule = trapezoid_rule([0.0, 1.0])
    with pytest.raises(DataQualityError):
        nystrom_eig(CovMatrix(K=np.diag([1.0, -0.5]), estimator="test"), rule)


def test_round_off_negative_eigenvalues_are_clipped(caplog):
    rule = trapezoid_rule([0.0, 1.0])
    with caplog.at_level(logging.INFO):
        s = nystrom_eig(CovMatrix(K=np.diag([1.0, -1e-12]), estimator="test"), rule)
    assert np.all(s.eigenvalues >= 0)
    assert s.clipped == pytest.approx(0.5e-12)
    assert "Clipped" in caplog.text


def test_variance_ratio_and_truncation_level(mc_spectrum):
    _, s = mc_spectrum
    ratios = [variance_ratio(s, n) for n in range(1, 12)]
    assert np.all(np.diff(ratios) >= 0)
    assert variance_ratio(s, s.count) == pytest.approx(1.0, abs=1e-8)
    n = nkl_for_ratio(s, 0.99)
    assert variance_ratio(s, n) >= 0.99
    assert n == 1 or variance_ratio(s, n - 1) < 0.99


def test_variance_ratio_of_zero_process_is_degenerate():
    rule = trapezoid_rule([0.0, 1.0])
    s = nystrom_eig(CovMatrix(K=np.zeros((2, 2)), estimator="test"), rule)
    with pytest.raises(DegenerateVarianceError):
        variance_ratio(s, 1)
    with pytest.raises(DegenerateVarianceError):
        normalized_eigenvalues(s)


def test_truncated_variance_with_all_modes_is_the_diagonal(mc_spectrum):
    cov, s = mc_spectrum
    diag = np.diag(cov.K)
    np.testing.assert_allclose(truncated_pointwise_variance(s, s.count), diag, rtol=1e-8, atol=1e-10 * diag.max())
    curves = np.array([truncated_pointwise_variance(s, n) for n in (1, 2, 4, 8)])
    assert np.all(np.diff(curves, axis=0) >= -1e-15)
    assert truncated_pointwise_variance(s, 3, m=10) == pytest.approx(truncated_pointwise_variance(s, 3)[10])


def test_truncated_variance_curves_frame(mc_spectrum, coarse_rule):
    cov, s = mc_spectrum
    frame = truncated_variance_curves(s, coarse_rule, [2, 8], cov)
    assert list(frame.columns) == ["t", "D", "D_2", "D_8"]
    assert len(frame) == coarse_rule.size


def test_mode_variances_equal_eigenvalues(mc_ensemble, mc_spectrum):
    _, s = mc_spectrum
    modes = kl_modes(center(mc_ensemble), s, 5)
    assert modes.modes.shape == (5, 400)
    np.testing.assert_allclose(modes.modes.mean(axis=1), 0.0, atol=1e-10 * np.sqrt(s.eigenvalues[0]))
    np.testing.assert_allclose(modes.modes.var(axis=1, ddof=1) / s.eigenvalues[:5], 1.0, rtol=1e-8)


def test_rank_one_process_has_one_mode():
    rule = trapezoid_rule(np.linspace(0.0, 3.0, 61))
    e = center(evaluate_ensemble(SineModel(), draw_samples(1, 300, 2), rule))
    s = nystrom_eig(sample_covariance(e), rule)
    assert s.eigenvalues[1] <= 1e-10 * s.eigenvalues[0]
    mode = kl_modes(e, s, 1).modes[0]
    rho = np.corrcoef(mode, e.samples.draws[:, 0])[0, 1]
    assert abs(rho) >= 0.999


def test_surrogate_with_all_modes_reproduces_training_values(linear_model, coarse_rule):
    e = center(evaluate_ensemble(linear_model, samples_from_rule(tensor_rule(gauss_legendre(3), 2)), coarse_rule))
    s = nystrom_eig(sample_covariance(e), coarse_rule)
    modes = kl_modes(e, s, s.count)
    surrogate = build_kl_surrogate(e, s, fit_mode_surrogates(modes, e.samples, total_degree_basis(2, 1), "nisp"))
    assert surrogate.nkl == s.count
    np.testing.assert_allclose(
        surrogate.evaluate_many(e.samples.draws, coarse_rule.nodes), e.raw_values().T, atol=1e-8
    )


def test_oscillator_surrogate_holdout_error(oscillator, tensor_ensemble, coarse_rule):
    e = center(tensor_ensemble)
    s = nystrom_eig(sample_covariance(e), coarse_rule, k=8)
    surrogate = build_kl_surrogate(e, s, fit_mode_surrogates(kl_modes(e, s, 8), e.samples, total_degree_basis(3, 4), "nisp"))
    xis = draw_samples(3, 500, 99).draws
    truth = oscillator.evaluate_many(xis, coarse_rule.nodes)
    approx = surrogate.evaluate_many(xis, coarse_rule.nodes)
    rms = np.sqrt(np.mean((approx - truth) ** 2)) / np.sqrt(np.mean(truth ** 2))
    assert rms <= 0.05


def test_surrogate_is_defined_on_grid_nodes_only(tensor_ensemble, coarse_rule):
    e = center(tensor_ensemble)
    s = nystrom_eig(sample_covariance(e), coarse_rule, k=4)
    surrogate = build_kl_surrogate(e, s, fit_mode_surrogates(kl_modes(e, s, 4), e.samples, total_degree_basis(3, 2), "nisp"))
    assert isinstance(surrogate, KLSurrogate)
    assert surrogate.name == "kl-surrogate-oscillator"
    xi = np.zeros(3)
    full = surrogate.evaluate(xi, coarse_rule.nodes)
    np.testing.assert_allclose(surrogate.evaluate(xi, [0.0, 0.5]), full[[0, 10]])
    with pytest.raises(OffGridError):
        surrogate.evaluate(xi, [0.025])


def test_pointwise_expansion_trace_identity(tensor_ensemble, coarse_rule):
    expansion = nisp_project(tensor_ensemble.values, tensor_ensemble.samples.as_rule(), total_degree_basis(3, 4))
    s = nystrom_eig(synthesize_covariance(expansion), coarse_rule)
    integrated = float(np.dot(coarse_rule.weights, expansion.variance()))
    assert s.eigenvalues.sum() == pytest.approx(integrated, rel=1e-6)


def test_spectrum_table_and_normalizations(mc_spectrum):
    _, s = mc_spectrum
    table = spectrum_table(s)
    assert list(table.columns) == ["i", "lambda", "normalized", "ratio"]
    assert table["normalized"].iloc[0] == 1.0
    assert table["ratio"].iloc[-1] == pytest.approx(1.0, abs=1e-8)
    assert normalized_eigenvalues(s, "trace").sum() == pytest.approx(1.0, abs=1e-8)


def test_spectrum_table_trace_normalization(mc_spectrum):
    _, s = mc_spectrum
    table = spectrum_table(s, "trace")
    assert table["normalized"].sum() == pytest.approx(1.0, abs=1e-8)
    assert table["normalized"].iloc[0] < 1.0
    with pytest.raises(EnsembleError):
        spectrum_table(s, "largest")


def test_spectrum_convergence_frame(mc_ensemble):
    frame = spectrum_convergence(mc_ensemble, [100, 200, 400], n_eigs=3)
    assert list(frame.columns) == ["N", "i", "normalized"]
    assert len(frame) == 9
    np.testing.assert_allclose(frame.loc[frame["i"] == 1, "normalized"], 1.0)
    assert sorted(frame["N"].unique()) == [100, 200, 400]
