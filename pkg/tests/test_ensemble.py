import numpy as np
import pytest

from ensemble import (
    QUADRATURE,
    SampleSet,
    center,
    draw_samples,
    evaluate_batch,
    evaluate_ensemble,
    pointwise_variance,
    restrict,
    sample_covariance,
    samples_from_rule,
    subsample
)
from errors import EnsembleError, ModelError, ModelEvaluationError
from quadrature import gauss_legendre, tensor_rule


class FlakyModel:
    """Fails whenever the first parameter exceeds 0.5."""

    name = "flaky"
    param_names = ("a", "b")
    vectorized = False
    dim = 2

    def evaluate(self, xi, t):
        if xi[0] > 0.5:
            raise ModelError("diverged")
        return np.full(len(t), xi[1])


def test_draw_samples_is_reproducible():
    a, b = draw_samples(3, 50, 42), draw_samples(3, 50, 42)
    np.testing.assert_array_equal(a.draws, b.draws)
    assert not np.array_equal(a.draws, draw_samples(3, 50, 43).draws)
    assert np.all(np.abs(a.draws) <= 1.0)
    assert a.averaging_weights().sum() == pytest.approx(1.0)


def test_draw_samples_needs_a_sample():
    with pytest.raises(EnsembleError):
        draw_samples(3, 0, 1)


def test_quadrature_sample_set_validates_weights():
    with pytest.raises(EnsembleError):
        SampleSet(dim=1, draws=np.zeros((2, 1)), scheme=QUADRATURE, weights=np.array([0.5, 0.6]))
    with pytest.raises(EnsembleError):
        SampleSet(dim=2, draws=np.zeros((2, 1)))


def test_samples_from_rule_round_trips_to_the_rule():
    rule = tensor_rule(gauss_legendre(3), 2)
    samples = samples_from_rule(rule)
    assert samples.is_quadrature
    back = samples.as_rule()
    np.testing.assert_array_equal(back.nodes, rule.nodes)
    assert back.rule_id == rule.rule_id
    assert back.exactness == 5


def test_monte_carlo_samples_are_not_a_rule():
    with pytest.raises(EnsembleError):
        draw_samples(2, 10, 0).as_rule()


def test_evaluate_ensemble_shape_and_mean(mc_ensemble, coarse_rule):
    assert mc_ensemble.values.shape == (coarse_rule.size, 400)
    np.testing.assert_allclose(mc_ensemble.mean, mc_ensemble.values.mean(axis=1), rtol=1e-12, atol=1e-15)
    assert mc_ensemble.param_names == ("alpha", "beta", "ell")


def test_center_once_only(mc_ensemble):
    centered = center(mc_ensemble)
    np.testing.assert_allclose(centered.values.mean(axis=1), 0.0, atol=1e-13)
    np.testing.assert_allclose(centered.raw_values(), mc_ensemble.values, atol=1e-13)
    with pytest.raises(EnsembleError):
        center(centered)


def test_sample_covariance_needs_centering(mc_ensemble):
    with pytest.raises(EnsembleError):
        sample_covariance(mc_ensemble)


def test_sample_covariance_diagonal_is_pointwise_variance(mc_ensemble, tensor_ensemble):
    for e in (mc_ensemble, tensor_ensemble):
        cov = sample_covariance(center(e))
        np.testing.assert_array_equal(cov.K, cov.K.T)
        np.testing.assert_allclose(np.diag(cov.K), pointwise_variance(e), rtol=1e-12, atol=1e-16)
    assert sample_covariance(center(mc_ensemble)).estimator == "sample-400"
    assert sample_covariance(center(tensor_ensemble)).estimator == "tensor-gl5-d3"


def test_weighted_trace_agrees_between_monte_carlo_and_quadrature(oscillator, coarse_rule):
    mc = evaluate_ensemble(oscillator, draw_samples(3, 40000, 1), coarse_rule)
    quad = evaluate_ensemble(oscillator, samples_from_rule(tensor_rule(gauss_legendre(10), 3)), coarse_rule)
    mc_trace = sample_covariance(center(mc)).weighted_trace(coarse_rule.weights)
    quad_trace = sample_covariance(center(quad)).weighted_trace(coarse_rule.weights)
    assert mc_trace == pytest.approx(quad_trace, rel=0.02)


def test_model_failure_names_the_sample():
    samples = draw_samples(2, 40, 5)
    expected = int(np.flatnonzero(samples.draws[:, 0] > 0.5)[0])
    with pytest.raises(ModelEvaluationError) as info:
        evaluate_batch(FlakyModel(), samples.draws, np.linspace(0, 1, 3), max_workers=2)
    assert info.value.index == expected
    assert info.value.xi == pytest.approx(samples.draws[expected].tolist())
    assert info.value.exit_code == 3


def test_evaluate_ensemble_checks_dimension(oscillator, coarse_rule):
    with pytest.raises(EnsembleError):
        evaluate_ensemble(oscillator, draw_samples(2, 10, 0), coarse_rule)


def test_subsample_recomputes_mean(mc_ensemble):
    sub = subsample(center(mc_ensemble), 50)
    assert sub.N == 50 and not sub.centered
    np.testing.assert_allclose(sub.values, mc_ensemble.values[:, :50], atol=1e-13)
    np.testing.assert_allclose(sub.mean, mc_ensemble.values[:, :50].mean(axis=1), atol=1e-13)
    with pytest.raises(EnsembleError):
        subsample(mc_ensemble, 401)


def test_restrict_to_leading_sub_grid(mc_ensemble):
    assert restrict(mc_ensemble, mc_ensemble.time_rule) is mc_ensemble
    sub_rule = mc_ensemble.time_rule.restrict(5.0)
    sub = restrict(mc_ensemble, sub_rule)
    assert sub.n_quad == sub_rule.size == 101
    np.testing.assert_array_equal(sub.values, mc_ensemble.values[:101])


def test_quadrature_subsets_are_refused(tensor_ensemble):
    with pytest.raises(EnsembleError):
        subsample(tensor_ensemble, 10)
