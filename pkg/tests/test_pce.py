import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ensemble import make_rng
from errors import BasisError, ConfigError, DegenerateVarianceError
from pce import (
    CSConfig,
    PCExpansion,
    basis_from_indices,
    basis_size,
    cross_validate_tau,
    cs_fit,
    cs_fit_many,
    index_set_Ij,
    index_set_Ki,
    legendre_eval,
    nisp_project,
    pce_variance_split,
    project_l1_ball,
    psi_eval,
    total_degree_basis
)
from quadrature import gauss_legendre, tensor_rule


def test_basis_size_formula():
    assert basis_size(3, 4) == 35
    assert basis_size(8, 3) == 165
    assert total_degree_basis(3, 4).size == 35


def test_basis_ordering_is_graded_with_first_variable_first():
    basis = total_degree_basis(2, 2)
    np.testing.assert_array_equal(basis.indices, [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]])
    np.testing.assert_array_equal(basis.degrees, [0, 1, 1, 2, 2, 2])


def test_basis_norms():
    basis = total_degree_basis(2, 3)
    row = int(np.flatnonzero((basis.indices == [2, 1]).all(axis=1))[0])
    assert basis.norms[row] == pytest.approx(1 / 15)
    assert basis.norms[0] == 1.0


def test_basis_cap():
    with pytest.raises(BasisError):
        total_degree_basis(8, 10, cap=1000)
    with pytest.raises(BasisError):
        total_degree_basis(0, 2)


def test_legendre_basis_is_orthogonal_under_uniform_measure():
    basis = total_degree_basis(2, 4)
    rule = tensor_rule(gauss_legendre(5), 2)
    psi = basis.evaluate(rule.nodes)
    gram = psi.T @ (psi * rule.weights[:, None])
    np.testing.assert_allclose(gram, np.diag(basis.norms), atol=1e-13)


@given(st.integers(min_value=0, max_value=6), st.floats(min_value=-1, max_value=1))
def test_legendre_eval_matches_bonnet_recursion(n, x):
    p_prev, p = 1.0, x
    if n == 0:
        expected = 1.0
    else:
        for k in range(1, n):
            p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        expected = p
    assert legendre_eval(n, x) == pytest.approx(expected, abs=1e-12)


def test_psi_eval_is_a_product():
    assert psi_eval((2, 1), (0.5, 0.3)) == pytest.approx(((3 * 0.25 - 1) / 2) * 0.3)
    basis = total_degree_basis(2, 3)
    row = int(np.flatnonzero((basis.indices == [2, 1]).all(axis=1))[0])
    assert basis.evaluate(np.array([[0.5, 0.3]]))[0, row] == pytest.approx(psi_eval((2, 1), (0.5, 0.3)))


def test_basis_from_indices_restores_order():
    basis = total_degree_basis(3, 2)
    again = basis_from_indices(basis.indices.tolist())
    assert again.order == 2 and again.dim == 3
    np.testing.assert_array_equal(again.norms, basis.norms)


def test_nisp_recovers_polynomial_coefficients():
    basis = total_degree_basis(3, 3)
    rule = tensor_rule(gauss_legendre(5), 3)
    c_true = np.zeros(basis.size)
    c_true[[0, 1, 7, 12]] = [1.0, 2.0, -0.5, 0.25]
    values = basis.evaluate(rule.nodes) @ c_true
    exp = nisp_project(values, rule, basis)
    np.testing.assert_allclose(exp.coeffs, c_true, atol=1e-11)
    assert exp.mean() == pytest.approx(1.0)
    assert exp.variance() == pytest.approx(np.sum(c_true[1:] ** 2 * basis.norms[1:]))


def test_nisp_projects_stacked_values():
    basis = total_degree_basis(2, 2)
    rule = tensor_rule(gauss_legendre(3), 2)
    psi = basis.evaluate(rule.nodes)
    C = np.arange(3 * basis.size, dtype=float).reshape(3, basis.size)
    exp = nisp_project(C @ psi.T, rule, basis)
    assert exp.stacked
    np.testing.assert_allclose(exp.coeffs, C, atol=1e-9)
    np.testing.assert_allclose(exp.row(1).coeffs, C[1], atol=1e-9)


def test_nisp_warns_when_rule_is_not_exact_enough(caplog):
    basis = total_degree_basis(2, 3)
    rule = tensor_rule(gauss_legendre(2), 2)
    with caplog.at_level(logging.WARNING):
        nisp_project(np.ones(rule.size), rule, basis)
    assert "exact to degree 3" in caplog.text


def test_nisp_rejects_wrong_value_count():
    basis = total_degree_basis(2, 2)
    with pytest.raises(BasisError):
        nisp_project(np.ones(4), tensor_rule(gauss_legendre(3), 2), basis)


@given(
    st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=25),
    st.floats(min_value=0.0, max_value=30.0),
)
def test_l1_projection_properties(v, tau):
    v = np.array(v)
    x = project_l1_ball(v, tau)
    assert np.abs(x).sum() <= tau * (1 + 1e-9) + 1e-12
    assert np.all(x * v >= 0)
    np.testing.assert_allclose(project_l1_ball(x, tau), x, atol=1e-9)
    if np.abs(v).sum() <= tau:
        np.testing.assert_array_equal(x, v)


@given(st.lists(st.floats(min_value=-10, max_value=10), min_size=2, max_size=15), st.data())
def test_l1_projection_is_closest_point(v, data):
    v = np.array(v)
    tau = data.draw(st.floats(min_value=0.01, max_value=float(max(np.abs(v).sum(), 0.02))))
    x = project_l1_ball(v, tau)
    rng = np.random.default_rng(len(v))
    for _ in range(20):
        y = project_l1_ball(rng.normal(size=v.size) * 5, tau)
        assert np.linalg.norm(v - x) <= np.linalg.norm(v - y) + 1e-9


def test_cs_fit_recovers_planted_sparse_expansion():
    basis = total_degree_basis(3, 4)
    xis = make_rng(3).uniform(-1, 1, size=(60, 3))
    c_true = np.zeros(basis.size)
    c_true[[0, 2, 9, 20]] = [0.8, -1.5, 0.6, 0.3]
    values = basis.evaluate(xis) @ c_true
    exp = cs_fit(xis, values, basis, CSConfig(tau=float(np.abs(c_true).sum())))
    np.testing.assert_allclose(exp.coeffs, c_true, atol=1e-4)
    assert exp.info["converged"]
    assert exp.info["method"] == "cs"


def test_cs_fit_with_zero_radius_is_zero():
    basis = total_degree_basis(2, 2)
    xis = make_rng(1).uniform(-1, 1, size=(20, 2))
    exp = cs_fit(xis, np.ones(20), basis, CSConfig(tau=0.0))
    np.testing.assert_array_equal(exp.coeffs, 0.0)


def test_cross_validation_recovers_noiseless_polynomial():
    basis = total_degree_basis(2, 3)
    xis = make_rng(4).uniform(-1, 1, size=(60, 2))
    c_true = np.zeros(basis.size)
    c_true[[0, 1, 5, 8]] = [0.5, 1.0, -0.7, 0.2]
    values = basis.evaluate(xis) @ c_true
    cfg = CSConfig(seed=2)
    tau = cross_validate_tau(xis, values, basis, cfg)
    assert tau >= np.abs(c_true).sum()
    exp = cs_fit(xis, values, basis, cfg)
    np.testing.assert_allclose(exp.coeffs, c_true, atol=1e-6)


def test_cross_validation_is_deterministic():
    basis = total_degree_basis(2, 2)
    xis = make_rng(8).uniform(-1, 1, size=(40, 2))
    values = np.sin(2 * xis[:, 0]) + xis[:, 1] ** 3
    cfg = CSConfig(seed=5)
    assert cross_validate_tau(xis, values, basis, cfg) == cross_validate_tau(xis, values, basis, cfg)


def test_cross_validation_of_zero_data_gives_zero_radius():
    basis = total_degree_basis(2, 2)
    xis = make_rng(8).uniform(-1, 1, size=(30, 2))
    assert cross_validate_tau(xis, np.zeros(30), basis, CSConfig()) == 0.0


def test_cross_validated_fit_does_not_overfit_noise():
    basis = total_degree_basis(2, 2)
    rng = make_rng(12)
    xis, hold = rng.uniform(-1, 1, size=(200, 2)), rng.uniform(-1, 1, size=(400, 2))
    y, y_hold = rng.normal(size=200), rng.normal(size=400)
    exp = cs_fit(xis, y, basis, CSConfig(seed=1))
    holdout = np.mean((exp.evaluate(hold) - y_hold) ** 2)
    assert holdout <= 1.1 * np.mean(y_hold ** 2)


def test_cross_validation_needs_enough_samples():
    basis = total_degree_basis(2, 1)
    xis = make_rng(0).uniform(-1, 1, size=(3, 2))
    with pytest.raises(BasisError):
        cs_fit(xis, np.ones(3), basis, CSConfig(cv_folds=5))


def test_cs_fit_many_calibrated_once_scales_with_proxy():
    basis = total_degree_basis(2, 2)
    xis = make_rng(6).uniform(-1, 1, size=(50, 2))
    f = 1.0 + xis[:, 0] - 0.5 * xis[:, 0] * xis[:, 1]
    scales = np.array([1.0, 2.0, 3.0, 4.0])
    exp = cs_fit_many(xis, scales[:, None] * f[None, :], basis, CSConfig(calibration="once"))
    taus = np.array(exp.info["tau"])
    assert exp.info["calibration"] == "once"
    np.testing.assert_allclose(taus / scales, taus[0], rtol=1e-9)
    assert exp.coeffs.shape == (4, basis.size)


def test_cs_fit_many_fixed_radius():
    basis = total_degree_basis(2, 1)
    xis = make_rng(6).uniform(-1, 1, size=(30, 2))
    exp = cs_fit_many(xis, np.vstack([xis[:, 0], xis[:, 1]]), basis, CSConfig(tau=1.0))
    assert exp.info["calibration"] == "fixed"
    assert exp.info["tau"] == [1.0, 1.0]
    assert exp.coeffs[0, 1] == pytest.approx(1.0, abs=1e-6)
    assert exp.coeffs[1, 2] == pytest.approx(1.0, abs=1e-6)


def test_cs_config_validation():
    with pytest.raises(ConfigError) as info:
        CSConfig(tau="guess", cv_folds=1, calibration="sometimes")
    assert len(info.value.problems) == 3
    assert CSConfig().auto and not CSConfig(tau=2.0).auto


def test_index_sets():
    basis = total_degree_basis(2, 2)
    assert index_set_Ki(basis, 1) == [1, 3, 4]
    assert index_set_Ij(basis, 1) == [1, 3]
    assert index_set_Ki(basis, 2) == [2, 4, 5]
    assert index_set_Ij(basis, 2) == [2, 5]
    with pytest.raises(BasisError):
        index_set_Ki(basis, 3)


def test_variance_split_of_known_expansion():
    basis = total_degree_basis(2, 2)
    exp = PCExpansion(basis, np.array([1.0, 1.0, 1.0, 0.0, 1.0, 0.0]))
    first, total, variance = pce_variance_split(exp, [1])
    assert variance == pytest.approx(7 / 9)
    assert first == pytest.approx(1 / 3)
    assert total == pytest.approx(4 / 9)
    first, total, _ = pce_variance_split(exp, [1, 2])
    assert first == pytest.approx(7 / 9)
    assert total == pytest.approx(7 / 9)


def test_variance_split_of_constant_is_degenerate():
    basis = total_degree_basis(2, 2)
    with pytest.raises(DegenerateVarianceError):
        pce_variance_split(PCExpansion(basis, np.r_[3.0, np.zeros(5)]), [1])


def test_expansion_rejects_mismatched_coefficients():
    with pytest.raises(BasisError):
        PCExpansion(total_degree_basis(2, 2), np.zeros(5))


@pytest.mark.parametrize("factor", [1.0, 5.0])
def test_cs_fit_with_loose_radius_is_least_squares(factor):
    basis = total_degree_basis(3, 2)
    rng = make_rng(9)
    xis = rng.uniform(-1, 1, size=(60, 3))
    A = basis.evaluate(xis)
    values = 1.0 + xis[:, 0] - 0.4 * xis[:, 1] * xis[:, 2] + 0.1 * rng.normal(size=60)
    c_ls = np.linalg.lstsq(A, values, rcond=None)[0]
    exp = cs_fit(xis, values, basis, CSConfig(tau=factor * float(np.abs(c_ls).sum())))
    np.testing.assert_allclose(exp.coeffs, c_ls, atol=1e-6)


def test_cs_fit_keeps_last_iterate_when_line_search_fails(monkeypatch, caplog):
    import pce.fit

    monkeypatch.setattr(pce.fit, "MAX_BACKTRACKS", 0)
    basis = total_degree_basis(2, 2)
    xis = make_rng(3).uniform(-1, 1, size=(30, 2))
    with caplog.at_level(logging.WARNING):
        exp = cs_fit(xis, 1.0 + xis[:, 0], basis, CSConfig(tau=2.0))
    np.testing.assert_array_equal(exp.coeffs, 0.0)
    assert exp.info["line_search_failed"]
    assert not exp.info["converged"]
    assert "line search failed" in caplog.text
