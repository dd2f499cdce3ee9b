import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from errors import QuadratureError
from quadrature import (
    clenshaw_curtis,
    gauss_legendre,
    rule_1d,
    smolyak_rule,
    tensor_rule,
    trapezoid_rule,
    uniform_time_rule
)


def uniform_moment(k: int) -> float:
    """E[x^k] for x ~ U(-1, 1)."""
    return 0.0 if k % 2 else 1.0 / (k + 1)


@given(st.integers(min_value=1, max_value=12))
def test_gauss_legendre_weights_sum_to_one(n):
    assert gauss_legendre(n).weights.sum() == pytest.approx(1.0, abs=1e-14)


@given(st.integers(min_value=1, max_value=10), st.data())
def test_gauss_legendre_integrates_up_to_its_exactness(n, data):
    rule = gauss_legendre(n)
    k = data.draw(st.integers(min_value=0, max_value=rule.exactness))
    assert rule.integrate(lambda x: x**k) == pytest.approx(uniform_moment(k), abs=1e-13)


def test_gauss_legendre_rejects_empty_rule():
    with pytest.raises(QuadratureError):
        gauss_legendre(0)


def test_clenshaw_curtis_three_points_is_simpson():
    rule = clenshaw_curtis(3)
    np.testing.assert_allclose(rule.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [1 / 6, 2 / 3, 1 / 6], rtol=1e-13)


@given(st.integers(min_value=1, max_value=17), st.data())
def test_clenshaw_curtis_exactness_and_weights(n, data):
    rule = clenshaw_curtis(n)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-13)
    k = data.draw(st.integers(min_value=0, max_value=rule.exactness))
    assert rule.integrate(lambda x: x**k) == pytest.approx(uniform_moment(k), abs=1e-12)


def test_clenshaw_curtis_rules_are_nested():
    coarse, fine = clenshaw_curtis(5), clenshaw_curtis(9)
    for x in coarse.nodes:
        assert np.min(np.abs(fine.nodes - x)) < 1e-14


@given(
    st.lists(st.floats(min_value=0.01, max_value=2.0), min_size=1, max_size=40),
    st.floats(min_value=-5, max_value=5),
    st.floats(min_value=-5, max_value=5),
)
def test_trapezoid_is_exact_for_linear_functions(steps, a, b):
    t = np.concatenate([[0.0], np.cumsum(steps)])
    rule = trapezoid_rule(t)
    T = t[-1]
    exact = a * T + 0.5 * b * T**2
    assert rule.integrate(a + b * t) == pytest.approx(exact, rel=1e-10, abs=1e-10)


def test_trapezoid_rejects_bad_grids():
    with pytest.raises(QuadratureError):
        trapezoid_rule([0.0, 1.0, 1.0])
    with pytest.raises(QuadratureError):
        trapezoid_rule([0.0])
    with pytest.raises(QuadratureError):
        trapezoid_rule([0.0, np.nan])


def test_uniform_time_rule_oscillator_grid():
    rule = uniform_time_rule(10.0, 0.01)
    assert rule.size == 1001
    assert rule.T == 10.0
    assert rule.weights.sum() == pytest.approx(10.0, rel=1e-12)
    assert rule.weights[0] == pytest.approx(0.005)


def test_uniform_time_rule_requires_dividing_step():
    with pytest.raises(QuadratureError):
        uniform_time_rule(1.0, 0.3)


def test_restrict_returns_same_rule_at_horizon():
    rule = uniform_time_rule(10.0, 0.5)
    assert rule.restrict(10.0) is rule


def test_restrict_builds_sub_horizon_rule():
    rule = uniform_time_rule(10.0, 0.5)
    sub = rule.restrict(5.0)
    assert sub.size == 11
    np.testing.assert_array_equal(sub.nodes, rule.nodes[:11])
    assert sub.weights.sum() == pytest.approx(5.0)


def test_restrict_rejects_off_grid_and_too_short_horizons():
    rule = uniform_time_rule(10.0, 0.5)
    with pytest.raises(QuadratureError):
        rule.restrict(5.2)
    with pytest.raises(QuadratureError):
        rule.restrict(0.0)


def test_index_of_finds_nodes():
    rule = uniform_time_rule(10.0, 0.25)
    assert rule.index_of(2.5) == 10
    with pytest.raises(QuadratureError):
        rule.index_of(2.6)


def test_tensor_rule_integrates_separable_monomial():
    rule = tensor_rule(gauss_legendre(5), 3)
    assert rule.size == 125
    assert rule.rule_id == "tensor-gl5-d3"
    value = rule.integrate(lambda x: x[:, 0] ** 4 * x[:, 1] ** 2 * x[:, 2] ** 8)
    assert value == pytest.approx((1 / 5) * (1 / 3) * (1 / 9), rel=1e-12)


def test_tensor_rule_respects_node_cap():
    with pytest.raises(QuadratureError):
        tensor_rule(gauss_legendre(10), 6, cap=1000)


def test_smolyak_rule_respects_node_cap_before_building(monkeypatch):
    import quadrature.sparse as sparse

    def never(level):
        raise AssertionError("grid was built")

    monkeypatch.setattr(sparse, "_cc_level", never)
    with pytest.raises(QuadratureError):
        smolyak_rule(6, 8, cap=1000)


@pytest.mark.parametrize("level,dim", [(1, 2), (2, 3), (3, 4)])
def test_smolyak_node_count_estimate_bounds_the_grid(level, dim):
    from quadrature.sparse import _smolyak_size

    assert smolyak_rule(level, dim).size <= _smolyak_size(level, dim)
    assert _smolyak_size(1, 2) == 5


def test_smolyak_level_zero_is_the_origin():
    rule = smolyak_rule(0, 4)
    assert rule.size == 1
    np.testing.assert_array_equal(rule.nodes, np.zeros((1, 4)))
    assert rule.weights[0] == pytest.approx(1.0)


@pytest.mark.parametrize("level,dim", [(1, 2), (2, 2), (3, 2), (1, 3), (2, 3), (3, 3)])
def test_smolyak_integrates_total_degree_polynomials(level, dim):
    rule = smolyak_rule(level, dim)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-12)
    for alpha in itertools.product(range(rule.exactness + 1), repeat=dim):
        if sum(alpha) > rule.exactness:
            continue
        exact = np.prod([uniform_moment(a) for a in alpha])
        value = rule.integrate(lambda x: np.prod(x ** np.array(alpha), axis=1))
        assert value == pytest.approx(exact, abs=1e-12), alpha


def test_smolyak_has_fewer_nodes_than_tensor_of_same_exactness():
    sparse = smolyak_rule(3, 4)
    full = tensor_rule(clenshaw_curtis(5), 4)
    assert sparse.size < full.size


def test_rule_1d_lookup():
    assert rule_1d("gl", 4).name == "gl"
    assert rule_1d("cc", 5).name == "cc"
    with pytest.raises(QuadratureError):
        rule_1d("hermite", 3)
