import os

import hypothesis
import numpy as np
import pytest

from ensemble import draw_samples, evaluate_ensemble, samples_from_rule
from models import OscillatorModel
from quadrature import gauss_legendre, tensor_rule, uniform_time_rule

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=300, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


class LinearModel:
    """f(t, xi) = xi_1 t + 2 xi_2; additive, so first-order and total indices coincide."""

    name = "linear"
    param_names = ("a", "b")
    vectorized = True
    dim = 2

    def evaluate(self, xi, t):
        return xi[0] * np.asarray(t, dtype=float) + 2.0 * xi[1]

    def evaluate_many(self, xis, t):
        xis = np.atleast_2d(xis)
        return xis[:, [0]] * np.asarray(t, dtype=float)[None, :] + 2.0 * xis[:, [1]]


@pytest.fixture(scope="session")
def oscillator():
    return OscillatorModel()


@pytest.fixture(scope="session")
def linear_model():
    return LinearModel()


@pytest.fixture(scope="session")
def coarse_rule():
    return uniform_time_rule(10.0, 0.05)


@pytest.fixture(scope="session")
def fine_rule():
    return uniform_time_rule(10.0, 0.01)


@pytest.fixture(scope="session")
def mc_ensemble(oscillator, coarse_rule):
    return evaluate_ensemble(oscillator, draw_samples(3, 400, 7), coarse_rule)


@pytest.fixture(scope="session")
def tensor_ensemble(oscillator, coarse_rule):
    return evaluate_ensemble(oscillator, samples_from_rule(tensor_rule(gauss_legendre(5), 3)), coarse_rule)
