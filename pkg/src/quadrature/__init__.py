"""Quadrature rules over parameter space and over the time axis."""

from .rules import (
    Rule1D,
    TimeRule,
    gauss_legendre,
    clenshaw_curtis,
    trapezoid_rule,
    uniform_time_rule,
    rule_1d
)
from .sparse import ParamRule, tensor_rule, smolyak_rule

__all__ = [
    'Rule1D',
    'TimeRule',
    'ParamRule',
    'gauss_legendre',
    'clenshaw_curtis',
    'trapezoid_rule',
    'uniform_time_rule',
    'rule_1d',
    'tensor_rule',
    'smolyak_rule'
]
