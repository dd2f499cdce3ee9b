"""Reference time-dependent processes f(t, xi)."""

from .integrator import OdeConfig, integrate_ode
from .oscillator import (
    OscillatorParams,
    OscillatorModel,
    oscillator_eval,
    oscillator_param_map
)
from .cholera import (
    CholeraParams,
    CholeraState,
    CholeraModel,
    cholera_param_map,
    cholera_rhs,
    cholera_trajectory,
    cholera_infected
)
from .external import ExternalTableModel

from errors import ConfigError

MODEL_IDS = ('oscillator', 'cholera', 'external-table')


def get_model(model_id: str, ode: OdeConfig = OdeConfig()):
    """Instantiate a built-in model by identifier.

    External tables are built from their file by the study runner instead.
    """
    if model_id == 'oscillator':
        return OscillatorModel()
    if model_id == 'cholera':
        return CholeraModel(ode)
    raise ConfigError([f"model: unknown or file-backed model id '{model_id}'"])


__all__ = [
    'OdeConfig',
    'integrate_ode',
    'OscillatorParams',
    'OscillatorModel',
    'oscillator_eval',
    'oscillator_param_map',
    'CholeraParams',
    'CholeraState',
    'CholeraModel',
    'cholera_param_map',
    'cholera_rhs',
    'cholera_trajectory',
    'cholera_infected',
    'ExternalTableModel',
    'MODEL_IDS',
    'get_model'
]
