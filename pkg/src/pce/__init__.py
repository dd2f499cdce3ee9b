"""Multivariate Legendre polynomial chaos."""

from .basis import (
    PCBasis,
    basis_size,
    total_degree_basis,
    basis_from_indices,
    legendre_eval,
    psi_eval
)
from .fit import (
    PCExpansion,
    CSConfig,
    projection_matrix,
    nisp_project,
    project_l1_ball,
    cross_validate_tau,
    cs_fit,
    cs_fit_many
)
from .variance import index_set_Ki, index_set_Ij, support_masks, pce_variance_split

__all__ = [
    'PCBasis',
    'basis_size',
    'total_degree_basis',
    'basis_from_indices',
    'legendre_eval',
    'psi_eval',
    'PCExpansion',
    'CSConfig',
    'projection_matrix',
    'nisp_project',
    'project_l1_ball',
    'cross_validate_tau',
    'cs_fit',
    'cs_fit_many',
    'index_set_Ki',
    'index_set_Ij',
    'support_masks',
    'pce_variance_split'
]
