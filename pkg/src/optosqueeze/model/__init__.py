"""
Physics of a driven cavity with a movable mirror fed by squeezed vacuum.

This package provides the parameter models, steady states, stability
conditions and variance spectra the sweep and CLI layers build on.
"""

from .params import SystemParams, DerivedParams, build_params, derive_params
from .steadystate import BranchPolicy, SteadyBranch, solve_steady_state, select_branch
from .stability import (
    DriftMatrix,
    StabilityVerdict,
    build_drift_matrix,
    routh_hurwitz,
    eigenvalue_check,
)
from .spectrum import (
    CothModel,
    VarianceResult,
    d_of_omega,
    coefficient_A,
    coefficient_B,
    coefficient_C,
    spectral_density,
    mechanical_susceptibility,
    variance_QP,
    free_mirror_variance,
)

__all__ = [
    'SystemParams',
    'DerivedParams',
    'build_params',
    'derive_params',
    'BranchPolicy',
    'SteadyBranch',
    'solve_steady_state',
    'select_branch',
    'DriftMatrix',
    'StabilityVerdict',
    'build_drift_matrix',
    'routh_hurwitz',
    'eigenvalue_check',
    'CothModel',
    'VarianceResult',
    'd_of_omega',
    'coefficient_A',
    'coefficient_B',
    'coefficient_C',
    'spectral_density',
    'mechanical_susceptibility',
    'variance_QP',
    'free_mirror_variance',
]
