"""Characteristic functions of contractions that are finite-rank perturbations of unitaries.

Typical use::

    import numpy as np
    from charfunc import reduce_to_gamma_form, ThetaEvaluator

    g = reduce_to_gamma_form(np.eye(1), np.array([[-0.5]]))
    ThetaEvaluator.defect(g)(0.3)   # (0.3 - 0.5) / (1 - 0.15)
"""
from .errors import *  # noqa: F401,F403
from .linalg import (
    DEFAULT_RANK_TOL,
    RankTolerance,
    adjoint,
    numerical_rank,
    opnorm,
    psd_sqrt,
    unitary_polar,
    woodbury_inverse,
)
from .measure import (
    MeasureModel,
    OperatorMeasure,
    WeightField,
    beta_matrix,
    cauchy_transform,
    cauchy_transform_grid,
    cauchy_transform_many,
    grid_angles,
    measure_from_unitary,
    poisson_extension,
    pushforward_beta,
    trace_normalize,
)
from .perturbation import (
    CnuSplit,
    GammaForm,
    assemble_T,
    cnu_split,
    defect_operators,
    reduce_to_gamma_form,
)
from .theta import (
    METHODS,
    BoundaryProfile,
    ThetaEvaluator,
    boundary_profile,
    theta_defect,
    theta_f1,
    theta_herglotz,
)
from .verify import VerificationReport, canonical_model, random_instance
from .io import ModelSpec, build_model, load_spec, parse_spec, spec_to_dict

__version__ = "0.1.0"
