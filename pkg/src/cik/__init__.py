"""Conditional-independence knockoffs: closed-form constructions, Gaussian
smoothing approximations and the knockoff+ selection pipeline."""

from cik.models import (
    BinaryModel,
    GaussMixModel,
    GibbsMixModel,
    JointLawTable,
    KnockoffDraw,
    TernaryModel,
    log_density_joint,
    log_density_x,
    model_from_dict,
    model_to_dict,
    sample_knockoff,
    sample_x,
)
from cik.rng import RandomStream, substream

__version__ = "0.1.0"

__all__ = [
    "BinaryModel",
    "GaussMixModel",
    "GibbsMixModel",
    "JointLawTable",
    "KnockoffDraw",
    "RandomStream",
    "TernaryModel",
    "log_density_joint",
    "log_density_x",
    "model_from_dict",
    "model_to_dict",
    "sample_knockoff",
    "sample_x",
    "substream",
]
