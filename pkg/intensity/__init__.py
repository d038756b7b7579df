"""Conditional-intensity models: renewal hazards, the stimulus term and their
product, re-exported so callers import from `intensity` only."""
from .hazards import (
    FAMILIES,
    ExponentialHazard,
    InverseGaussianHazard,
    LogLogisticHazard,
    ModelSpecError,
    RenewalHazard,
    ig_hazard,
    make_hazard,
    resolve_family,
)
from .model import (
    IntegrationError,
    IntensityModel,
    conditional_intensity,
    dump_model,
    integrated_intensity,
    load_model,
    log_likelihood,
    parse_model,
    segment_integrals,
)
from .stimulus import StimulusTerm, stimulus_value

__all__ = [
    "FAMILIES",
    "ExponentialHazard",
    "IntegrationError",
    "IntensityModel",
    "InverseGaussianHazard",
    "LogLogisticHazard",
    "ModelSpecError",
    "RenewalHazard",
    "StimulusTerm",
    "conditional_intensity",
    "dump_model",
    "ig_hazard",
    "integrated_intensity",
    "load_model",
    "log_likelihood",
    "make_hazard",
    "parse_model",
    "resolve_family",
    "segment_integrals",
    "stimulus_value",
]
