"""Simulation of a generalized quantum eraser and its wave-particle-entanglement metrics."""

from .errors import ConfigError, ContractViolation, DimensionError, QEraserError, UndefinedConditionalError
from .metrics import (
    TrialityReport,
    closed_form_triality,
    concurrence_mixed,
    concurrence_pure,
    distinguishability,
    evolved_triality,
    predictability,
    visibility,
)
from .model import ApparatusConfig, DetectionOutcome, Detector, detect, evolve, reduced_gamma_phi, source_state
from .scenario import ScenarioError, ScenarioFile, load_preset, load_scenario, parse_scenario, serialize_scenario

__all__ = [
    "ApparatusConfig",
    "ConfigError",
    "ContractViolation",
    "DetectionOutcome",
    "Detector",
    "DimensionError",
    "QEraserError",
    "ScenarioError",
    "ScenarioFile",
    "TrialityReport",
    "UndefinedConditionalError",
    "closed_form_triality",
    "concurrence_mixed",
    "concurrence_pure",
    "detect",
    "distinguishability",
    "evolve",
    "evolved_triality",
    "load_preset",
    "load_scenario",
    "parse_scenario",
    "predictability",
    "reduced_gamma_phi",
    "serialize_scenario",
    "source_state",
    "visibility",
]
