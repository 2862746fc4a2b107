"""Gradient-band adversarial examples and single-example retraining for
actor-critic grid path finding."""

from .a3c import Agent, EpisodeResult, TrainConfig, load_agent, rollout, save_agent, train
from .cdg import CdgConfig, DominantExample, GradientBand, cdg
from .gridmap import GridMap, generate_random_map, is_connected, load_map, parse, save_map, serialize
from .immunize import RetrainConfig, gradient_band_retrain, traditional_adversarial_training
from .validation import AttackParams, f_attack, validate_examples

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "AttackParams",
    "CdgConfig",
    "DominantExample",
    "EpisodeResult",
    "GradientBand",
    "GridMap",
    "RetrainConfig",
    "TrainConfig",
    "cdg",
    "f_attack",
    "generate_random_map",
    "gradient_band_retrain",
    "is_connected",
    "load_agent",
    "load_map",
    "parse",
    "rollout",
    "save_agent",
    "save_map",
    "serialize",
    "traditional_adversarial_training",
    "train",
    "validate_examples",
]
