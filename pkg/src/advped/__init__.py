"""advped: an adversarial pedestrian-crossing laboratory.

A deterministic 2D vehicle/pedestrian simulation, an elastic collision
momentum model, a from-scratch DDPG learner (two reward designs), a social
force baseline, and a seeded experiment harness with CSV/SVG artifacts.
"""
from .collision import CollisionOutcome, detect, evaluate, impact_angle, momentum_change_1d, momentum_change_2d
from .ddpg import DdpgAgent, DdpgConfig, Experience, ReplayBuffer, TrainMetrics
from .env import (EpisodeDoneError, CrossingEnv, StepOutcome, observe,
                  NORM_ANGLE, NORM_POSITION, NORM_SPEED, OBSERVATION_DIM)
from .harness import (RecallStats, RunSpec, moving_average, recall_eval,
                      recall_start, run_policy_episode,
                      run_socialforce_episode, train_multi, train_run)
from .reward import RewardDesign, TransitionKind, classify, reward_baseline, reward_momentum
from .runconfig import ConfigError, build_runspec, default_config, load_config_file
from .simcore import (PedestrianState, SimState, Vec2, VehicleState,
                      WorldConfig, brake_controller, distance, in_driveway,
                      step_pedestrian, step_vehicle, wrap_angle)
from .socialforce import SfPedestrianState, SocialForceParams, compute_force, step_socialforce

__version__ = "0.1.0"

__all__ = [
    "CollisionOutcome", "detect", "evaluate", "impact_angle",
    "momentum_change_1d", "momentum_change_2d",
    "DdpgAgent", "DdpgConfig", "Experience", "ReplayBuffer", "TrainMetrics",
    "EpisodeDoneError", "CrossingEnv", "StepOutcome", "observe",
    "NORM_ANGLE", "NORM_POSITION", "NORM_SPEED", "OBSERVATION_DIM",
    "RecallStats", "RunSpec", "moving_average", "recall_eval",
    "recall_start", "run_policy_episode", "run_socialforce_episode",
    "train_multi", "train_run",
    "RewardDesign", "TransitionKind", "classify", "reward_baseline",
    "reward_momentum",
    "ConfigError", "build_runspec", "default_config", "load_config_file",
    "PedestrianState", "SimState", "Vec2", "VehicleState", "WorldConfig",
    "brake_controller", "distance", "in_driveway", "step_pedestrian",
    "step_vehicle", "wrap_angle",
    "SfPedestrianState", "SocialForceParams", "compute_force",
    "step_socialforce",
    "__version__",
]
