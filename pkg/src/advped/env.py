"""The crossing-scenario Markov decision process.

Step order mirrors the scripted episode loop: the pedestrian moves first,
the brake controller reads the updated pedestrian position, the vehicle
moves, then collision/classification/reward are evaluated. Collision reward
uses the speeds sampled before this step's motion updates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import collision as collision_mod
from .reward import (PROSE, RewardDesign, TransitionKind, classify,
                     reward_baseline, reward_momentum)
from .simcore import (PedestrianState, SimState, Vec2, VehicleState,
                      WorldConfig, brake_controller, distance,
                      step_pedestrian, step_vehicle)

# Order-one input scaling for the networks; recorded in checkpoint
# fingerprints so evaluation can never mix normalizations.
NORM_POSITION = 50.0
NORM_SPEED = 10.0
NORM_ANGLE = math.pi
OBSERVATION_DIM = 8


class EpisodeDoneError(RuntimeError):
    """Raised when step() is called on a finished episode."""


@dataclass(frozen=True)
class StepOutcome:
    """One MDP transition: observation, reward, done, diagnostics."""

    observation: np.ndarray
    reward: float
    done: bool
    info: dict


def observe(sim: SimState) -> np.ndarray:
    """Normalized 8-vector [x_veh, y_veh, x_ped, y_ped, v_veh, v_ped,
    theta_veh, theta_ped]."""
    ped, veh = sim.pedestrian, sim.vehicle
    return np.array([
        veh.position.x / NORM_POSITION,
        veh.position.y / NORM_POSITION,
        ped.position.x / NORM_POSITION,
        ped.position.y / NORM_POSITION,
        veh.speed / NORM_SPEED,
        ped.speed / NORM_SPEED,
        veh.heading / NORM_ANGLE,
        ped.heading / NORM_ANGLE,
    ], dtype=np.float64)


class CrossingEnv:
    """Pedestrian-versus-braking-vehicle environment.

    Parameters
    ----------
    cfg : WorldConfig
        Scenario parameters.
    design : RewardDesign
        Which reward the agent receives.
    tie_is_away : bool
        Classification of exact distance ties.
    orientation : str
        "prose" or "table" reward orientation.
    """

    def __init__(self, cfg: WorldConfig,
                 design: RewardDesign = RewardDesign.COLLISION_MOMENTUM, *,
                 tie_is_away: bool = True, orientation: str = PROSE):
        self.cfg = cfg
        self.design = design
        self.tie_is_away = tie_is_away
        self.orientation = orientation
        self.sim: Optional[SimState] = None
        self.prev_dist = 0.0
        self.done = True

    def reset(self, rng: Optional[np.random.Generator] = None,
              start: Optional[tuple] = None) -> np.ndarray:
        """Start a new episode.

        The pedestrian starts at (uniform[x_min, x_max], ped_start_y) facing
        the road (+pi/2); an explicit start position overrides the draw (used
        by the stochastic-start recall evaluation and rollouts).
        """
        cfg = self.cfg
        if start is None:
            if rng is None:
                raise ValueError("reset needs an rng when start is not given")
            x0 = float(rng.uniform(cfg.ped_start_x_min, cfg.ped_start_x_max))
            y0 = cfg.ped_start_y
        else:
            x0, y0 = float(start[0]), float(start[1])
        ped = PedestrianState(position=Vec2(x0, y0), speed=cfg.ped_speed,
                              heading=math.pi / 2.0)
        veh = VehicleState(position=cfg.veh_start, speed=cfg.veh_speed_init,
                           heading=0.0)
        self.sim = SimState(pedestrian=ped, vehicle=veh, step_index=0,
                            dt=cfg.dt)
        self.prev_dist = distance(ped, veh)
        self.done = False
        return observe(self.sim)

    def step(self, action: float) -> StepOutcome:
        """Advance one timestep under a heading-increment action."""
        if self.done or self.sim is None:
            raise EpisodeDoneError("step() called on a finished episode")
        cfg = self.cfg
        sim = self.sim
        action = float(action)
        clamped = abs(action) > cfg.action_bound

        ped_speed_pre = sim.pedestrian.speed
        veh_speed_pre = sim.vehicle.speed

        ped = step_pedestrian(sim.pedestrian, action, cfg)
        decel = brake_controller(ped, sim.vehicle, cfg)
        veh = step_vehicle(sim.vehicle, decel, cfg)

        outcome = collision_mod.evaluate(ped, veh, cfg, ped_speed_pre,
                                         veh_speed_pre)
        new_dist = distance(ped, veh)
        kind = classify(self.prev_dist, new_dist, outcome.collided,
                        self.tie_is_away)
        if self.design is RewardDesign.BASELINE_SIGNAL:
            r = reward_baseline(kind, self.orientation)
        else:
            r = reward_momentum(kind, new_dist, cfg.mass_ped, cfg.mass_veh,
                                ped_speed_pre, veh_speed_pre, self.orientation)

        step_index = sim.step_index + 1
        done = outcome.collided or step_index >= cfg.max_steps
        self.sim = SimState(pedestrian=ped, vehicle=veh,
                            step_index=step_index, dt=cfg.dt)
        self.prev_dist = new_dist
        self.done = done
        info = {
            "kind": kind,
            "collided": outcome.collided,
            "momentum_2d": outcome.momentum_change_2d,
            "momentum_1d": outcome.momentum_change_1d,
            "impact_angle": outcome.impact_angle,
            "distance": new_dist,
            "braking": decel > 0.0,
            "action_clamped": clamped,
            "sim": self.sim,
        }
        return StepOutcome(observation=observe(self.sim), reward=r,
                           done=done, info=info)
