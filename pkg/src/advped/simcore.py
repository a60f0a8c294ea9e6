"""Deterministic 2D kinematics of the pedestrian and the braking vehicle.

The pedestrian is a constant-speed point mass steered by per-step heading
increments. The vehicle travels along +x and has exactly one control option:
braking at a fixed deceleration whenever the scripted controller demands it.
All operations here are pure functions; stepping the same state with the same
action yields a bitwise-identical successor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import NamedTuple


class Vec2(NamedTuple):
    """A 2D point or vector in meters."""

    x: float
    y: float


def wrap_angle(a: float) -> float:
    """Wrap an angle in radians into the interval (-pi, pi].

    Parameters
    ----------
    a : float
        Angle in radians, any magnitude.

    Returns
    -------
    float
        Equivalent angle in (-pi, pi]; -pi maps to +pi.
    """
    r = math.fmod(a + math.pi, 2.0 * math.pi)
    if r <= 0.0:
        r += 2.0 * math.pi
    return r - math.pi


@dataclass(frozen=True)
class PedestrianState:
    """Pedestrian point mass: position, constant speed, current heading."""

    position: Vec2
    speed: float
    heading: float  # radians, kept in (-pi, pi]


@dataclass(frozen=True)
class VehicleState:
    """Vehicle on the +x axis: position, non-increasing speed, fixed heading."""

    position: Vec2
    speed: float
    heading: float = 0.0


@dataclass(frozen=True)
class WorldConfig:
    """Scenario geometry, masses, timestep, braking and bounds in one record.

    Defaults reproduce the published scenario: vehicle from the origin at
    7 m/s, pedestrian from (40..60, -5) at 2 m/s, braking at 2.5 m/s^2
    whenever the pedestrian is inside the driveway band within 10 m.
    """

    dt: float = 0.05
    ped_speed: float = 2.0
    veh_speed_init: float = 7.0
    brake_decel: float = 2.5
    brake_trigger_dist: float = 10.0
    mass_ped: float = 70.0
    mass_veh: float = 1500.0
    collision_radius: float = 1.5
    driveway_y_min: float = -3.0
    driveway_y_max: float = 3.0
    ped_start_x_min: float = 40.0
    ped_start_x_max: float = 60.0
    ped_start_y: float = -5.0
    veh_start: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))
    max_steps: int = 600
    action_bound: float = math.pi / 2.0

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be > 0")
        if self.brake_decel < 0.0:
            raise ValueError("brake_decel must be >= 0")
        if not (self.mass_ped > 0.0 and self.mass_veh > 0.0):
            raise ValueError("masses must be > 0")
        if not self.collision_radius > 0.0:
            raise ValueError("collision_radius must be > 0")
        if not self.driveway_y_min < self.driveway_y_max:
            raise ValueError("driveway_y_min must be < driveway_y_max")
        if self.ped_start_x_min > self.ped_start_x_max:
            raise ValueError("ped_start_x_min must be <= ped_start_x_max")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.action_bound > 0.0:
            raise ValueError("action_bound must be > 0")
        # veh_start may arrive as a plain (x, y) pair from config files
        if not isinstance(self.veh_start, Vec2):
            object.__setattr__(self, "veh_start", Vec2(*self.veh_start))

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        """Build a config from a mapping, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"unknown world config key(s): {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SimState:
    """Full Markov state: both bodies plus the step counter."""

    pedestrian: PedestrianState
    vehicle: VehicleState
    step_index: int
    dt: float

    @property
    def elapsed(self) -> float:
        # computed, never accumulated, so elapsed == step_index * dt exactly
        return self.step_index * self.dt


def step_pedestrian(state: PedestrianState, delta_heading: float,
                    cfg: WorldConfig) -> PedestrianState:
    """Advance the pedestrian one timestep under a heading increment.

    The increment is clamped to +-cfg.action_bound (exploration noise may
    exceed the bound; the environment flags clamping in its step info).

    Parameters
    ----------
    state : PedestrianState
        State before the step.
    delta_heading : float
        Commanded heading change in radians.
    cfg : WorldConfig
        Scenario parameters (uses dt, action_bound).

    Returns
    -------
    PedestrianState
        State after the step; speed unchanged, heading wrapped to (-pi, pi].
    """
    d = delta_heading
    if d > cfg.action_bound:
        d = cfg.action_bound
    elif d < -cfg.action_bound:
        d = -cfg.action_bound
    heading = wrap_angle(state.heading + d)
    step = state.speed * cfg.dt
    pos = Vec2(state.position.x + step * math.cos(heading),
               state.position.y + step * math.sin(heading))
    return PedestrianState(position=pos, speed=state.speed, heading=heading)


def step_vehicle(state: VehicleState, decel: float,
                 cfg: WorldConfig) -> VehicleState:
    """Advance the vehicle one timestep under a braking deceleration.

    Uses exact constant-acceleration integration, truncated at the instant
    the speed reaches zero within the step, so the stopping distance is
    independent of the timestep.

    Parameters
    ----------
    state : VehicleState
        State before the step.
    decel : float
        Deceleration magnitude in m/s^2; 0 means coasting.
    cfg : WorldConfig
        Scenario parameters (uses dt).

    Returns
    -------
    VehicleState
        State after the step; heading and y unchanged, speed clamped at 0.
    """
    v = state.speed
    if decel <= 0.0 or v <= 0.0:
        dx = v * cfg.dt
        v_new = v
    else:
        t_stop = v / decel
        if t_stop >= cfg.dt:
            dx = v * cfg.dt - 0.5 * decel * cfg.dt * cfg.dt
            v_new = v - decel * cfg.dt
            if v_new < 0.0:  # guard rounding at the exact-stop boundary
                v_new = 0.0
        else:
            dx = v * t_stop - 0.5 * decel * t_stop * t_stop
            v_new = 0.0
    pos = Vec2(state.position.x + dx, state.position.y)
    return VehicleState(position=pos, speed=v_new, heading=state.heading)


def in_driveway(pos: Vec2, cfg: WorldConfig) -> bool:
    """True iff the point lies inside the closed driveway band in y."""
    return cfg.driveway_y_min <= pos.y <= cfg.driveway_y_max


def distance(ped: PedestrianState, veh: VehicleState) -> float:
    """Euclidean distance between the pedestrian and vehicle positions."""
    return math.hypot(ped.position.x - veh.position.x,
                      ped.position.y - veh.position.y)


def brake_controller(ped: PedestrianState, veh: VehicleState,
                     cfg: WorldConfig) -> float:
    """Scripted vehicle controller: brake iff the pedestrian is a hazard.

    Returns cfg.brake_decel when the pedestrian is inside the driveway band
    AND closer than cfg.brake_trigger_dist; 0 otherwise. Pure function of its
    inputs, no hysteresis.
    """
    if in_driveway(ped.position, cfg) and distance(ped, veh) < cfg.brake_trigger_dist:
        return cfg.brake_decel
    return 0.0
