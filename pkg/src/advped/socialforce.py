"""Social-force baseline pedestrian: three component forces plus the
position/velocity update.

Force forms (the source names the components but publishes no functional
forms or gains):

- F_v, attraction toward the vehicle, acts along the road axis only:
  k_v * (sign(x_veh - x_ped), 0). A full 2D pursuit attraction would drag
  the pedestrian into the driveway even with the crossing force disabled,
  which contradicts the documented no-crossing-force dichotomy, so the
  lateral component is deliberately excluded.
- F_d, the crossing-street force: k_d * crossing_direction (default +y).
- F_p, a relaxation-style velocity constraint:
  (m_p / relax_time) * (v_max * unit(F_v + F_d) - velocity).

Gains are calibration knobs, not ground truth; defaults were grid-searched
so the default scenario produces collisions with k_d > 0 and none with
k_d = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .simcore import Vec2, VehicleState


@dataclass(frozen=True)
class SocialForceParams:
    """Gains and limits of the social-force pedestrian."""

    k_v: float = 100.0
    k_d: float = 20.0
    relax_time: float = 0.5
    v_max: float = 2.5
    crossing_direction: Vec2 = field(default_factory=lambda: Vec2(0.0, 1.0))

    def __post_init__(self):
        if self.k_v < 0.0 or self.k_d < 0.0:
            raise ValueError("force gains must be >= 0")
        if not self.relax_time > 0.0:
            raise ValueError("relax_time must be > 0")
        if not self.v_max > 0.0:
            raise ValueError("v_max must be > 0")
        if not isinstance(self.crossing_direction, Vec2):
            object.__setattr__(self, "crossing_direction",
                               Vec2(*self.crossing_direction))
        n = math.hypot(*self.crossing_direction)
        if not math.isclose(n, 1.0, rel_tol=0.0, abs_tol=1e-9):
            raise ValueError("crossing_direction must be a unit vector")

    @classmethod
    def from_dict(cls, d: dict) -> "SocialForceParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"unknown socialforce config key(s): {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SfPedestrianState:
    """Social-force pedestrian: position and a free velocity vector."""

    position: Vec2
    velocity: Vec2


def _unit(v: Vec2) -> Vec2:
    n = math.hypot(v.x, v.y)
    if n == 0.0:
        return Vec2(0.0, 0.0)
    return Vec2(v.x / n, v.y / n)


def compute_force(ped: SfPedestrianState, veh: VehicleState,
                  params: SocialForceParams, m_p: float) -> Vec2:
    """Resultant force on the pedestrian: F_v + F_d + F_p.

    Parameters
    ----------
    ped : SfPedestrianState
        Pedestrian position and velocity.
    veh : VehicleState
        Vehicle state (only the position enters).
    params : SocialForceParams
        Gains and limits.
    m_p : float
        Pedestrian mass in kg.

    Returns
    -------
    Vec2
        Force in newtons. With coincident x coordinates F_v contributes the
        zero vector (limit convention).
    """
    dx = veh.position.x - ped.position.x
    sign = 0.0 if dx == 0.0 else math.copysign(1.0, dx)
    f_v = Vec2(params.k_v * sign, 0.0)
    f_d = Vec2(params.k_d * params.crossing_direction.x,
               params.k_d * params.crossing_direction.y)
    goal = _unit(Vec2(f_v.x + f_d.x, f_v.y + f_d.y))
    scale = m_p / params.relax_time
    f_p = Vec2(scale * (params.v_max * goal.x - ped.velocity.x),
               scale * (params.v_max * goal.y - ped.velocity.y))
    return Vec2(f_v.x + f_d.x + f_p.x, f_v.y + f_d.y + f_p.y)


def step_socialforce(ped: SfPedestrianState, force: Vec2, dt: float,
                     m_p: float, params: SocialForceParams) -> SfPedestrianState:
    """Advance the social-force pedestrian one timestep.

    position' = position + velocity*dt + force*dt^2 / (2*m_p)
    velocity' = velocity + force*dt / m_p, then rescaled to magnitude <= v_max
    so the point mass cannot accelerate unboundedly under sustained force.
    """
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    half = dt * dt / (2.0 * m_p)
    pos = Vec2(ped.position.x + ped.velocity.x * dt + force.x * half,
               ped.position.y + ped.velocity.y * dt + force.y * half)
    vel = Vec2(ped.velocity.x + force.x * dt / m_p,
               ped.velocity.y + force.y * dt / m_p)
    speed = math.hypot(vel.x, vel.y)
    if speed > params.v_max:
        k = params.v_max / speed
        vel = Vec2(vel.x * k, vel.y * k)
    return SfPedestrianState(position=pos, velocity=vel)
