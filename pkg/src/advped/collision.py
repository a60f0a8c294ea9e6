"""Collision detection and elastic-collision momentum mathematics.

The 2D momentum-change formula is transcribed verbatim from its source,
including the quirk that the primed components are velocity *changes* (each
already subtracts the pre-collision component) while the outer expression
subtracts the pedestrian speed once more. It is kept isolated here so an
alternative interpretation can be swapped in without touching callers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .simcore import PedestrianState, VehicleState, WorldConfig, distance, wrap_angle


@dataclass(frozen=True)
class CollisionOutcome:
    """Per-step collision result; all numeric fields are zero when no impact."""

    collided: bool
    impact_angle: float
    momentum_change_2d: float
    momentum_change_1d: float
    ped_speed_pre: float
    veh_speed_pre: float

    @classmethod
    def none(cls) -> "CollisionOutcome":
        return cls(False, 0.0, 0.0, 0.0, 0.0, 0.0)


def detect(ped: PedestrianState, veh: VehicleState, cfg: WorldConfig) -> bool:
    """True iff the bodies are within the collision radius (closed disc)."""
    return distance(ped, veh) <= cfg.collision_radius


def impact_angle(ped: PedestrianState, veh: VehicleState) -> float:
    """Angle between the pedestrian velocity and the vehicle heading.

    Measured pedestrian-velocity-versus-vehicle-heading and wrapped into
    (-pi, pi]; this convention is fixed here and documented because the
    source figure does not label its reference axes.
    """
    return wrap_angle(ped.heading - veh.heading)


def _require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"non-finite {name}: {v!r}")


def momentum_change_2d(m_p: float, m_c: float, v_p: float, v_c: float,
                       theta: float) -> float:
    """Pedestrian momentum change of a 2D perfectly elastic impact.

    Parameters
    ----------
    m_p, m_c : float
        Pedestrian and vehicle masses in kg, both > 0.
    v_p, v_c : float
        Pre-collision speeds in m/s, both >= 0.
    theta : float
        Impact angle in radians (pedestrian velocity vs vehicle heading).

    Returns
    -------
    float
        m_p * (sqrt(v_px'^2 + v_py'^2) - v_p) in kg m/s, transcribed exactly
        from the source formula (see module docstring for the quirk).
    """
    _require_finite(m_p=m_p, m_c=m_c, v_p=v_p, v_c=v_c, theta=theta)
    if m_p <= 0.0 or m_c <= 0.0:
        raise ValueError("masses must be > 0")
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    total = m_c + m_p
    v_px = ((m_p - m_c) * cos_t * v_p + 2.0 * m_c * v_c) / total - cos_t * v_p
    v_py = ((m_p - m_c) * sin_t * v_p) / total - sin_t * v_p
    return m_p * (math.hypot(v_px, v_py) - v_p)


def post_collision_speed_1d(m_p: float, m_c: float, v_p: float,
                            v_c: float) -> float:
    """Pedestrian 1D elastic post-collision velocity."""
    _require_finite(m_p=m_p, m_c=m_c, v_p=v_p, v_c=v_c)
    if m_p <= 0.0 or m_c <= 0.0:
        raise ValueError("masses must be > 0")
    return ((m_p - m_c) * v_p + 2.0 * m_c * v_c) / (m_c + m_p)


def post_collision_speed_1d_vehicle(m_p: float, m_c: float, v_p: float,
                                    v_c: float) -> float:
    """Vehicle 1D elastic post-collision velocity (conservation companion)."""
    _require_finite(m_p=m_p, m_c=m_c, v_p=v_p, v_c=v_c)
    if m_p <= 0.0 or m_c <= 0.0:
        raise ValueError("masses must be > 0")
    return ((m_c - m_p) * v_c + 2.0 * m_p * v_p) / (m_c + m_p)


def momentum_change_1d(m_p: float, m_c: float, v_p: float, v_c: float) -> float:
    """Pedestrian 1D momentum change: m_p * (post-collision speed - v_p)."""
    return m_p * (post_collision_speed_1d(m_p, m_c, v_p, v_c) - v_p)


def evaluate(ped: PedestrianState, veh: VehicleState, cfg: WorldConfig,
             ped_speed_pre: float, veh_speed_pre: float) -> CollisionOutcome:
    """Detect an impact and, if present, compute both momentum metrics.

    Speeds are the pre-collision speeds, sampled by the caller at the step
    immediately before the colliding state is produced.
    """
    if not detect(ped, veh, cfg):
        return CollisionOutcome.none()
    theta = impact_angle(ped, veh)
    return CollisionOutcome(
        collided=True,
        impact_angle=theta,
        momentum_change_2d=momentum_change_2d(
            cfg.mass_ped, cfg.mass_veh, ped_speed_pre, veh_speed_pre, theta),
        momentum_change_1d=momentum_change_1d(
            cfg.mass_ped, cfg.mass_veh, ped_speed_pre, veh_speed_pre),
        ped_speed_pre=ped_speed_pre,
        veh_speed_pre=veh_speed_pre,
    )
