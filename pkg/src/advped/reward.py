"""Transition classification and the two RL reward designs.

Orientation note: the implementation follows the source's prose (approach is
rewarded, retreat is penalized). The source's table lists the two rows the
other way around; passing orientation="table" restores that literal mapping
for ablation.
"""
from __future__ import annotations

import enum

from .collision import post_collision_speed_1d

PROSE = "prose"
TABLE = "table"
_ORIENTATIONS = (PROSE, TABLE)


class TransitionKind(enum.Enum):
    """How the pedestrian-vehicle distance evolved over one step."""

    TOWARD = "toward"
    AWAY = "away"
    COLLISION = "collision"


class RewardDesign(enum.Enum):
    """Which reward the RL agent trains on."""

    BASELINE_SIGNAL = "baseline"
    COLLISION_MOMENTUM = "momentum"

    @classmethod
    def from_name(cls, name: str) -> "RewardDesign":
        for design in cls:
            if design.value == name:
                return design
        raise ValueError(f"unknown reward design: {name!r} "
                         f"(expected one of {[d.value for d in cls]})")


def classify(prev_dist: float, new_dist: float, collided: bool,
             tie_is_away: bool = True) -> TransitionKind:
    """Classify one state transition.

    Collision dominates. Otherwise a strict distance decrease is TOWARD and
    an increase is AWAY; exact ties default to AWAY (no progress toward the
    vehicle earns no reward) unless tie_is_away is False.
    """
    if prev_dist < 0.0 or new_dist < 0.0:
        raise ValueError("distances must be >= 0")
    if collided:
        return TransitionKind.COLLISION
    if new_dist < prev_dist:
        return TransitionKind.TOWARD
    if new_dist == prev_dist and not tie_is_away:
        return TransitionKind.TOWARD
    return TransitionKind.AWAY


def _check_orientation(orientation: str) -> None:
    if orientation not in _ORIENTATIONS:
        raise ValueError(f"unknown orientation: {orientation!r}")


def reward_baseline(kind: TransitionKind, orientation: str = PROSE) -> float:
    """Sparse baseline signal: +1 toward, -2 away, 3000 on collision."""
    _check_orientation(orientation)
    if kind is TransitionKind.COLLISION:
        return 3000.0
    toward = kind is TransitionKind.TOWARD
    if orientation == TABLE:
        toward = not toward
    return 1.0 if toward else -2.0


def reward_momentum(kind: TransitionKind, dist: float, m_p: float, m_c: float,
                    v_p: float, v_c: float, orientation: str = PROSE) -> float:
    """Collision-momentum design: distance-shaped steps, momentum at impact.

    Parameters
    ----------
    kind : TransitionKind
        Classification of the step.
    dist : float
        Pedestrian-vehicle distance after the step, in meters (>= 0 when
        kind is not COLLISION; unused otherwise).
    m_p, m_c : float
        Masses in kg.
    v_p, v_c : float
        Pre-collision speeds in m/s (only used when kind is COLLISION).
    orientation : str
        "prose" (default) or "table"; see module docstring.

    Returns
    -------
    float
        TOWARD: 10/(1+dist), in (0, 10].
        AWAY:  -10/(1+dist) - 1, in [-11, -1).
        COLLISION: 10 * m_p * (post_collision_speed_1d(...) - v_p); the same
        code path as the collision module, so the two never drift apart.
    """
    _check_orientation(orientation)
    if kind is TransitionKind.COLLISION:
        return 10.0 * m_p * (post_collision_speed_1d(m_p, m_c, v_p, v_c) - v_p)
    if dist < 0.0:
        raise ValueError("dist must be >= 0")
    toward = kind is TransitionKind.TOWARD
    if orientation == TABLE:
        toward = not toward
    if toward:
        return 10.0 / (1.0 + dist)
    return -10.0 / (1.0 + dist) - 1.0
