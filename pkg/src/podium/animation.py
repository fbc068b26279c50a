"""Locomotion state machine and blend weights for avatars with untracked legs.

Gait switching uses a hysteresis band (enter walking above `walk_enter_mps`,
leave below `walk_exit_mps`) so speeds hovering near one threshold cannot
chatter the animation.  Browser users instead supply an input intensity in
[0, 1] that blends idle/walk linearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from podium.protocol.types import Locomotion

WALK_ENTER_MPS = 0.15
WALK_EXIT_MPS = 0.10


class OutOfRange(ValueError):
    pass


class NonMonotonicTime(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class LocomotionState:
    state: Locomotion = Locomotion.IDLE
    entered_at_ms: int = 0


@dataclass(frozen=True, slots=True)
class BlendWeights:
    idle: float
    walk: float


def update_locomotion(
    prev: LocomotionState,
    horizontal_speed: float,
    now_ms: int = 0,
    *,
    walk_enter: float = WALK_ENTER_MPS,
    walk_exit: float = WALK_EXIT_MPS,
) -> LocomotionState:
    """Advance the gait state given the current horizontal speed (m/s >= 0)."""
    if horizontal_speed < 0:
        raise OutOfRange(f"speed must be non-negative, got {horizontal_speed}")
    if prev.state is Locomotion.IDLE:
        if horizontal_speed > walk_enter:
            return LocomotionState(state=Locomotion.WALK, entered_at_ms=now_ms)
    else:
        if horizontal_speed < walk_exit:
            return LocomotionState(state=Locomotion.IDLE, entered_at_ms=now_ms)
    return prev


def blend_from_intensity(intensity: float) -> BlendWeights:
    """Convex idle/walk blend: walk weight equals the input intensity."""
    if not 0.0 <= intensity <= 1.0:
        raise OutOfRange(f"intensity outside [0, 1]: {intensity}")
    return BlendWeights(idle=1.0 - intensity, walk=intensity)


def speed_estimate(t0_ms: float, p0, t1_ms: float, p1) -> float:
    """Horizontal (xz-plane) speed between two timestamped positions, m/s.

    dt is floored at 1 ms so a burst of same-millisecond samples cannot blow
    the estimate up.
    """
    if t1_ms <= t0_ms:
        raise NonMonotonicTime(f"timestamps must increase: {t0_ms} -> {t1_ms}")
    dt_s = max(t1_ms - t0_ms, 1.0) / 1000.0
    dx = p1[0] - p0[0]
    dz = p1[2] - p0[2]
    return math.sqrt(dx * dx + dz * dz) / dt_s
