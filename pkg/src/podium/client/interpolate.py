"""Snapshot interpolation: remote poses render slightly in the past, blended
between buffered samples; a dried-up stream extrapolates briefly, then holds.

sample_pose(buffer, render_time) with render_time = local clock minus the
interpolation delay (default 100 ms).  Between samples, positions lerp and
rotations slerp.  Past the newest sample, positions continue at the last
observed velocity for at most the extrapolation cap (default 200 ms), then
freeze; rotations hold at the newest sample throughout.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from podium import _kernels
from podium.protocol.types import (
    JointTransform,
    Message,
    PoseFull,
    PoseIK,
    TransformSimple,
)

INTERP_DELAY_MS = 100
EXTRAP_CAP_MS = 200
BUFFER_CAPACITY = 32


class EmptyBuffer(Exception):
    pass


@dataclass(frozen=True, slots=True)
class PoseSample:
    timestamp_ms: int
    seq: int
    message: Message


class PoseBuffer:
    """Ring of timestamped pose samples for one remote participant.

    Timestamps are strictly increasing; pushing an older-or-equal timestamp
    or a stale sequence number is a silent drop (last-value semantics).
    """

    __slots__ = ("samples", "capacity")

    def __init__(self, capacity: int = BUFFER_CAPACITY):
        self.capacity = capacity
        self.samples: deque[PoseSample] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def newest(self) -> PoseSample:
        if not self.samples:
            raise EmptyBuffer("no pose samples buffered")
        return self.samples[-1]

    def push(self, timestamp_ms: int, seq: int, message: Message) -> bool:
        if self.samples:
            last = self.samples[-1]
            if seq <= last.seq or timestamp_ms <= last.timestamp_ms:
                return False
        self.samples.append(PoseSample(timestamp_ms=timestamp_ms, seq=seq, message=message))
        return True


def _joints_flat(joints) -> list[float]:
    flat: list[float] = []
    for j in joints:
        flat.extend(j.position)
        flat.extend(j.rotation)
    return flat


def _flat_joints(vals) -> tuple[JointTransform, ...]:
    return tuple(
        JointTransform(
            position=(vals[i], vals[i + 1], vals[i + 2]),
            rotation=(vals[i + 3], vals[i + 4], vals[i + 5], vals[i + 6]),
        )
        for i in range(0, len(vals), 7)
    )


def _wrap_pi(angle: float) -> float:
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def _blend(m0: Message, m1: Message, t: float) -> Message:
    if isinstance(m0, PoseFull) and isinstance(m1, PoseFull):
        vals = _kernels.interp_joints(_joints_flat(m0.joints), _joints_flat(m1.joints), t)
        return PoseFull(joints=_flat_joints(vals), space_flag=m0.space_flag)
    if isinstance(m0, PoseIK) and isinstance(m1, PoseIK):
        vals = _kernels.interp_joints(_joints_flat(m0.joints), _joints_flat(m1.joints), t)
        return PoseIK(joints=_flat_joints(vals), locomotion=m0.locomotion)
    if isinstance(m0, TransformSimple) and isinstance(m1, TransformSimple):
        p0, p1 = m0.position, m1.position
        dyaw = _wrap_pi(m1.yaw - m0.yaw)
        return TransformSimple(
            position=(
                p0[0] + (p1[0] - p0[0]) * t,
                p0[1] + (p1[1] - p0[1]) * t,
                p0[2] + (p1[2] - p0[2]) * t,
            ),
            yaw=_wrap_pi(m0.yaw + dyaw * t),
            locomotion=m0.locomotion,
            intensity=m0.intensity + (m1.intensity - m0.intensity) * t,
        )
    raise TypeError(
        f"cannot blend {type(m0).__name__} with {type(m1).__name__}"
    )


def _extrapolate(prev: PoseSample, last: PoseSample, dt_ms: float) -> Message:
    span = last.timestamp_ms - prev.timestamp_ms
    k = dt_ms / span
    m0, m1 = prev.message, last.message

    def extrap(p0, p1):
        return (
            p1[0] + (p1[0] - p0[0]) * k,
            p1[1] + (p1[1] - p0[1]) * k,
            p1[2] + (p1[2] - p0[2]) * k,
        )

    if isinstance(m1, PoseFull):
        joints = tuple(
            JointTransform(position=extrap(a.position, b.position), rotation=b.rotation)
            for a, b in zip(m0.joints, m1.joints)
        )
        return PoseFull(joints=joints, space_flag=m1.space_flag)
    if isinstance(m1, PoseIK):
        joints = tuple(
            JointTransform(position=extrap(a.position, b.position), rotation=b.rotation)
            for a, b in zip(m0.joints, m1.joints)
        )
        return PoseIK(joints=joints, locomotion=m1.locomotion)
    if isinstance(m1, TransformSimple):
        return TransformSimple(
            position=extrap(m0.position, m1.position),
            yaw=m1.yaw,
            locomotion=m1.locomotion,
            intensity=m1.intensity,
        )
    raise TypeError(f"cannot extrapolate {type(m1).__name__}")


def sample_pose(
    buffer: PoseBuffer,
    render_time_ms: float,
    *,
    extrap_cap_ms: float = EXTRAP_CAP_MS,
) -> Message:
    """Pose at render_time_ms, interpolated/extrapolated per module contract."""
    samples = buffer.samples
    if not samples:
        raise EmptyBuffer("no pose samples buffered")
    if render_time_ms <= samples[0].timestamp_ms:
        return samples[0].message
    last = samples[-1]
    if render_time_ms >= last.timestamp_ms:
        if render_time_ms == last.timestamp_ms or len(samples) < 2:
            return last.message
        dt = min(render_time_ms - last.timestamp_ms, extrap_cap_ms)
        return _extrapolate(samples[-2], last, dt)
    # bracket: scan back from the newest; buffers are short and reads cluster there
    for i in range(len(samples) - 1, 0, -1):
        s0 = samples[i - 1]
        s1 = samples[i]
        if s0.timestamp_ms <= render_time_ms <= s1.timestamp_ms:
            t = (render_time_ms - s0.timestamp_ms) / (s1.timestamp_ms - s0.timestamp_ms)
            return _blend(s0.message, s1.message, t)
    return last.message  # unreachable with strictly increasing timestamps
