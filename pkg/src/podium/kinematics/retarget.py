"""17-sensor frame -> 59-joint full-body pose.

Sensor rotations are local deltas relative to the rest pose: an all-identity
frame reproduces the rest pose exactly, and a rotated hips sensor swings the
whole skeleton rigidly about the root.  Directly mapped joints carry their
sensor rotations verbatim.  Untracked joints stay at rest except:

  * trunk intermediates: each untracked joint between a trunk sensor joint
    and its nearest tracked ancestor receives an equal spherical fraction
    slerp(identity, sensor_rotation, 1/(u+1)) of that sensor's rotation,
    bending the spine/neck smoothly instead of hinging at one vertebra;
  * fingers: the 30 finger joints blend from rest toward a fixed curl pose
    by the scalar `fingers` (the sensor kit does not track fingers).

Positions in the output are recomputed by forward kinematics from the local
rotations and rest offsets; the root position comes from the hips sensor.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Mapping

from podium.kinematics import quat
from podium.kinematics.errors import MissingSensor, UnmappedJoint
from podium.kinematics.skeleton import SensorId, SkeletonManifest
from podium.protocol.types import IDENTITY_ROTATION, JointTransform, PoseFull

# Sensors whose rotation is distributed across untracked ancestors (the
# spine/neck chain); lateral sensors (shoulders, limbs) are not.
TRUNK_SENSORS = (SensorId.SPINE, SensorId.HEAD)

FINGER_CURL_RAD = math.radians(60.0)


@dataclass(frozen=True, slots=True)
class SensorFrame:
    """One capture tick: all 17 sensors, keyed by SensorId."""

    sensors: Mapping[SensorId, JointTransform]


def _check_frame(frame: SensorFrame) -> None:
    got = set(frame.sensors)
    want = set(SensorId)
    if got != want:
        missing = sorted(s.value for s in want - got)
        extra = sorted(str(s) for s in got - want)
        parts = []
        if missing:
            parts.append(f"missing {missing}")
        if extra:
            parts.append(f"unexpected {extra}")
        raise MissingSensor("; ".join(parts))


def _trunk_segments(manifest: SkeletonManifest) -> list[tuple[int, list[int]]]:
    """(trunk sensor joint, untracked intermediate joints below its tracked ancestor)."""
    mapped = set(manifest.sensor_joint.values())
    segments = []
    for sid in TRUNK_SENSORS:
        j = manifest.sensor_joint[sid]
        chain: list[int] = []
        p = manifest.parents[j]
        while p >= 0 and p not in mapped:
            chain.append(p)
            p = manifest.parents[p]
        if p < 0:
            raise UnmappedJoint(
                f"trunk sensor {sid.value!r} has no tracked ancestor in the manifest"
            )
        segments.append((j, chain))
    return segments


def _finger_joints(manifest: SkeletonManifest) -> list[tuple[int, tuple[float, float, float, float]]]:
    """Finger joint indices with their full-curl local rotations."""
    out = []
    for name, idx in manifest.index_of.items():
        for finger in ("thumb", "index", "middle", "ring", "pinky"):
            if f"_{finger}_" in name:
                # flex about the forward axis; sign curls the fingers palmward
                sign = -1.0 if name.startswith("left") else 1.0
                out.append((idx, quat.from_axis_angle((0.0, 0.0, 1.0), sign * FINGER_CURL_RAD)))
                break
    return out


_plan_cache: "weakref.WeakKeyDictionary[SkeletonManifest, tuple]" = weakref.WeakKeyDictionary()


def _plan(manifest: SkeletonManifest):
    plan = _plan_cache.get(manifest)
    if plan is None:
        for sid in SensorId:
            if sid not in manifest.sensor_joint:
                raise UnmappedJoint(f"manifest lacks a joint for sensor {sid.value!r}")
        plan = (_trunk_segments(manifest), _finger_joints(manifest))
        _plan_cache[manifest] = plan
    return plan


def retarget(frame: SensorFrame, manifest: SkeletonManifest, fingers: float = 0.0) -> PoseFull:
    """Map a sensor frame onto the manifest skeleton; positions via FK."""
    _check_frame(frame)
    if not 0.0 <= fingers <= 1.0:
        raise ValueError(f"finger curl outside [0, 1]: {fingers}")
    trunk_segments, finger_rots = _plan(manifest)

    n = manifest.joint_count
    locals_flat = list(IDENTITY_ROTATION) * n

    def set_rot(j: int, q) -> None:
        locals_flat[4 * j : 4 * j + 4] = q

    for sid, transform in frame.sensors.items():
        set_rot(manifest.sensor_joint[sid], quat.normalize(transform.rotation))

    for sensor_joint, intermediates in trunk_segments:
        if not intermediates:
            continue
        q = quat.normalize(frame.sensors[_sensor_of(manifest, sensor_joint)].rotation)
        fraction = quat.slerp(IDENTITY_ROTATION, q, 1.0 / (len(intermediates) + 1))
        for j in intermediates:
            set_rot(j, fraction)

    if fingers > 0.0:
        for j, curl in finger_rots:
            set_rot(j, quat.slerp(IDENTITY_ROTATION, curl, fingers))

    root = frame.sensors[SensorId.HIPS].position
    if not all(math.isfinite(v) for v in root):
        raise ValueError("non-finite hips sensor position")
    positions, _world = manifest.fk(locals_flat, root)

    joints = tuple(
        JointTransform(
            position=(positions[3 * j], positions[3 * j + 1], positions[3 * j + 2]),
            rotation=(
                locals_flat[4 * j],
                locals_flat[4 * j + 1],
                locals_flat[4 * j + 2],
                locals_flat[4 * j + 3],
            ),
        )
        for j in range(n)
    )
    return PoseFull(joints=joints)


def _sensor_of(manifest: SkeletonManifest, joint: int) -> SensorId:
    for sid, j in manifest.sensor_joint.items():
        if j == joint:
            return sid
    raise UnmappedJoint(f"joint {joint} is not sensor-mapped")


def identity_frame(manifest: SkeletonManifest) -> SensorFrame:
    """The rest-pose frame: identity rotations, sensors at their joints' rest positions."""
    sensors = {
        sid: JointTransform(position=manifest.rest_position(j), rotation=IDENTITY_ROTATION)
        for sid, j in manifest.sensor_joint.items()
    }
    return SensorFrame(sensors=sensors)
