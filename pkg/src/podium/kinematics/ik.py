"""Analytic two-bone IK and the nine-joint upper-body solve for headset users.

solve_two_bone places the middle joint by law of cosines in the plane spanned
by the reach line and a pole hint; targets outside [|a-b|, a+b] clamp onto the
reachable sphere.  solve_ik_pose drives head/hands from tracked targets: the
head is taken verbatim, the hips trail the head horizontally with first-order
damping at a fixed height offset, the spine interpolates between them, and
each arm is a two-bone solve from the shoulder implied by the torso frame.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

from podium.kinematics import quat
from podium.kinematics.errors import DegenerateInput
from podium.kinematics.skeleton import SensorId, SkeletonManifest
from podium.protocol.types import JointTransform, Locomotion, PoseIK

# Elbow hint: behind and below the shoulder, nudged outward, in torso space.
# x is the character's left; the right arm mirrors it.
_POLE_LOCAL_LEFT = (0.3, -0.6, -0.74)

_EPS_LEN = 1e-9
_EPS_POLE = 1e-8

# Hips horizontal follow: fraction of the remaining offset consumed per frame
# at the 60 Hz reference rate.
HIPS_DAMPING_PER_FRAME = 0.2


@dataclass(frozen=True, slots=True)
class TwoBoneSolution:
    elbow_pos: tuple[float, float, float]
    end_pos: tuple[float, float, float]
    upper_rotation: tuple[float, float, float, float]
    lower_rotation: tuple[float, float, float, float]
    elbow_angle: float
    reached: bool


@dataclass(frozen=True, slots=True)
class IKTargets:
    """Tracked transforms: head plus both hands, with an optional root hint."""

    head: JointTransform
    left_hand: JointTransform
    right_hand: JointTransform
    root_hint: tuple[float, float, float] | None = None


def _norm3(v) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _scale(v, s):
    return (v[0] * s, v[1] * s, v[2] * s)


def _dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _perp_component(v, direction):
    """v minus its projection on unit `direction`."""
    d = _dot3(v, direction)
    return (v[0] - direction[0] * d, v[1] - direction[1] * d, v[2] - direction[2] * d)


def solve_two_bone(
    shoulder_pos,
    target_pos,
    upper_len: float,
    fore_len: float,
    pole,
    *,
    fallback_pole=(1.0, 0.0, 0.0),
    rest_dir=(1.0, 0.0, 0.0),
) -> TwoBoneSolution:
    """Place elbow and end effector for a two-segment chain.

    `pole` is a direction hint; the elbow lands in the plane spanned by the
    reach line and the pole, on the pole's side.  When the pole is collinear
    with the reach line, `fallback_pole` (the torso's lateral axis for arm
    solves) takes over.  `rest_dir` is the bone direction in the rest pose
    that the returned world rotations are measured against.
    """
    a = float(upper_len)
    b = float(fore_len)
    if a <= 0.0 or b <= 0.0:
        raise DegenerateInput(f"bone lengths must be positive, got {a}, {b}")

    reach_vec = _sub(target_pos, shoulder_pos)
    d = _norm3(reach_vec)
    if d < _EPS_LEN:
        # target on the shoulder: no reach direction; fold along the fallback
        direction = _unit_or(fallback_pole, (0.0, -1.0, 0.0))
    else:
        direction = _scale(reach_vec, 1.0 / d)

    max_reach = a + b
    min_reach = abs(a - b)
    reached = min_reach <= d <= max_reach
    d_eff = min(max(d, min_reach), max_reach)
    end_pos = _add(shoulder_pos, _scale(direction, d_eff))

    cos_elbow = (a * a + b * b - d_eff * d_eff) / (2.0 * a * b)
    cos_elbow = min(1.0, max(-1.0, cos_elbow))
    elbow_angle = math.acos(cos_elbow)

    cos_shoulder = (a * a + d_eff * d_eff - b * b) / (2.0 * a * d_eff)
    cos_shoulder = min(1.0, max(-1.0, cos_shoulder))
    sin_shoulder = math.sqrt(max(0.0, 1.0 - cos_shoulder * cos_shoulder))

    bend = _perp_component(pole, direction)
    if _norm3(bend) < _EPS_POLE:
        bend = _perp_component(fallback_pole, direction)
        if _norm3(bend) < _EPS_POLE:
            raise DegenerateInput("pole and fallback pole both collinear with the reach line")
    bend = _scale(bend, 1.0 / _norm3(bend))

    elbow_pos = _add(
        shoulder_pos,
        _add(_scale(direction, a * cos_shoulder), _scale(bend, a * sin_shoulder)),
    )

    upper_dir = _scale(_sub(elbow_pos, shoulder_pos), 1.0 / a)
    lower_vec = _sub(end_pos, elbow_pos)
    lower_n = _norm3(lower_vec)
    lower_dir = _scale(lower_vec, 1.0 / lower_n) if lower_n > _EPS_LEN else _scale(direction, -1.0)

    return TwoBoneSolution(
        elbow_pos=elbow_pos,
        end_pos=end_pos,
        upper_rotation=quat.from_two_vectors(rest_dir, upper_dir),
        lower_rotation=quat.from_two_vectors(rest_dir, lower_dir),
        elbow_angle=elbow_angle,
        reached=reached,
    )


def _unit_or(v, default):
    n = _norm3(v)
    return _scale(v, 1.0 / n) if n > _EPS_LEN else default


def _yaw_only(rotation) -> tuple[float, float, float, float]:
    """Horizontal heading of a rotation as a rotation about +y (identity at gimbal)."""
    fx, fy, fz = quat.rotate_vector(rotation, (0.0, 0.0, 1.0))
    if abs(fx) < 1e-12 and abs(fz) < 1e-12:
        return quat.IDENTITY
    yaw = math.atan2(fx, fz)
    return quat.from_axis_angle((0.0, 1.0, 0.0), yaw)


class _ArmRig:
    """Per-manifest constants for the nine-joint solve."""

    __slots__ = (
        "hips_j", "spine_j", "head_j", "height_offset", "spine_frac",
        "arms",  # (side sign, shoulder offset from hips, a, b)
    )

    def __init__(self, manifest: SkeletonManifest):
        self.hips_j = manifest.sensor_joint[SensorId.HIPS]
        self.spine_j = manifest.sensor_joint[SensorId.SPINE]
        self.head_j = manifest.sensor_joint[SensorId.HEAD]
        hips0 = manifest.rest_position(self.hips_j)
        head0 = manifest.rest_position(self.head_j)
        spine0 = manifest.rest_position(self.spine_j)
        self.height_offset = head0[1] - hips0[1]
        if self.height_offset <= 0:
            raise DegenerateInput("manifest head does not sit above the hips at rest")
        self.spine_frac = (spine0[1] - hips0[1]) / self.height_offset
        self.arms = []
        for sign, up_s, fo_s, ha_s in (
            (1.0, SensorId.LEFT_UPPER_ARM, SensorId.LEFT_FOREARM, SensorId.LEFT_HAND),
            (-1.0, SensorId.RIGHT_UPPER_ARM, SensorId.RIGHT_FOREARM, SensorId.RIGHT_HAND),
        ):
            sh = manifest.rest_position(manifest.sensor_joint[up_s])
            el = manifest.rest_position(manifest.sensor_joint[fo_s])
            ha = manifest.rest_position(manifest.sensor_joint[ha_s])
            a = _norm3(_sub(el, sh))
            b = _norm3(_sub(ha, el))
            if a <= 0 or b <= 0:
                raise DegenerateInput("manifest arm chain has a zero-length bone")
            self.arms.append((sign, _sub(sh, hips0), a, b))


_rig_cache: "weakref.WeakKeyDictionary[SkeletonManifest, _ArmRig]" = weakref.WeakKeyDictionary()


def _rig(manifest: SkeletonManifest) -> _ArmRig:
    rig = _rig_cache.get(manifest)
    if rig is None:
        rig = _ArmRig(manifest)
        _rig_cache[manifest] = rig
    return rig


def solve_ik_pose(
    targets: IKTargets,
    manifest: SkeletonManifest,
    prev: PoseIK | None = None,
    *,
    damping: float = HIPS_DAMPING_PER_FRAME,
    frames: float = 1.0,
) -> PoseIK:
    """Nine-joint upper-body pose (wire order) from head/hand targets.

    With `prev` given, the hips chase the head horizontally by `damping` per
    60 Hz frame (`frames` scales for other tick rates); without it they snap
    directly under the head.  Locomotion passes through from `prev`.
    """
    rig = _rig(manifest)

    for t in (targets.head, targets.left_hand, targets.right_hand):
        if not all(math.isfinite(v) for v in t.position):
            raise DegenerateInput("non-finite IK target position")
    head_pos = targets.head.position
    head_rot = quat.normalize(targets.head.rotation)

    base = targets.root_hint if targets.root_hint is not None else head_pos
    if prev is not None:
        px, py, pz = prev.joints[0].position
        alpha = 1.0 - (1.0 - damping) ** frames
        hx = px + (base[0] - px) * alpha
        hz = pz + (base[2] - pz) * alpha
    else:
        hx, hz = base[0], base[2]
    hips_pos = (hx, head_pos[1] - rig.height_offset, hz)
    hips_rot = _yaw_only(head_rot)

    f = rig.spine_frac
    spine_pos = (
        hips_pos[0] + (head_pos[0] - hips_pos[0]) * f,
        hips_pos[1] + (head_pos[1] - hips_pos[1]) * f,
        hips_pos[2] + (head_pos[2] - hips_pos[2]) * f,
    )
    spine_rot = quat.slerp(hips_rot, head_rot, f)

    joints = [
        JointTransform(position=hips_pos, rotation=hips_rot),
        JointTransform(position=spine_pos, rotation=spine_rot),
        JointTransform(position=head_pos, rotation=head_rot),
    ]

    for (sign, shoulder_off, a, b), hand in (
        (rig.arms[0], targets.left_hand),
        (rig.arms[1], targets.right_hand),
    ):
        shoulder = _add(hips_pos, quat.rotate_vector(hips_rot, shoulder_off))
        pole_local = (sign * _POLE_LOCAL_LEFT[0], _POLE_LOCAL_LEFT[1], _POLE_LOCAL_LEFT[2])
        pole = quat.rotate_vector(hips_rot, pole_local)
        lateral = quat.rotate_vector(hips_rot, (sign, 0.0, 0.0))
        sol = solve_two_bone(
            shoulder,
            hand.position,
            a,
            b,
            pole,
            fallback_pole=lateral,
            rest_dir=(sign, 0.0, 0.0),
        )
        joints.append(JointTransform(position=shoulder, rotation=sol.upper_rotation))
        joints.append(JointTransform(position=sol.elbow_pos, rotation=sol.lower_rotation))
        joints.append(JointTransform(position=sol.end_pos, rotation=quat.normalize(hand.rotation)))

    return PoseIK(
        joints=tuple(joints),
        locomotion=prev.locomotion if prev is not None else Locomotion.IDLE,
    )
