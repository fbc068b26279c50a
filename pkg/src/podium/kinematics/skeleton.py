"""Skeleton manifest: the 59-joint hierarchy shared by retargeting, IK,
bots, and the viewer.

File format (JSON):

    {
      "joints": [{"name": str, "parent": str | null, "rest_offset": [x, y, z]}, ...],
      "sensor_map": {"<sensor_id>": "<joint name>", ...}
    }

Joints must be topologically sorted (parent before child), have a single
root with parent null, and every non-root rest offset must be a real bone
(length > 0).  The sensor map covers the full 17-sensor body set exactly.
Coordinates are meters, y up, character facing +z, +x the character's left.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from podium import _kernels
from podium.kinematics.errors import ManifestError
from podium.protocol.types import FULL_BODY_JOINTS, IDENTITY_ROTATION, JointTransform, PoseFull


class SensorId(str, Enum):
    """The wearable tracker set: hips, spine, head plus seven per side."""

    HIPS = "hips"
    SPINE = "spine"
    HEAD = "head"
    LEFT_SHOULDER = "left_shoulder"
    LEFT_UPPER_ARM = "left_upper_arm"
    LEFT_FOREARM = "left_forearm"
    LEFT_HAND = "left_hand"
    LEFT_THIGH = "left_thigh"
    LEFT_CALF = "left_calf"
    LEFT_FOOT = "left_foot"
    RIGHT_SHOULDER = "right_shoulder"
    RIGHT_UPPER_ARM = "right_upper_arm"
    RIGHT_FOREARM = "right_forearm"
    RIGHT_HAND = "right_hand"
    RIGHT_THIGH = "right_thigh"
    RIGHT_CALF = "right_calf"
    RIGHT_FOOT = "right_foot"


SENSOR_COUNT = 17
assert len(SensorId) == SENSOR_COUNT


@dataclass(frozen=True, eq=False)
class SkeletonManifest:
    names: tuple[str, ...]
    parents: tuple[int, ...]
    rest_offsets: tuple[tuple[float, float, float], ...]
    sensor_joint: dict[SensorId, int]
    index_of: dict[str, int] = field(repr=False)
    bone_lengths: tuple[float, ...] = field(repr=False)
    _offsets_flat: tuple[float, ...] = field(repr=False)
    _rest_positions: tuple[float, ...] = field(repr=False)

    @property
    def joint_count(self) -> int:
        return len(self.names)

    def rest_position(self, joint: int) -> tuple[float, float, float]:
        i = 3 * joint
        p = self._rest_positions
        return (p[i], p[i + 1], p[i + 2])

    def fk(self, local_rotations, root_position):
        """Forward kinematics: flat 4N local rotations -> (flat 3N positions, flat 4N world rotations)."""
        return _kernels.fk_pass(self.parents, self._offsets_flat, local_rotations, root_position)

    def rest_pose(self) -> PoseFull:
        """The manifest as a pose: identity local rotations, FK rest positions."""
        joints = tuple(
            JointTransform(position=self.rest_position(j), rotation=IDENTITY_ROTATION)
            for j in range(self.joint_count)
        )
        return PoseFull(joints=joints)

    def children_of(self, joint: int) -> list[int]:
        return [j for j, p in enumerate(self.parents) if p == joint]


def _validate_and_build(joints_raw, sensor_map_raw) -> SkeletonManifest:
    if len(joints_raw) != FULL_BODY_JOINTS:
        raise ManifestError(f"manifest must define exactly {FULL_BODY_JOINTS} joints, got {len(joints_raw)}")

    names: list[str] = []
    parents: list[int] = []
    offsets: list[tuple[float, float, float]] = []
    index_of: dict[str, int] = {}

    for i, entry in enumerate(joints_raw):
        try:
            name = entry["name"]
            parent_name = entry["parent"]
            off = entry["rest_offset"]
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"joint {i}: missing field {exc}") from None
        if not isinstance(name, str) or not name:
            raise ManifestError(f"joint {i}: bad name")
        if name in index_of:
            raise ManifestError(f"duplicate joint name {name!r}")
        if len(off) != 3 or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in off):
            raise ManifestError(f"joint {name!r}: rest_offset must be 3 finite numbers")
        if parent_name is None:
            parent = -1
        else:
            if parent_name not in index_of:
                raise ManifestError(
                    f"joint {name!r}: parent {parent_name!r} unknown or out of topological order"
                )
            parent = index_of[parent_name]
        if parent == -1 and i != 0:
            raise ManifestError(f"joint {name!r}: second root (single root required)")
        if i == 0 and parent != -1:
            raise ManifestError("first joint must be the root (parent null)")
        names.append(name)
        parents.append(parent)
        offsets.append((float(off[0]), float(off[1]), float(off[2])))
        index_of[name] = i

    bone_lengths = tuple(math.sqrt(x * x + y * y + z * z) for x, y, z in offsets)
    for i in range(1, len(bone_lengths)):
        if bone_lengths[i] <= 0.0:
            raise ManifestError(f"joint {names[i]!r}: zero-length bone")

    sensor_joint: dict[SensorId, int] = {}
    for key, joint_name in sensor_map_raw.items():
        try:
            sid = SensorId(key)
        except ValueError:
            raise ManifestError(f"unknown sensor id {key!r}") from None
        if joint_name not in index_of:
            raise ManifestError(f"sensor {key!r} maps to unknown joint {joint_name!r}")
        if sid in sensor_joint:
            raise ManifestError(f"sensor {key!r} mapped twice")
        sensor_joint[sid] = index_of[joint_name]
    missing = set(SensorId) - set(sensor_joint)
    if missing:
        raise ManifestError(f"sensor_map missing: {sorted(s.value for s in missing)}")

    offsets_flat = tuple(v for o in offsets for v in o)
    identity = list(IDENTITY_ROTATION) * len(names)
    rest_positions, _ = _kernels.fk_pass(parents, offsets_flat, identity, offsets[0])

    return SkeletonManifest(
        names=tuple(names),
        parents=tuple(parents),
        rest_offsets=tuple(offsets),
        sensor_joint=sensor_joint,
        index_of=index_of,
        bone_lengths=bone_lengths,
        _offsets_flat=offsets_flat,
        _rest_positions=tuple(rest_positions),
    )


def load_manifest_dict(data: dict) -> SkeletonManifest:
    try:
        joints_raw = data["joints"]
        sensor_map_raw = data["sensor_map"]
    except (KeyError, TypeError):
        raise ManifestError("manifest needs 'joints' and 'sensor_map'") from None
    return _validate_and_build(joints_raw, sensor_map_raw)


def load_manifest(path: str | Path) -> SkeletonManifest:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from None
    return load_manifest_dict(data)


_default: SkeletonManifest | None = None


def default_manifest() -> SkeletonManifest:
    """The canonical humanoid shipped with the package (cached)."""
    global _default
    if _default is None:
        ref = resources.files("podium.kinematics").joinpath("data/skeleton59.json")
        _default = load_manifest_dict(json.loads(ref.read_text(encoding="utf-8")))
    return _default
