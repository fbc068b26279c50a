"""Wire message types.

Thirteen message kinds ride inside a fixed 26-byte envelope header.  All
multi-byte integers are little-endian; all floats are IEEE float32.  Pose
payloads are built from 28-byte joint blocks: position (x, y, z) in meters
followed by rotation quaternion (x, y, z, w).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum


class MsgType(IntEnum):
    JOIN_REQUEST = 1
    JOIN_ACCEPT = 2
    SNAPSHOT = 3
    AVATAR_MANIFEST = 4
    POSE_FULL = 5
    POSE_IK = 6
    TRANSFORM_SIMPLE = 7
    SLIDE_COMMAND = 8
    MUTE_CONTROL = 9
    PHASE_CHANGE = 10
    AUDIO_FRAME = 11
    LEAVE = 12
    HEARTBEAT = 13


class Role(IntEnum):
    PRESENTER = 0
    EXAMINER = 1
    AUDIENCE = 2
    ONSITE_BRIDGE = 3


class Phase(IntEnum):
    PRESENTATION = 0
    OPEN_DISCUSSION = 1
    CLOSED_DISCUSSION = 2
    ANNOUNCEMENT = 3


class Locomotion(IntEnum):
    IDLE = 0
    WALK = 1


class StreamClass(IntEnum):
    """Sequence-number streams; seq must strictly increase per (sender, class)."""

    CONTROL = 0
    POSE = 1
    SLIDE = 2
    MUTE = 3
    PHASE = 4
    AUDIO = 5


_STREAM_OF = {
    MsgType.POSE_FULL: StreamClass.POSE,
    MsgType.POSE_IK: StreamClass.POSE,
    MsgType.TRANSFORM_SIMPLE: StreamClass.POSE,
    MsgType.SLIDE_COMMAND: StreamClass.SLIDE,
    MsgType.MUTE_CONTROL: StreamClass.MUTE,
    MsgType.PHASE_CHANGE: StreamClass.PHASE,
    MsgType.AUDIO_FRAME: StreamClass.AUDIO,
}


def stream_class(msg_type: MsgType) -> StreamClass:
    return _STREAM_OF.get(msg_type, StreamClass.CONTROL)


# Pose message kinds, i.e. what a Snapshot entry may cache.
POSE_TYPES = (MsgType.POSE_FULL, MsgType.POSE_IK, MsgType.TRANSFORM_SIMPLE)

FULL_BODY_JOINTS = 59
IK_JOINTS = 9

# PoseIK joint order on the wire.
IK_JOINT_ORDER = (
    "hips",
    "spine",
    "head",
    "left_upper_arm",
    "left_forearm",
    "left_hand",
    "right_upper_arm",
    "right_forearm",
    "right_hand",
)


@dataclass(frozen=True, slots=True)
class JointTransform:
    """One joint: position in meters plus unit rotation quaternion (x, y, z, w)."""

    position: tuple[float, float, float]
    rotation: tuple[float, float, float, float]


IDENTITY_ROTATION = (0.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True, slots=True)
class PoseFull:
    """Full-body pose: 59 joints ordered per the skeleton manifest.

    Joint positions are forward-kinematics results in skeleton space
    (space_flag 0); rotations are per-joint local rotations relative to the
    rest pose, so directly sensor-mapped joints carry the sensor rotations.
    """

    joints: tuple[JointTransform, ...]
    space_flag: int = 0


@dataclass(frozen=True, slots=True)
class PoseIK:
    """Nine-joint upper-body pose (IK_JOINT_ORDER) in world space, plus gait state."""

    joints: tuple[JointTransform, ...]
    locomotion: Locomotion = Locomotion.IDLE


@dataclass(frozen=True, slots=True)
class TransformSimple:
    """Browser-user stream: root position, yaw, gait state, input intensity."""

    position: tuple[float, float, float]
    yaw: float
    locomotion: Locomotion
    intensity: float


@dataclass(frozen=True, slots=True)
class SlideCommand:
    slide_index: int


@dataclass(frozen=True, slots=True)
class MuteControl:
    target_id: int
    muted: bool


@dataclass(frozen=True, slots=True)
class PhaseChange:
    phase: Phase


@dataclass(frozen=True, slots=True)
class JoinRequest:
    role: Role
    display_name: str
    avatar_ref: str


@dataclass(frozen=True, slots=True)
class CachedPose:
    """A pose payload held verbatim (bit-exact) with its original envelope header bits."""

    msg_type: MsgType
    seq: int
    timestamp_ms: int
    payload: bytes

    def decoded(self):
        from podium.protocol.codec import decode_payload

        return decode_payload(self.msg_type, self.payload)


@dataclass(frozen=True, slots=True)
class SnapshotEntry:
    participant_id: int
    role: Role
    muted: bool
    avatar_ref: str
    pose: CachedPose | None = None


@dataclass(frozen=True, slots=True)
class Snapshot:
    """Authoritative room state for late joiners: one entry per live participant."""

    slide_index: int
    phase: Phase
    entries: tuple[SnapshotEntry, ...] = ()


@dataclass(frozen=True, slots=True)
class JoinAccept:
    participant_id: int
    role: Role
    snapshot: Snapshot


@dataclass(frozen=True, slots=True)
class AvatarManifest:
    participant_id: int
    role: Role
    avatar_ref: str


@dataclass(frozen=True, slots=True)
class AudioFrame:
    """Opaque audio bytes; this artifact relays and meters them, never decodes them."""

    data: bytes


@dataclass(frozen=True, slots=True)
class Leave:
    pass


@dataclass(frozen=True, slots=True)
class Heartbeat:
    pass


Message = (
    JoinRequest
    | JoinAccept
    | Snapshot
    | AvatarManifest
    | PoseFull
    | PoseIK
    | TransformSimple
    | SlideCommand
    | MuteControl
    | PhaseChange
    | AudioFrame
    | Leave
    | Heartbeat
)


MSG_TYPE_OF = {
    JoinRequest: MsgType.JOIN_REQUEST,
    JoinAccept: MsgType.JOIN_ACCEPT,
    Snapshot: MsgType.SNAPSHOT,
    AvatarManifest: MsgType.AVATAR_MANIFEST,
    PoseFull: MsgType.POSE_FULL,
    PoseIK: MsgType.POSE_IK,
    TransformSimple: MsgType.TRANSFORM_SIMPLE,
    SlideCommand: MsgType.SLIDE_COMMAND,
    MuteControl: MsgType.MUTE_CONTROL,
    PhaseChange: MsgType.PHASE_CHANGE,
    AudioFrame: MsgType.AUDIO_FRAME,
    Leave: MsgType.LEAVE,
    Heartbeat: MsgType.HEARTBEAT,
}


@dataclass(frozen=True, slots=True)
class Envelope:
    """A decoded frame: header fields plus the typed message."""

    msg_type: MsgType
    room_id: int
    sender_id: int
    seq: int
    timestamp_ms: int
    message: Message = field(compare=True)
