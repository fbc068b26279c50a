"""Hypothesis strategies generating wire-exact (float32-quantized) messages
for every message type, plus matching header fields."""

import math
import struct

from hypothesis import strategies as st

from podium.protocol.types import (
    AudioFrame,
    AvatarManifest,
    CachedPose,
    Heartbeat,
    JoinAccept,
    JoinRequest,
    JointTransform,
    Leave,
    Locomotion,
    MuteControl,
    Phase,
    PhaseChange,
    PoseFull,
    PoseIK,
    Role,
    SlideCommand,
    Snapshot,
    SnapshotEntry,
    TransformSimple,
)
from podium.protocol import codec


def _f32(x: float) -> float:
    return struct.unpack("<f", struct.pack("<f", x))[0]


coords = st.floats(min_value=-100.0, max_value=100.0, allow_nan=False).map(_f32)
positions = st.tuples(coords, coords, coords)


@st.composite
def unit_quats(draw):
    """Float32-quantized quaternions within decode tolerance of unit norm."""
    raw = [draw(st.floats(-1, 1)) for _ in range(4)]
    n = math.sqrt(sum(v * v for v in raw))
    if n < 1e-3:
        raw = [0.0, 0.0, 0.0, 1.0]
        n = 1.0
    return tuple(_f32(v / n) for v in raw)


joint_transforms = st.builds(JointTransform, position=positions, rotation=unit_quats())

locomotions = st.sampled_from(list(Locomotion))
roles = st.sampled_from(list(Role))
phases = st.sampled_from(list(Phase))

short_text = st.text(
    alphabet=st.characters(codec="utf-8", exclude_categories=("Cs",)), min_size=0, max_size=24
).filter(lambda s: len(s.encode("utf-8")) <= 255)
avatar_refs = short_text.filter(lambda s: 0 < len(s.encode("utf-8")))

pose_fulls = st.builds(
    PoseFull,
    joints=st.lists(joint_transforms, min_size=59, max_size=59).map(tuple),
    space_flag=st.sampled_from((0, 1)),
)
pose_iks = st.builds(
    PoseIK,
    joints=st.lists(joint_transforms, min_size=9, max_size=9).map(tuple),
    locomotion=locomotions,
)
transform_simples = st.builds(
    TransformSimple,
    position=positions,
    yaw=st.floats(min_value=-3.14159, max_value=3.14159).map(_f32),
    locomotion=locomotions,
    intensity=st.floats(min_value=0.0, max_value=1.0).map(_f32),
)
slide_commands = st.builds(SlideCommand, slide_index=st.integers(0, 0xFFFF))
mute_controls = st.builds(MuteControl, target_id=st.integers(0, 2**32 - 1), muted=st.booleans())
phase_changes = st.builds(PhaseChange, phase=phases)
join_requests = st.builds(JoinRequest, role=roles, display_name=short_text, avatar_ref=short_text)
audio_frames = st.builds(AudioFrame, data=st.binary(min_size=0, max_size=512))
leaves = st.just(Leave())
heartbeats = st.just(Heartbeat())


@st.composite
def cached_poses(draw):
    message = draw(st.one_of(pose_fulls, pose_iks, transform_simples))
    return CachedPose(
        msg_type=codec.MSG_TYPE_OF[type(message)],
        seq=draw(st.integers(0, 2**32 - 1)),
        timestamp_ms=draw(st.integers(0, 2**48)),
        payload=codec.encode_payload(message),
    )


snapshot_entries = st.builds(
    SnapshotEntry,
    participant_id=st.integers(1, 2**32 - 1),
    role=roles,
    muted=st.booleans(),
    avatar_ref=short_text,
    pose=st.one_of(st.none(), cached_poses()),
)
snapshots = st.builds(
    Snapshot,
    slide_index=st.integers(0, 0xFFFF),
    phase=phases,
    entries=st.lists(snapshot_entries, min_size=0, max_size=5).map(tuple),
)
join_accepts = st.builds(
    JoinAccept, participant_id=st.integers(1, 2**32 - 1), role=roles, snapshot=snapshots
)

messages = st.one_of(
    join_requests,
    join_accepts,
    snapshots,
    st.builds(AvatarManifest, participant_id=st.integers(1, 2**32 - 1), role=roles, avatar_ref=short_text),
    pose_fulls,
    pose_iks,
    transform_simples,
    slide_commands,
    mute_controls,
    phase_changes,
    audio_frames,
    leaves,
    heartbeats,
)

headers = st.fixed_dictionaries(
    {
        "room_id": st.integers(0, 2**32 - 1),
        "sender_id": st.integers(0, 2**32 - 1),
        "seq": st.integers(0, 2**32 - 1),
        "timestamp_ms": st.integers(0, 2**64 - 1),
    }
)
