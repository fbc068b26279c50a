"""Binary encode/decode for the wire protocol.

Frame layout (all integers little-endian):

    magic        2 bytes  0x48 0x50
    version      u8       1
    msg_type     u8
    room_id      u32
    sender_id    u32      0 = unassigned / server
    seq          u32      monotonic per (sender, stream class)
    timestamp_ms u64      sender clock
    payload_len  u16
    payload      payload_len bytes

decode() is total: arbitrary input either yields an Envelope or raises a
typed error from podium.protocol.errors; nothing else escapes.  Decoded
messages carry the wire-exact float32 values (no renormalization), so
decode(encode(m)) == m bit-for-bit for any valid float32-quantized m.
"""

from __future__ import annotations

import math
import struct

from podium import _kernels
from podium.protocol.errors import (
    BadMagic,
    BadVersion,
    InvariantViolation,
    TruncatedPayload,
    UnknownMsgType,
)
from podium.protocol.types import (
    AudioFrame,
    AvatarManifest,
    CachedPose,
    Envelope,
    Heartbeat,
    JoinAccept,
    JoinRequest,
    JointTransform,
    Leave,
    Locomotion,
    Message,
    MsgType,
    MuteControl,
    MSG_TYPE_OF,
    Phase,
    PhaseChange,
    PoseFull,
    PoseIK,
    Role,
    SlideCommand,
    Snapshot,
    SnapshotEntry,
    TransformSimple,
    FULL_BODY_JOINTS,
    IK_JOINTS,
)

MAGIC = b"\x48\x50"
VERSION = 1

_HEADER = struct.Struct("<2sBBIIIQH")
HEADER_SIZE = _HEADER.size  # 26

JOINT_BLOCK_SIZE = 28
POSE_FULL_PAYLOAD_SIZE = 2 + FULL_BODY_JOINTS * JOINT_BLOCK_SIZE  # 1654
POSE_FULL_FRAME_SIZE = HEADER_SIZE + POSE_FULL_PAYLOAD_SIZE  # 1680
POSE_IK_PAYLOAD_SIZE = 1 + IK_JOINTS * JOINT_BLOCK_SIZE + 1  # 254
POSE_IK_FRAME_SIZE = HEADER_SIZE + POSE_IK_PAYLOAD_SIZE  # 280
TRANSFORM_SIMPLE_PAYLOAD_SIZE = 21

ROTATION_NORM_TOL = 1e-3
_YAW_SLACK = 1e-6  # float32 round-off headroom around +/- pi

_U32_MAX = 0xFFFFFFFF
_U64_MAX = 0xFFFFFFFFFFFFFFFF

_POSE_PAYLOAD_SIZES = {
    MsgType.POSE_FULL: POSE_FULL_PAYLOAD_SIZE,
    MsgType.POSE_IK: POSE_IK_PAYLOAD_SIZE,
    MsgType.TRANSFORM_SIMPLE: TRANSFORM_SIMPLE_PAYLOAD_SIZE,
}

_TS = struct.Struct("<4f")
_TS_INTENSITY = struct.Struct("<f")


def validate_sequence(last_seq: int | None, incoming_seq: int) -> bool:
    """Last-value freshness: accept iff incoming_seq is strictly newer."""
    return last_seq is None or incoming_seq > last_seq


def _check_u32(value: int, name: str) -> int:
    if not 0 <= value <= _U32_MAX:
        raise InvariantViolation(f"{name} out of u32 range: {value}")
    return value


def _joints_to_flat(joints, expected: int, what: str) -> list[float]:
    if len(joints) != expected:
        raise InvariantViolation(f"{what} requires {expected} joints, got {len(joints)}")
    flat: list[float] = []
    for j in joints:
        flat.extend(j.position)
        flat.extend(j.rotation)
    return flat


def _flat_to_joints(vals, count: int) -> tuple[JointTransform, ...]:
    return tuple(
        JointTransform(
            position=(vals[i], vals[i + 1], vals[i + 2]),
            rotation=(vals[i + 3], vals[i + 4], vals[i + 5], vals[i + 6]),
        )
        for i in range(0, 7 * count, 7)
    )


def _pack_joint_block(joints, expected: int, what: str) -> bytes:
    flat = _joints_to_flat(joints, expected, what)
    packed = _kernels.pack_joints(flat)
    # Validate what actually goes on the wire (post-quantization), exactly
    # as the decoder will.
    try:
        _kernels.unpack_joints(packed, 0, expected, ROTATION_NORM_TOL)
    except ValueError as exc:
        raise InvariantViolation(f"{what}: {exc}") from None
    return packed


def _unpack_joint_block(payload, offset: int, count: int) -> tuple[JointTransform, ...]:
    try:
        vals = _kernels.unpack_joints(payload, offset, count, ROTATION_NORM_TOL)
    except (ValueError, struct.error) as exc:
        raise InvariantViolation(str(exc)) from None
    return _flat_to_joints(vals, count)


def _pack_str(s: str, what: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 255:
        raise InvariantViolation(f"{what} exceeds 255 bytes")
    return bytes((len(raw),)) + raw


class _Reader:
    """Bounds-checked cursor over a payload; every overrun is a typed error."""

    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedPayload("payload ends mid-field")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "little")

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "little")

    def u64(self) -> int:
        return int.from_bytes(self.take(8), "little")

    def string(self, what: str) -> str:
        n = self.u8()
        raw = self.take(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise InvariantViolation(f"{what} is not valid UTF-8") from None

    def done(self, what: str) -> None:
        if self.pos != len(self.data):
            raise InvariantViolation(f"{what}: {len(self.data) - self.pos} trailing payload bytes")


def _enum(value: int, enum_cls, what: str):
    try:
        return enum_cls(value)
    except ValueError:
        raise InvariantViolation(f"{what}: invalid value {value}") from None


# ---------------------------------------------------------------------------
# per-type payload encoders


def _enc_pose_full(m: PoseFull) -> bytes:
    if m.space_flag not in (0, 1):
        raise InvariantViolation(f"space_flag must be 0 or 1, got {m.space_flag}")
    block = _pack_joint_block(m.joints, FULL_BODY_JOINTS, "PoseFull")
    return bytes((m.space_flag, FULL_BODY_JOINTS)) + block


def _enc_pose_ik(m: PoseIK) -> bytes:
    loco = _enum(int(m.locomotion), Locomotion, "locomotion")
    block = _pack_joint_block(m.joints, IK_JOINTS, "PoseIK")
    return bytes((IK_JOINTS,)) + block + bytes((int(loco),))


def _enc_transform_simple(m: TransformSimple) -> bytes:
    x, y, z = m.position
    if not all(math.isfinite(v) for v in (x, y, z)):
        raise InvariantViolation("non-finite position")
    if not -math.pi < m.yaw <= math.pi:
        raise InvariantViolation(f"yaw outside (-pi, pi]: {m.yaw}")
    if not 0.0 <= m.intensity <= 1.0:
        raise InvariantViolation(f"intensity outside [0, 1]: {m.intensity}")
    loco = _enum(int(m.locomotion), Locomotion, "locomotion")
    return _TS.pack(x, y, z, m.yaw) + bytes((int(loco),)) + _TS_INTENSITY.pack(m.intensity)


def _enc_slide(m: SlideCommand) -> bytes:
    if not 0 <= m.slide_index <= 0xFFFF:
        raise InvariantViolation(f"slide_index out of u16 range: {m.slide_index}")
    return m.slide_index.to_bytes(2, "little")


def _enc_mute(m: MuteControl) -> bytes:
    return _check_u32(m.target_id, "target_id").to_bytes(4, "little") + bytes((1 if m.muted else 0,))


def _enc_phase(m: PhaseChange) -> bytes:
    return bytes((int(_enum(int(m.phase), Phase, "phase")),))


def _enc_join_request(m: JoinRequest) -> bytes:
    role = _enum(int(m.role), Role, "role")
    return bytes((int(role),)) + _pack_str(m.display_name, "display_name") + _pack_str(m.avatar_ref, "avatar_ref")


def _enc_snapshot(m: Snapshot) -> bytes:
    if not 0 <= m.slide_index <= 0xFFFF:
        raise InvariantViolation(f"slide_index out of u16 range: {m.slide_index}")
    if len(m.entries) > 255:
        raise InvariantViolation("snapshot exceeds 255 participants")
    out = [
        m.slide_index.to_bytes(2, "little"),
        bytes((int(_enum(int(m.phase), Phase, "phase")), len(m.entries))),
    ]
    for e in m.entries:
        out.append(_check_u32(e.participant_id, "participant_id").to_bytes(4, "little"))
        out.append(bytes((int(_enum(int(e.role), Role, "role")), 1 if e.muted else 0)))
        out.append(_pack_str(e.avatar_ref, "avatar_ref"))
        if e.pose is None:
            out.append(b"\x00")
        else:
            expected = _POSE_PAYLOAD_SIZES.get(e.pose.msg_type)
            if expected is None:
                raise InvariantViolation(f"snapshot pose tag {e.pose.msg_type} is not a pose type")
            if len(e.pose.payload) != expected:
                raise InvariantViolation(
                    f"snapshot pose payload is {len(e.pose.payload)} bytes, expected {expected}"
                )
            out.append(bytes((int(e.pose.msg_type),)))
            out.append(_check_u32(e.pose.seq, "pose seq").to_bytes(4, "little"))
            if not 0 <= e.pose.timestamp_ms <= _U64_MAX:
                raise InvariantViolation("pose timestamp out of u64 range")
            out.append(e.pose.timestamp_ms.to_bytes(8, "little"))
            out.append(e.pose.payload)
    return b"".join(out)


def _enc_join_accept(m: JoinAccept) -> bytes:
    role = _enum(int(m.role), Role, "role")
    return (
        _check_u32(m.participant_id, "participant_id").to_bytes(4, "little")
        + bytes((int(role),))
        + _enc_snapshot(m.snapshot)
    )


def _enc_avatar_manifest(m: AvatarManifest) -> bytes:
    role = _enum(int(m.role), Role, "role")
    return (
        _check_u32(m.participant_id, "participant_id").to_bytes(4, "little")
        + bytes((int(role),))
        + _pack_str(m.avatar_ref, "avatar_ref")
    )


def _enc_audio(m: AudioFrame) -> bytes:
    if len(m.data) > 0xFFFF - 0:
        raise InvariantViolation("audio frame exceeds payload capacity")
    return bytes(m.data)


_ENCODERS = {
    MsgType.POSE_FULL: _enc_pose_full,
    MsgType.POSE_IK: _enc_pose_ik,
    MsgType.TRANSFORM_SIMPLE: _enc_transform_simple,
    MsgType.SLIDE_COMMAND: _enc_slide,
    MsgType.MUTE_CONTROL: _enc_mute,
    MsgType.PHASE_CHANGE: _enc_phase,
    MsgType.JOIN_REQUEST: _enc_join_request,
    MsgType.SNAPSHOT: _enc_snapshot,
    MsgType.JOIN_ACCEPT: _enc_join_accept,
    MsgType.AVATAR_MANIFEST: _enc_avatar_manifest,
    MsgType.AUDIO_FRAME: _enc_audio,
    MsgType.LEAVE: lambda m: b"",
    MsgType.HEARTBEAT: lambda m: b"",
}


# ---------------------------------------------------------------------------
# per-type payload decoders


def _dec_pose_full(payload: bytes) -> PoseFull:
    if len(payload) < 2:
        raise TruncatedPayload("PoseFull payload shorter than its fixed fields")
    if payload[1] != FULL_BODY_JOINTS:
        raise InvariantViolation(f"PoseFull joint_count must be 59, got {payload[1]}")
    if len(payload) != POSE_FULL_PAYLOAD_SIZE:
        raise TruncatedPayload(
            f"PoseFull payload is {len(payload)} bytes, expected {POSE_FULL_PAYLOAD_SIZE}"
        )
    space_flag = payload[0]
    if space_flag not in (0, 1):
        raise InvariantViolation(f"space_flag must be 0 or 1, got {space_flag}")
    joints = _unpack_joint_block(payload, 2, FULL_BODY_JOINTS)
    return PoseFull(joints=joints, space_flag=space_flag)


def _dec_pose_ik(payload: bytes) -> PoseIK:
    if len(payload) < 1:
        raise TruncatedPayload("PoseIK payload is empty")
    if payload[0] != IK_JOINTS:
        raise InvariantViolation(f"PoseIK joint_count must be 9, got {payload[0]}")
    if len(payload) != POSE_IK_PAYLOAD_SIZE:
        raise TruncatedPayload(
            f"PoseIK payload is {len(payload)} bytes, expected {POSE_IK_PAYLOAD_SIZE}"
        )
    joints = _unpack_joint_block(payload, 1, IK_JOINTS)
    loco = _enum(payload[-1], Locomotion, "locomotion")
    return PoseIK(joints=joints, locomotion=loco)


def _dec_transform_simple(payload: bytes) -> TransformSimple:
    if len(payload) != TRANSFORM_SIMPLE_PAYLOAD_SIZE:
        raise TruncatedPayload(
            f"TransformSimple payload is {len(payload)} bytes, expected {TRANSFORM_SIMPLE_PAYLOAD_SIZE}"
        )
    x, y, z, yaw = _TS.unpack_from(payload, 0)
    if not all(math.isfinite(v) for v in (x, y, z)):
        raise InvariantViolation("non-finite position")
    if not -math.pi - _YAW_SLACK < yaw <= math.pi + _YAW_SLACK:
        raise InvariantViolation(f"yaw outside (-pi, pi]: {yaw}")
    loco = _enum(payload[16], Locomotion, "locomotion")
    (intensity,) = _TS_INTENSITY.unpack_from(payload, 17)
    if not 0.0 <= intensity <= 1.0:
        raise InvariantViolation(f"intensity outside [0, 1]: {intensity}")
    return TransformSimple(position=(x, y, z), yaw=yaw, locomotion=loco, intensity=intensity)


def _dec_slide(payload: bytes) -> SlideCommand:
    if len(payload) != 2:
        raise TruncatedPayload("SlideCommand payload must be 2 bytes")
    return SlideCommand(slide_index=int.from_bytes(payload, "little"))


def _dec_mute(payload: bytes) -> MuteControl:
    if len(payload) != 5:
        raise TruncatedPayload("MuteControl payload must be 5 bytes")
    if payload[4] not in (0, 1):
        raise InvariantViolation(f"muted flag must be 0 or 1, got {payload[4]}")
    return MuteControl(target_id=int.from_bytes(payload[:4], "little"), muted=bool(payload[4]))


def _dec_phase(payload: bytes) -> PhaseChange:
    if len(payload) != 1:
        raise TruncatedPayload("PhaseChange payload must be 1 byte")
    return PhaseChange(phase=_enum(payload[0], Phase, "phase"))


def _dec_join_request(payload: bytes) -> JoinRequest:
    r = _Reader(payload)
    role = _enum(r.u8(), Role, "role")
    name = r.string("display_name")
    ref = r.string("avatar_ref")
    r.done("JoinRequest")
    return JoinRequest(role=role, display_name=name, avatar_ref=ref)


def _dec_snapshot_body(r: _Reader) -> Snapshot:
    slide = r.u16()
    phase = _enum(r.u8(), Phase, "phase")
    count = r.u8()
    entries = []
    for _ in range(count):
        pid = r.u32()
        role = _enum(r.u8(), Role, "role")
        muted_raw = r.u8()
        if muted_raw not in (0, 1):
            raise InvariantViolation(f"muted flag must be 0 or 1, got {muted_raw}")
        ref = r.string("avatar_ref")
        tag = r.u8()
        pose = None
        if tag != 0:
            msg_type = _enum(tag, MsgType, "snapshot pose tag")
            size = _POSE_PAYLOAD_SIZES.get(msg_type)
            if size is None:
                raise InvariantViolation(f"snapshot pose tag {tag} is not a pose type")
            seq = r.u32()
            ts = r.u64()
            raw = r.take(size)
            decode_payload(msg_type, raw)  # validate; cache stays bit-exact
            pose = CachedPose(msg_type=msg_type, seq=seq, timestamp_ms=ts, payload=raw)
        entries.append(
            SnapshotEntry(
                participant_id=pid, role=role, muted=bool(muted_raw), avatar_ref=ref, pose=pose
            )
        )
    return Snapshot(slide_index=slide, phase=phase, entries=tuple(entries))


def _dec_snapshot(payload: bytes) -> Snapshot:
    r = _Reader(payload)
    snap = _dec_snapshot_body(r)
    r.done("Snapshot")
    return snap


def _dec_join_accept(payload: bytes) -> JoinAccept:
    r = _Reader(payload)
    pid = r.u32()
    role = _enum(r.u8(), Role, "role")
    snap = _dec_snapshot_body(r)
    r.done("JoinAccept")
    return JoinAccept(participant_id=pid, role=role, snapshot=snap)


def _dec_avatar_manifest(payload: bytes) -> AvatarManifest:
    r = _Reader(payload)
    pid = r.u32()
    role = _enum(r.u8(), Role, "role")
    ref = r.string("avatar_ref")
    r.done("AvatarManifest")
    return AvatarManifest(participant_id=pid, role=role, avatar_ref=ref)


def _dec_empty(cls):
    def dec(payload: bytes):
        if payload:
            raise InvariantViolation(f"{cls.__name__} payload must be empty")
        return cls()

    return dec


_DECODERS = {
    MsgType.POSE_FULL: _dec_pose_full,
    MsgType.POSE_IK: _dec_pose_ik,
    MsgType.TRANSFORM_SIMPLE: _dec_transform_simple,
    MsgType.SLIDE_COMMAND: _dec_slide,
    MsgType.MUTE_CONTROL: _dec_mute,
    MsgType.PHASE_CHANGE: _dec_phase,
    MsgType.JOIN_REQUEST: _dec_join_request,
    MsgType.SNAPSHOT: _dec_snapshot,
    MsgType.JOIN_ACCEPT: _dec_join_accept,
    MsgType.AVATAR_MANIFEST: _dec_avatar_manifest,
    MsgType.AUDIO_FRAME: lambda p: AudioFrame(data=bytes(p)),
    MsgType.LEAVE: _dec_empty(Leave),
    MsgType.HEARTBEAT: _dec_empty(Heartbeat),
}


# ---------------------------------------------------------------------------
# public API


def encode_payload(message: Message) -> bytes:
    msg_type = MSG_TYPE_OF.get(type(message))
    if msg_type is None:
        raise InvariantViolation(f"not a wire message: {type(message).__name__}")
    return _ENCODERS[msg_type](message)


def decode_payload(msg_type: MsgType, payload: bytes) -> Message:
    try:
        dec = _DECODERS[msg_type]
    except KeyError:
        raise UnknownMsgType(f"unknown msg_type {int(msg_type)}") from None
    return dec(payload)


def encode(
    message: Message,
    *,
    room_id: int,
    sender_id: int,
    seq: int,
    timestamp_ms: int,
) -> bytes:
    """Frame a message. Raises InvariantViolation on any contract breach (caller bug)."""
    msg_type = MSG_TYPE_OF.get(type(message))
    if msg_type is None:
        raise InvariantViolation(f"not a wire message: {type(message).__name__}")
    payload = _ENCODERS[msg_type](message)
    if len(payload) > 0xFFFF:
        raise InvariantViolation(f"payload too large: {len(payload)} bytes")
    _check_u32(room_id, "room_id")
    _check_u32(sender_id, "sender_id")
    _check_u32(seq, "seq")
    if not 0 <= timestamp_ms <= _U64_MAX:
        raise InvariantViolation(f"timestamp_ms out of u64 range: {timestamp_ms}")
    header = _HEADER.pack(MAGIC, VERSION, int(msg_type), room_id, sender_id, seq, timestamp_ms, len(payload))
    return header + payload


def decode(data: bytes) -> Envelope:
    """Parse one frame. Total over arbitrary bytes: Envelope or a typed error."""
    if len(data) < HEADER_SIZE:
        raise TruncatedPayload(f"frame is {len(data)} bytes, header needs {HEADER_SIZE}")
    magic, version, msg_type_raw, room_id, sender_id, seq, timestamp_ms, payload_len = _HEADER.unpack_from(
        data, 0
    )
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadVersion(f"unsupported version {version}")
    try:
        msg_type = MsgType(msg_type_raw)
    except ValueError:
        raise UnknownMsgType(f"unknown msg_type {msg_type_raw}") from None
    if len(data) < HEADER_SIZE + payload_len:
        raise TruncatedPayload(
            f"payload_len {payload_len} but only {len(data) - HEADER_SIZE} payload bytes present"
        )
    if len(data) > HEADER_SIZE + payload_len:
        raise InvariantViolation(
            f"{len(data) - HEADER_SIZE - payload_len} trailing bytes after payload"
        )
    payload = data[HEADER_SIZE:]
    message = _DECODERS[msg_type](payload)
    return Envelope(
        msg_type=msg_type,
        room_id=room_id,
        sender_id=sender_id,
        seq=seq,
        timestamp_ms=timestamp_ms,
        message=message,
    )


def frame_size(data: bytes) -> int | None:
    """Peek a stream buffer: total frame length if the header is complete, else None.

    Used by the raw-TCP transport, where frames are delimited by payload_len.
    """
    if len(data) < HEADER_SIZE:
        return None
    (payload_len,) = struct.unpack_from("<H", data, HEADER_SIZE - 2)
    return HEADER_SIZE + payload_len
