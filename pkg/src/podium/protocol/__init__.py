from podium.protocol.codec import (
    HEADER_SIZE,
    JOINT_BLOCK_SIZE,
    MAGIC,
    POSE_FULL_FRAME_SIZE,
    POSE_FULL_PAYLOAD_SIZE,
    POSE_IK_FRAME_SIZE,
    POSE_IK_PAYLOAD_SIZE,
    ROTATION_NORM_TOL,
    TRANSFORM_SIMPLE_PAYLOAD_SIZE,
    VERSION,
    decode,
    decode_payload,
    encode,
    encode_payload,
    frame_size,
    validate_sequence,
)
from podium.protocol.errors import (
    BadMagic,
    BadVersion,
    DecodeError,
    InvariantViolation,
    ProtocolError,
    TruncatedPayload,
    UnknownMsgType,
)
from podium.protocol.types import (
    AudioFrame,
    AvatarManifest,
    CachedPose,
    Envelope,
    FULL_BODY_JOINTS,
    Heartbeat,
    IDENTITY_ROTATION,
    IK_JOINT_ORDER,
    IK_JOINTS,
    JoinAccept,
    JoinRequest,
    JointTransform,
    Leave,
    Locomotion,
    Message,
    MsgType,
    MuteControl,
    Phase,
    PhaseChange,
    PoseFull,
    PoseIK,
    POSE_TYPES,
    Role,
    SlideCommand,
    Snapshot,
    SnapshotEntry,
    StreamClass,
    stream_class,
    TransformSimple,
)
