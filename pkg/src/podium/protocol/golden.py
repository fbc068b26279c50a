"""Golden byte vectors: one deterministic frame per message type.

These files pin the wire format across platforms and languages; any decoder
(including the browser viewer) must parse them to the documented field
values, and re-encoding must reproduce the bytes exactly.  The manifest JSON
carries hex plus a human-readable field summary for cross-language tests.

    python -m podium.protocol.golden --write testdata/golden
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

from podium.protocol import codec
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
    MsgType,
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


def _f32(x: float) -> float:
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _joint(i: int) -> JointTransform:
    """Deterministic, wire-exact joint: varied positions, axis-aligned rotations."""
    rots = [
        (0.0, 0.0, 0.0, 1.0),
        (1.0, 0.0, 0.0, 0.0),
        (0.0, _f32(0.6), 0.0, _f32(0.8)),
        (_f32(0.36), 0.0, _f32(0.48), _f32(0.8)),
    ]
    return JointTransform(
        position=(_f32(0.25 * i), _f32(1.0 - 0.01 * i), _f32(-0.5 + 0.125 * i)),
        rotation=rots[i % 4],
    )


def golden_messages() -> dict[str, tuple]:
    """name -> (message, header kwargs)."""
    pose_full = PoseFull(joints=tuple(_joint(i) for i in range(59)))
    pose_ik = PoseIK(joints=tuple(_joint(i) for i in range(9)), locomotion=Locomotion.WALK)
    simple = TransformSimple(
        position=(_f32(1.5), 0.0, _f32(-2.25)),
        yaw=_f32(0.7853981),
        locomotion=Locomotion.IDLE,
        intensity=_f32(0.375),
    )
    snapshot = Snapshot(
        slide_index=4,
        phase=Phase.OPEN_DISCUSSION,
        entries=(
            SnapshotEntry(
                participant_id=1,
                role=Role.PRESENTER,
                muted=False,
                avatar_ref="avatar://presenter",
                pose=CachedPose(
                    msg_type=MsgType.POSE_FULL,
                    seq=42,
                    timestamp_ms=777_000,
                    payload=codec.encode_payload(pose_full),
                ),
            ),
            SnapshotEntry(
                participant_id=2,
                role=Role.AUDIENCE,
                muted=True,
                avatar_ref="avatar://generic-3",
                pose=None,
            ),
        ),
    )
    return {
        "join_request": (
            JoinRequest(role=Role.EXAMINER, display_name="Dr. Vector", avatar_ref="avatar://examiner-1"),
            dict(room_id=9, sender_id=0, seq=1, timestamp_ms=1_700_000_000_000),
        ),
        "join_accept": (
            JoinAccept(participant_id=3, role=Role.EXAMINER, snapshot=snapshot),
            dict(room_id=9, sender_id=0, seq=17, timestamp_ms=1_700_000_000_123),
        ),
        "snapshot": (snapshot, dict(room_id=9, sender_id=0, seq=18, timestamp_ms=1_700_000_000_456)),
        "avatar_manifest": (
            AvatarManifest(participant_id=3, role=Role.EXAMINER, avatar_ref="avatar://examiner-1"),
            dict(room_id=9, sender_id=0, seq=19, timestamp_ms=1_700_000_000_789),
        ),
        "pose_full": (pose_full, dict(room_id=9, sender_id=1, seq=1001, timestamp_ms=50_016)),
        "pose_ik": (pose_ik, dict(room_id=9, sender_id=3, seq=2002, timestamp_ms=50_033)),
        "transform_simple": (simple, dict(room_id=9, sender_id=4, seq=3003, timestamp_ms=50_050)),
        "slide_command": (SlideCommand(slide_index=7), dict(room_id=9, sender_id=1, seq=1002, timestamp_ms=51_000)),
        "mute_control": (MuteControl(target_id=4, muted=False), dict(room_id=9, sender_id=1, seq=1003, timestamp_ms=52_000)),
        "phase_change": (PhaseChange(phase=Phase.CLOSED_DISCUSSION), dict(room_id=9, sender_id=1, seq=1004, timestamp_ms=53_000)),
        "audio_frame": (AudioFrame(data=bytes(range(48))), dict(room_id=9, sender_id=2, seq=4004, timestamp_ms=54_000)),
        "leave": (Leave(), dict(room_id=9, sender_id=4, seq=5, timestamp_ms=55_000)),
        "heartbeat": (Heartbeat(), dict(room_id=9, sender_id=2, seq=6, timestamp_ms=56_000)),
    }


def golden_frames() -> dict[str, bytes]:
    return {
        name: codec.encode(message, **header) for name, (message, header) in golden_messages().items()
    }


def write_golden(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    written = []
    for name, (message, header) in sorted(golden_messages().items()):
        data = codec.encode(message, **header)
        path = directory / f"{name}.bin"
        path.write_bytes(data)
        written.append(path)
        manifest.append(
            {
                "name": name,
                "msg_type": int(codec.MSG_TYPE_OF[type(message)]),
                "size": len(data),
                "header": header,
                "hex": data.hex(),
            }
        )
    index = directory / "golden.json"
    index.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    written.append(index)
    return written


def verify_golden(directory: str | Path) -> None:
    """Every stored frame must decode to the constructed message and re-encode
    to identical bytes."""
    directory = Path(directory)
    for name, (message, header) in golden_messages().items():
        data = (directory / f"{name}.bin").read_bytes()
        env = codec.decode(data)
        if env.message != message:
            raise AssertionError(f"golden {name}: decoded message mismatch")
        if codec.encode(message, **header) != data:
            raise AssertionError(f"golden {name}: re-encoded bytes differ")


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--write", metavar="DIR", help="write golden vectors to DIR")
    parser.add_argument("--verify", metavar="DIR", help="verify golden vectors in DIR")
    args = parser.parse_args(argv)
    if args.write:
        for p in write_golden(args.write):
            print(f"wrote {p}")
    if args.verify:
        verify_golden(args.verify)
        print("golden vectors verified")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
