"""Generate the scripted-session fixture for the viewer's headless test.

Frames are produced by the server-side codec so the viewer test exercises
true cross-language decoding: a join accept with a snapshot (presenter pose
cached), an avatar manifest, a 60 Hz slice of full-body poses, ten slide
changes in order, a mute update, and a phase change.

    python scripts/gen_session_fixture.py   # from frontend/
"""

import json
import math
from pathlib import Path

from podium.kinematics import SensorFrame, SensorId, identity_frame, retarget
from podium.kinematics import quat
from podium.kinematics.skeleton import default_manifest
from podium.protocol import codec
from podium.protocol.types import (
    AvatarManifest,
    CachedPose,
    JoinAccept,
    JointTransform,
    MsgType,
    MuteControl,
    Phase,
    PhaseChange,
    Role,
    SlideCommand,
    Snapshot,
    SnapshotEntry,
)

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "session-feed.json"


def presenter_pose(manifest, t_s: float):
    sensors = dict(identity_frame(manifest).sensors)
    sensors[SensorId.HIPS] = JointTransform(
        position=(0.3 * math.sin(t_s), 0.95, -0.8),
        rotation=quat.from_axis_angle((0.0, 1.0, 0.0), 0.3 * math.sin(t_s * 2.0)),
    )
    sensors[SensorId.LEFT_UPPER_ARM] = JointTransform(
        position=(0.0, 0.0, 0.0),
        rotation=quat.from_axis_angle((0.0, 0.0, 1.0), -0.6 - 0.3 * math.sin(t_s * 3.0)),
    )
    return retarget(SensorFrame(sensors=sensors), manifest)


def main() -> None:
    manifest = default_manifest()
    frames: list[str] = []
    server_seq = 0

    def server_frame(message, ts, sender=0):
        nonlocal server_seq
        server_seq += 1
        return codec.encode(message, room_id=1, sender_id=sender, seq=server_seq, timestamp_ms=ts)

    pose0 = presenter_pose(manifest, 0.0)
    snapshot = Snapshot(
        slide_index=0,
        phase=Phase.PRESENTATION,
        entries=(
            SnapshotEntry(
                participant_id=1,
                role=Role.PRESENTER,
                muted=False,
                avatar_ref="avatar://presenter",
                pose=CachedPose(
                    msg_type=MsgType.POSE_FULL,
                    seq=100,
                    timestamp_ms=1000,
                    payload=codec.encode_payload(pose0),
                ),
            ),
            SnapshotEntry(
                participant_id=2, role=Role.AUDIENCE, muted=True, avatar_ref="avatar://viewer"
            ),
        ),
    )
    frames.append(server_frame(JoinAccept(2, Role.AUDIENCE, snapshot), 1000).hex())
    frames.append(
        server_frame(AvatarManifest(3, Role.EXAMINER, "avatar://examiner"), 1010).hex()
    )

    # presenter streams 30 poses at 60 Hz (relayed envelopes keep his header)
    for k in range(1, 31):
        ts = 1000 + int(k * 1000 / 60)
        pose = presenter_pose(manifest, ts / 1000.0)
        frames.append(
            codec.encode(pose, room_id=1, sender_id=1, seq=100 + k, timestamp_ms=ts).hex()
        )

    # ten slide changes, issue order 1..10
    for i in range(10):
        frames.append(
            codec.encode(
                SlideCommand(i + 1), room_id=1, sender_id=1, seq=200 + i, timestamp_ms=1600 + i * 10
            ).hex()
        )

    # presenter unmutes the examiner, then opens the discussion
    frames.append(
        codec.encode(MuteControl(3, False), room_id=1, sender_id=1, seq=300, timestamp_ms=1800).hex()
    )
    frames.append(
        codec.encode(
            PhaseChange(Phase.OPEN_DISCUSSION), room_id=1, sender_id=1, seq=301, timestamp_ms=1810
        ).hex()
    )

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"frames": frames}, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(frames)} frames)")


if __name__ == "__main__":
    main()
