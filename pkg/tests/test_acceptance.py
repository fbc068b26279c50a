"""Acceptance suite: every primary criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass/fail line
per criterion.  Each criterion is one test; tolerances are pinned here and
nowhere else.
"""

import math
import random
import struct
import sys
import time
from pathlib import Path

import pytest

from authority import authority_model_check
from equivalence import run_equivalence_trial
from podium.animation import LocomotionState, update_locomotion
from podium.harness.scenarios import run_scenario
from podium.kinematics import (
    DegenerateInput,
    SensorFrame,
    SensorId,
    identity_frame,
    retarget,
    solve_two_bone,
)
from podium.kinematics import quat
from podium.kinematics.skeleton import default_manifest
from podium.protocol import codec
from podium.protocol.errors import ProtocolError
from podium.protocol.golden import golden_frames, verify_golden
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

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "testdata" / "golden"
TRACES_DIR = Path(__file__).resolve().parent.parent / "traces"


def report(name: str, detail: str) -> None:
    print(f"ACCEPTANCE {name}: PASS ({detail})", file=sys.stderr)


def _f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _unit_quat(rng):
    while True:
        q = tuple(rng.gauss(0, 1) for _ in range(4))
        n = math.sqrt(sum(v * v for v in q))
        if n > 1e-6:
            return tuple(_f32(v / n) for v in q)


def _joint(rng):
    return JointTransform(
        position=tuple(_f32(rng.uniform(-50, 50)) for _ in range(3)),
        rotation=_unit_quat(rng),
    )


def _text(rng, max_bytes=24):
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-_./:"
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_bytes)))


def _random_message(rng, msg_type):
    if msg_type is MsgType.POSE_FULL:
        return PoseFull(
            joints=tuple(_joint(rng) for _ in range(59)), space_flag=rng.randint(0, 1)
        )
    if msg_type is MsgType.POSE_IK:
        return PoseIK(
            joints=tuple(_joint(rng) for _ in range(9)),
            locomotion=Locomotion(rng.randint(0, 1)),
        )
    if msg_type is MsgType.TRANSFORM_SIMPLE:
        return TransformSimple(
            position=tuple(_f32(rng.uniform(-50, 50)) for _ in range(3)),
            yaw=_f32(rng.uniform(-3.14159, 3.14159)),
            locomotion=Locomotion(rng.randint(0, 1)),
            intensity=_f32(rng.random()),
        )
    if msg_type is MsgType.SLIDE_COMMAND:
        return SlideCommand(rng.randint(0, 0xFFFF))
    if msg_type is MsgType.MUTE_CONTROL:
        return MuteControl(rng.randint(0, 2**32 - 1), rng.random() < 0.5)
    if msg_type is MsgType.PHASE_CHANGE:
        return PhaseChange(Phase(rng.randint(0, 3)))
    if msg_type is MsgType.JOIN_REQUEST:
        return JoinRequest(Role(rng.randint(0, 3)), _text(rng), _text(rng))
    if msg_type is MsgType.AVATAR_MANIFEST:
        return AvatarManifest(rng.randint(1, 2**32 - 1), Role(rng.randint(0, 3)), _text(rng))
    if msg_type is MsgType.AUDIO_FRAME:
        return AudioFrame(rng.randbytes(rng.randint(0, 256)))
    if msg_type is MsgType.LEAVE:
        return Leave()
    if msg_type is MsgType.HEARTBEAT:
        return Heartbeat()
    # snapshot / join accept
    entries = []
    for pid in range(1, rng.randint(1, 5)):
        pose = None
        if rng.random() < 0.6:
            inner_type = rng.choice(
                (MsgType.POSE_FULL, MsgType.POSE_IK, MsgType.TRANSFORM_SIMPLE)
            )
            pose = CachedPose(
                msg_type=inner_type,
                seq=rng.randint(0, 2**32 - 1),
                timestamp_ms=rng.randint(0, 2**48),
                payload=codec.encode_payload(_random_message(rng, inner_type)),
            )
        entries.append(
            SnapshotEntry(pid, Role(rng.randint(0, 3)), rng.random() < 0.5, _text(rng), pose)
        )
    snap = Snapshot(rng.randint(0, 0xFFFF), Phase(rng.randint(0, 3)), tuple(entries))
    if msg_type is MsgType.SNAPSHOT:
        return snap
    return JoinAccept(rng.randint(1, 2**32 - 1), Role(rng.randint(0, 3)), snap)


def test_codec_conformance():
    """Round-trip 10k+ randomized messages over all 13 types; fuzz-decode 1M
    buffers with zero crashes; golden vectors stable. Under one minute."""
    started = time.monotonic()
    rng = random.Random(0xC0DEC)

    all_types = list(MsgType)
    n_messages = 10_010
    for i in range(n_messages):
        msg_type = all_types[i % len(all_types)]
        message = _random_message(rng, msg_type)
        header = dict(
            room_id=rng.randint(0, 2**32 - 1),
            sender_id=rng.randint(0, 2**32 - 1),
            seq=rng.randint(0, 2**32 - 1),
            timestamp_ms=rng.randint(0, 2**64 - 1),
        )
        data = codec.encode(message, **header)
        env = codec.decode(data)
        assert env.message == message, f"round-trip mismatch for {msg_type}"
        assert codec.encode(env.message, **header) == data

    # fuzz: total decoder, typed errors only
    seeds = [bytes(frame) for frame in golden_frames().values()]
    n_fuzz = 1_000_000
    crashes = 0
    for i in range(n_fuzz):
        if i % 3 == 0:
            buf = bytearray(seeds[i % len(seeds)])
            for _ in range(rng.randint(1, 10)):
                buf[rng.randrange(len(buf))] = rng.randrange(256)
            data = bytes(buf)
        elif i % 3 == 1:
            data = rng.randbytes(rng.randint(0, 80))
        else:
            data = rng.randbytes(rng.randint(0, 40)) + seeds[i % len(seeds)][: rng.randint(0, 60)]
        try:
            codec.decode(data)
        except ProtocolError:
            pass
        except Exception:  # noqa: BLE001 - the criterion is "typed errors only"
            crashes += 1
    assert crashes == 0

    verify_golden(GOLDEN_DIR)
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"codec conformance took {elapsed:.1f}s (budget 60s)"
    report(
        "codec-conformance",
        f"{n_messages} round trips over 13 types, {n_fuzz} fuzz buffers, 0 crashes, "
        f"golden stable, {elapsed:.1f}s",
    )


def test_size_constants():
    """Encoded PoseFull is exactly 1680 bytes and PoseIK exactly 280."""
    rng = random.Random(1)
    header = dict(room_id=1, sender_id=2, seq=3, timestamp_ms=4)
    for _ in range(25):
        full = codec.encode(_random_message(rng, MsgType.POSE_FULL), **header)
        ik = codec.encode(_random_message(rng, MsgType.POSE_IK), **header)
        assert len(full) == 1680 == codec.POSE_FULL_FRAME_SIZE
        assert len(ik) == 280 == codec.POSE_IK_FRAME_SIZE
    report("size-constants", "PoseFull=1680 B, PoseIK=280 B, exact")


def test_ik_oracle():
    """10k random reachable targets: end-effector < 1e-5 m, elbow angle within
    1e-6 rad of law of cosines; unreachable targets clamp to the sphere."""
    rng = random.Random(0x1C)
    n_reach = 10_000
    worst_end = 0.0
    worst_angle = 0.0
    for _ in range(n_reach):
        a = rng.uniform(0.05, 0.8)
        b = rng.uniform(0.05, 0.8)
        shoulder = tuple(rng.uniform(-1, 1) for _ in range(3))
        d = rng.uniform(abs(a - b) + 1e-4, (a + b) - 1e-4)
        direction = [rng.gauss(0, 1) for _ in range(3)]
        n = math.sqrt(sum(v * v for v in direction)) or 1.0
        target = tuple(s + d * v / n for s, v in zip(shoulder, direction))
        pole = tuple(rng.gauss(0, 1) for _ in range(3))
        try:
            sol = solve_two_bone(shoulder, target, a, b, pole)
        except DegenerateInput:
            continue
        assert sol.reached
        worst_end = max(worst_end, math.dist(sol.end_pos, target))
        expected = math.acos(max(-1.0, min(1.0, (a * a + b * b - d * d) / (2 * a * b))))
        worst_angle = max(worst_angle, abs(sol.elbow_angle - expected))
    assert worst_end < 1e-5, worst_end
    assert worst_angle < 1e-6, worst_angle

    worst_clamp = 0.0
    for _ in range(2000):
        a = rng.uniform(0.05, 0.8)
        b = rng.uniform(0.05, 0.8)
        shoulder = tuple(rng.uniform(-1, 1) for _ in range(3))
        d = rng.uniform((a + b) * 1.01, (a + b) * 3)
        direction = [rng.gauss(0, 1) for _ in range(3)]
        n = math.sqrt(sum(v * v for v in direction)) or 1.0
        target = tuple(s + d * v / n for s, v in zip(shoulder, direction))
        sol = solve_two_bone(shoulder, target, a, b, tuple(rng.gauss(0, 1) for _ in range(3)))
        assert not sol.reached
        err = math.dist(sol.end_pos, target)
        worst_clamp = max(worst_clamp, abs(err - (d - (a + b))))
    assert worst_clamp < 1e-5, worst_clamp
    report(
        "ik-oracle",
        f"{n_reach} reachable: end<={worst_end:.2e} m, angle<={worst_angle:.2e} rad; "
        f"2000 unreachable clamp err<={worst_clamp:.2e} m",
    )


def test_retarget_identity():
    """Identity sensor frame reproduces the rest pose bit-for-bit; a rotated
    root matches the FK oracle within 1e-5 m."""
    manifest = default_manifest()
    pose = retarget(identity_frame(manifest), manifest)
    assert pose == manifest.rest_pose()

    rot90 = quat.from_axis_angle((0.0, 1.0, 0.0), math.pi / 2)
    sensors = dict(identity_frame(manifest).sensors)
    sensors[SensorId.HIPS] = JointTransform(manifest.rest_position(0), rot90)
    rotated = retarget(SensorFrame(sensors=sensors), manifest)
    root = manifest.rest_position(0)
    worst = 0.0
    for j in range(manifest.joint_count):
        rest = manifest.rest_position(j)
        rel = tuple(rest[k] - root[k] for k in range(3))
        expect = tuple(root[k] + v for k, v in enumerate(quat.rotate_vector(rot90, rel)))
        worst = max(worst, math.dist(expect, rotated.joints[j].position))
    assert worst < 1e-5, worst
    report("retarget-identity", f"rest pose bit-exact; rotated-root err<={worst:.2e} m")


def test_snapshot_equivalence():
    """1000 random traces (3-6 participants, depth <= 50): late join via
    snapshot equals the eager view, field-exact."""
    rng = random.Random(0x55AA)
    n = 1000
    for i in range(n):
        eager, late = run_equivalence_trial(rng, min_actors=3, max_actors=6, depth=50)
        assert eager == late, f"divergence in trial {i}"
    report("snapshot-equivalence", f"{n} random traces, field-exact")


def test_authority_model_check():
    """Exhaustive depth-6 enumeration: no accepted non-presenter slide/phase
    mutation, no accepted presentation-phase self-unmute."""
    result = authority_model_check(depth=6)
    assert result.violations == [], result.violations
    report(
        "authority-model-check",
        f"{result.states_visited} states, {result.transitions_checked} transitions, 0 violations",
    )


def test_scenario_bandwidth_and_runtime():
    """Presentation: presenter uplink 100.8 kB/s +/-1%, headset bot 16.8 kB/s
    +/-1% on lossless in-process transport; all scenarios inside 2 minutes."""
    started = time.monotonic()
    presentation = run_scenario("presentation", seed=11, traces_dir=TRACES_DIR)
    handshake = run_scenario(
        "handshake", seed=11, latency_ms=50, loss=0.05, traces_dir=TRACES_DIR
    )
    freestyle = run_scenario("freestyle", seed=11, traces_dir=TRACES_DIR)
    elapsed = time.monotonic() - started

    up_presenter = presentation.metrics.per_role["presenter"]["uplink_bytes_per_s"]
    up_headset = presentation.metrics.per_role["examiner"]["uplink_bytes_per_s"]
    assert abs(up_presenter - 100_800.0) <= 1008.0, up_presenter
    assert abs(up_headset - 16_800.0) <= 168.0, up_headset
    assert presentation.details["slides_observed"] == list(range(1, 11))
    assert elapsed < 120.0, f"harness run took {elapsed:.1f}s (budget 120s)"
    assert freestyle.metrics.mean_positional_error_m < 0.05
    assert handshake.metrics.dropped_frames > 0
    report(
        "scenario-bandwidth",
        f"presenter {up_presenter:.0f} B/s, headset {up_headset:.0f} B/s, "
        f"3 scenarios in {elapsed:.1f}s",
    )


def test_handshake_scenario():
    """Remote-view wrist proximity <= 0.12 m sustained >= 1 s under 50 ms
    latency and 5% loss, deterministic per seed."""
    a = run_scenario("handshake", seed=77, latency_ms=50, loss=0.05, traces_dir=TRACES_DIR)
    assert a.details["held_below_threshold_ms"] >= 1000.0
    assert a.details["min_wrist_distance_m"] <= 0.12
    b = run_scenario("handshake", seed=77, latency_ms=50, loss=0.05, traces_dir=TRACES_DIR)
    assert a.metrics.to_json() == b.metrics.to_json()
    report(
        "handshake-scenario",
        f"wrist hold {a.details['held_below_threshold_ms']:.0f} ms "
        f"(min {a.details['min_wrist_distance_m']:.4f} m), seed-deterministic",
    )


def test_hysteresis_property():
    """100k random speed steps: at most one gait transition per full crossing
    of the 0.10-0.15 m/s band (plus the initial entry)."""
    rng = random.Random(0xBEEF)
    n = 100_000
    state = LocomotionState()
    speed = 0.0
    transitions = 0
    crossings = 0
    side = None
    for i in range(n):
        speed = min(0.4, max(0.0, speed + rng.uniform(-0.04, 0.04)))
        new = update_locomotion(state, speed, now_ms=i)
        if new.state is not state.state:
            transitions += 1
        state = new
        if speed < 0.10:
            if side == "above":
                crossings += 1
            side = "below"
        elif speed > 0.15:
            if side == "below":
                crossings += 1
            side = "above"
    assert transitions <= crossings + 1, (transitions, crossings)
    report(
        "hysteresis-property",
        f"{n} steps, {transitions} transitions, {crossings} band crossings, no chatter",
    )
