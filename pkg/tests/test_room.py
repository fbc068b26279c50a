"""Room authority, relay transparency, snapshots, liveness, determinism."""

from podium.protocol import codec
from podium.protocol.types import (
    AudioFrame,
    Heartbeat,
    JoinRequest,
    JointTransform,
    Leave,
    MsgType,
    MuteControl,
    Phase,
    PhaseChange,
    PoseFull,
    PoseIK,
    Role,
    SlideCommand,
    Snapshot,
    TransformSimple,
)
from podium.server.room import Close, Room, RoomConfig, Send

IDENTITY = (0.0, 0.0, 0.0, 1.0)


def make_room(**overrides):
    cfg = dict(room_id=1, deck_size=40, max_participants=8)
    cfg.update(overrides)
    return Room(RoomConfig(**cfg))


def join(room, role, name="bot", ref="avatar://x", now=0):
    env = codec.decode(
        codec.encode(JoinRequest(role, name, ref), room_id=1, sender_id=0, seq=1, timestamp_ms=now)
    )
    return room.handle_join(env, now)


def frame(message, sender, seq, ts=0):
    return codec.encode(message, room_id=1, sender_id=sender, seq=seq, timestamp_ms=ts)


def pose_full(x=0.0):
    joints = tuple(JointTransform((x, 1.0, 0.0), IDENTITY) for _ in range(59))
    return PoseFull(joints=joints)


def pose_ik(x=0.0):
    return PoseIK(joints=tuple(JointTransform((x, 1.0, 0.0), IDENTITY) for _ in range(9)))


def sends(effects):
    return [e for e in effects if isinstance(e, Send)]


def closes(effects):
    return [e for e in effects if isinstance(e, Close)]


# -- joins ------------------------------------------------------------------


def test_first_join_presenter_gets_id_1_and_base_snapshot():
    room = make_room()
    d = join(room, Role.PRESENTER, "alice")
    assert d.participant_id == 1
    accept = codec.decode(d.effects[0].data).message
    assert accept.participant_id == 1 and accept.role is Role.PRESENTER
    assert accept.snapshot.slide_index == 0
    assert accept.snapshot.phase is Phase.PRESENTATION
    assert len(accept.snapshot.entries) == 1  # the joiner itself


def test_second_presenter_conflict():
    room = make_room()
    join(room, Role.PRESENTER)
    d = join(room, Role.PRESENTER)
    assert d.participant_id is None and d.reason == "PresenterConflict"


def test_room_full():
    room = make_room(max_participants=2)
    join(room, Role.PRESENTER)
    join(room, Role.AUDIENCE)
    d = join(room, Role.AUDIENCE)
    assert d.reason == "RoomFull"


def test_bad_avatar_ref():
    room = make_room()
    d = join(room, Role.AUDIENCE, ref="")
    assert d.reason == "BadAvatarRef"


def test_audience_join_blocked_during_closed_discussion():
    room = make_room()
    join(room, Role.PRESENTER)
    room.handle_frame(1, frame(PhaseChange(Phase.CLOSED_DISCUSSION), 1, 2), 0)
    d = join(room, Role.AUDIENCE)
    assert d.reason == "PhaseRestricted"
    d2 = join(room, Role.EXAMINER)
    assert d2.participant_id is not None


def test_mute_defaults():
    room = make_room()
    join(room, Role.PRESENTER)
    join(room, Role.EXAMINER)
    join(room, Role.AUDIENCE)
    join(room, Role.ONSITE_BRIDGE)
    muted = {p.role: p.muted for p in room.participants.values()}
    assert muted[Role.PRESENTER] is False
    assert muted[Role.ONSITE_BRIDGE] is False  # carries the shared room audio
    assert muted[Role.EXAMINER] is True
    assert muted[Role.AUDIENCE] is True


def test_manifest_broadcast_to_others_only():
    room = make_room()
    join(room, Role.PRESENTER)
    d = join(room, Role.AUDIENCE)
    manifests = [codec.decode(e.data) for e in d.effects[1:]]
    assert [e.target_id for e in d.effects[1:]] == [1]
    assert all(m.msg_type is MsgType.AVATAR_MANIFEST for m in manifests)
    assert manifests[0].message.role is Role.AUDIENCE


# -- pose relay ----------------------------------------------------------------


def test_pose_relayed_byte_identical():
    room = make_room()
    join(room, Role.PRESENTER)
    join(room, Role.AUDIENCE)
    join(room, Role.EXAMINER)
    data = frame(pose_full(1.0), 1, 10, ts=500)
    effects = room.handle_frame(1, data, 500)
    assert sorted(e.target_id for e in sends(effects)) == [2, 3]
    assert all(e.data == data for e in sends(effects))  # relay transparency
    assert room.participants[1].last_pose.payload == data[codec.HEADER_SIZE :]
    assert room.participants[1].last_pose.seq == 10


def test_stale_pose_dropped_silently():
    room = make_room()
    join(room, Role.PRESENTER)
    join(room, Role.AUDIENCE)
    room.handle_frame(1, frame(pose_full(1.0), 1, 10), 0)
    effects = room.handle_frame(1, frame(pose_full(2.0), 1, 9), 1)
    assert effects == []
    assert room.counters["stale_dropped"] == 1
    cached = codec.decode_payload(MsgType.POSE_FULL, room.participants[1].last_pose.payload)
    assert cached.joints[0].position[0] == 1.0  # cache unchanged


def test_role_stream_mismatch_rejected():
    room = make_room()
    join(room, Role.PRESENTER)
    d = join(room, Role.AUDIENCE)
    effects = room.handle_frame(d.participant_id, frame(pose_full(), d.participant_id, 5), 0)
    assert effects == []
    assert any(
        e.get("reason") == "RoleStreamMismatch" for e in room.events
    )
    # audience may stream either remote-participant form
    assert sends(room.handle_frame(d.participant_id, frame(pose_ik(), d.participant_id, 6), 1))
    simple = TransformSimple((0, 0, 0), 0.0, 0, 0.5)
    assert sends(room.handle_frame(d.participant_id, frame(simple, d.participant_id, 7), 2))


def test_bridge_may_not_stream_poses():
    room = make_room()
    join(room, Role.PRESENTER)
    d = join(room, Role.ONSITE_BRIDGE)
    assert room.handle_frame(d.participant_id, frame(pose_ik(), d.participant_id, 3), 0) == []


# -- slide authority --------------------------------------------------------------


def test_slide_happy_path_relayed_to_all():
    room = make_room()
    join(room, Role.PRESENTER)
    join(room, Role.AUDIENCE)
    data = frame(SlideCommand(3), 1, 2)
    effects = room.handle_frame(1, data, 0)
    assert sorted(e.target_id for e in sends(effects)) == [1, 2]
    assert room.slide_index == 3 and room.slide_seq == 1


def test_slide_authority_violation():
    room = make_room()
    join(room, Role.PRESENTER)
    d = join(room, Role.EXAMINER)
    assert room.handle_frame(d.participant_id, frame(SlideCommand(3), d.participant_id, 2), 0) == []
    assert room.slide_index == 0
    assert any(e.get("reason") == "AuthorityViolation" for e in room.events)


def test_slide_out_of_range():
    room = make_room(deck_size=40)
    join(room, Role.PRESENTER)
    assert room.handle_frame(1, frame(SlideCommand(40), 1, 2), 0) == []
    assert room.slide_index == 0
    assert any(e.get("reason") == "SlideOutOfRange" for e in room.events)


# -- mute authority ---------------------------------------------------------------


def test_mute_phase_authority_table():
    room = make_room()
    join(room, Role.PRESENTER)
    aud = join(room, Role.AUDIENCE).participant_id

    # self-unmute during presentation: rejected
    assert room.handle_frame(aud, frame(MuteControl(aud, False), aud, 2), 0) == []
    assert room.participants[aud].muted is True
    # self-mute is always allowed
    assert sends(room.handle_frame(aud, frame(MuteControl(aud, True), aud, 3), 1))
    # presenter mutes/unmutes anyone in any phase
    assert sends(room.handle_frame(1, frame(MuteControl(aud, False), 1, 2), 2))
    assert room.participants[aud].muted is False
    # open discussion: self-unmute accepted
    room.handle_frame(1, frame(MuteControl(aud, True), 1, 3), 3)
    room.handle_frame(1, frame(PhaseChange(Phase.OPEN_DISCUSSION), 1, 4), 4)
    assert sends(room.handle_frame(aud, frame(MuteControl(aud, False), aud, 4), 5))
    assert room.participants[aud].muted is False
    # third-party mute by non-presenter: rejected
    exam = join(room, Role.EXAMINER).participant_id
    assert room.handle_frame(exam, frame(MuteControl(aud, True), exam, 2), 6) == []
    assert room.participants[aud].muted is False


# -- phase + exclusion ---------------------------------------------------------------


def test_phase_change_broadcast_and_exclusion():
    room = make_room()
    join(room, Role.PRESENTER)
    exam = join(room, Role.EXAMINER).participant_id
    a1 = join(room, Role.AUDIENCE).participant_id
    a2 = join(room, Role.AUDIENCE).participant_id

    data = frame(PhaseChange(Phase.CLOSED_DISCUSSION), 1, 2)
    effects = room.handle_frame(1, data, 0)

    # notice goes to everyone, audience included, before their close
    notice_targets = [e.target_id for e in sends(effects) if e.data == data]
    assert sorted(notice_targets) == [1, exam, a1, a2]
    assert sorted(c.target_id for c in closes(effects)) == [a1, a2]
    assert all(c.reason == "PhaseExclusion" for c in closes(effects))
    assert set(room.participants) == {1, exam}
    # remaining participants are told the audience left
    leave_msgs = [
        codec.decode(e.data)
        for e in sends(effects)
        if e.data != data and codec.decode(e.data).msg_type is MsgType.LEAVE
    ]
    assert {env.sender_id for env in leave_msgs} == {a1, a2}


def test_phase_authority():
    room = make_room()
    join(room, Role.PRESENTER)
    exam = join(room, Role.EXAMINER).participant_id
    assert room.handle_frame(exam, frame(PhaseChange(Phase.ANNOUNCEMENT), exam, 2), 0) == []
    assert room.phase is Phase.PRESENTATION


# -- audio gating --------------------------------------------------------------------


def test_audio_relay_and_mute_drop():
    room = make_room()
    join(room, Role.PRESENTER)
    aud = join(room, Role.AUDIENCE).participant_id
    bridge = join(room, Role.ONSITE_BRIDGE).participant_id

    # unmuted presenter: relayed to the other two
    effects = room.handle_frame(1, frame(AudioFrame(b"pcm"), 1, 2), 0)
    assert sorted(e.target_id for e in sends(effects)) == [aud, bridge]
    # muted audience: dropped and counted
    assert room.handle_frame(aud, frame(AudioFrame(b"pcm"), aud, 2), 1) == []
    assert room.counters["audio_dropped"] == 1
    # bridge joins unmuted: relayed
    effects = room.handle_frame(bridge, frame(AudioFrame(b"mix"), bridge, 2), 2)
    assert sorted(e.target_id for e in sends(effects)) == [1, aud]


# -- snapshot -----------------------------------------------------------------------


def test_snapshot_tri_state_pose_cache():
    room = make_room()
    join(room, Role.PRESENTER)
    join(room, Role.EXAMINER)
    join(room, Role.AUDIENCE)
    data = frame(pose_full(3.5), 1, 42, ts=777)
    room.handle_frame(1, data, 777)

    snap = room.build_snapshot()
    assert isinstance(snap, Snapshot)
    assert len(snap.entries) == 3
    by_id = {e.participant_id: e for e in snap.entries}
    # presenter: exact payload bytes, original stamp
    assert by_id[1].pose.payload == data[codec.HEADER_SIZE :]
    assert by_id[1].pose.seq == 42 and by_id[1].pose.timestamp_ms == 777
    # silent participants carry a no-pose-yet tag, not a zeroed pose
    assert by_id[2].pose is None and by_id[3].pose is None


def test_heartbeat_timeout_synthesizes_leave():
    room = make_room(heartbeat_timeout_ms=5000)
    join(room, Role.PRESENTER, now=0)
    aud = join(room, Role.AUDIENCE, now=0).participant_id
    room.handle_frame(1, frame(Heartbeat(), 1, 2, ts=4000), 4000)
    effects = room.tick(6000)  # audience silent for 6 s
    assert aud not in room.participants
    assert [c.target_id for c in closes(effects)] == [aud]
    leaves = [codec.decode(e.data) for e in sends(effects)]
    assert leaves and all(env.msg_type is MsgType.LEAVE and env.sender_id == aud for env in leaves)
    assert 1 in room.participants  # heartbeat kept the presenter alive


def test_explicit_leave_relays():
    room = make_room()
    join(room, Role.PRESENTER)
    aud = join(room, Role.AUDIENCE).participant_id
    effects = room.handle_frame(aud, frame(Leave(), aud, 2), 0)
    assert aud not in room.participants
    assert [e.target_id for e in sends(effects)] == [1]


def test_decode_error_logged_not_fatal():
    room = make_room()
    join(room, Role.PRESENTER)
    assert room.handle_frame(1, b"\x00\x01\x02", 0) == []
    assert any(e.get("reason") == "TruncatedPayload" for e in room.events)
    assert room.handle_frame(1, b"\x00" * 30, 1) == []
    assert any(e.get("reason") == "BadMagic" for e in room.events)


def test_sender_id_spoof_rejected():
    room = make_room()
    join(room, Role.PRESENTER)
    join(room, Role.AUDIENCE)
    spoofed = frame(SlideCommand(3), sender=1, seq=9)
    assert room.handle_frame(2, spoofed, 0) == []
    assert room.slide_index == 0


def test_replay_determinism():
    """Identical input trace -> identical output effects (same room logic)."""

    def run():
        room = make_room()
        out = []
        d1 = join(room, Role.PRESENTER)
        d2 = join(room, Role.AUDIENCE)
        out.extend(d1.effects)
        out.extend(d2.effects)
        for seq in range(2, 30):
            out.extend(room.handle_frame(1, frame(pose_full(seq * 0.1), 1, seq, ts=seq * 16), seq * 16))
        out.extend(room.handle_frame(1, frame(SlideCommand(5), 1, 100), 600))
        return [(type(e).__name__, e.target_id, getattr(e, "data", None)) for e in out]

    assert run() == run()
