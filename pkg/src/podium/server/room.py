"""Authoritative room: joins, role authority, last-value pose cache, slide and
phase state, mute table, snapshots for late joiners, and relay fan-out.

Pure logic: every entry point takes the current time and returns an ordered
effect list (sends/closes) for the transport to execute, so a room is a
deterministic function of its input trace.  Relayed payloads are the exact
bytes the sender framed; the server never re-encodes what it forwards.

Authority table:
  * slide and phase mutate only on Presenter messages;
  * Presenter may mute/unmute anyone in any phase;
  * anyone may mute themselves; self-unmute requires a discussion phase
    (open, closed, announcement), i.e. never during the presentation;
  * pose stream type is fixed by role (Presenter: full body; Examiner and
    Audience: IK or simple transform; OnsiteBridge: none).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from podium.protocol import codec
from podium.protocol.errors import ProtocolError
from podium.protocol.types import (
    AvatarManifest,
    CachedPose,
    Envelope,
    JoinAccept,
    JoinRequest,
    Leave,
    MsgType,
    MuteControl,
    Phase,
    PhaseChange,
    POSE_TYPES,
    Role,
    SlideCommand,
    Snapshot,
    SnapshotEntry,
    StreamClass,
    stream_class,
)

SERVER_SENDER_ID = 0

_ALLOWED_POSE = {
    Role.PRESENTER: (MsgType.POSE_FULL,),
    Role.EXAMINER: (MsgType.POSE_IK, MsgType.TRANSFORM_SIMPLE),
    Role.AUDIENCE: (MsgType.POSE_IK, MsgType.TRANSFORM_SIMPLE),
    Role.ONSITE_BRIDGE: (),
}

_UNMUTE_PHASES = (Phase.OPEN_DISCUSSION, Phase.CLOSED_DISCUSSION, Phase.ANNOUNCEMENT)


@dataclass(frozen=True, slots=True)
class RoomConfig:
    room_id: int = 1
    deck_size: int = 1
    tick_hz: int = 60
    max_participants: int = 64
    start_slide: int = 0
    heartbeat_timeout_ms: int = 5000
    walk_enter_mps: float = 0.15
    walk_exit_mps: float = 0.10

    def __post_init__(self):
        if self.deck_size < 1:
            raise ValueError(f"deck_size must be >= 1, got {self.deck_size}")
        if not 1 <= self.tick_hz <= 120:
            raise ValueError(f"tick_hz must be in [1, 120], got {self.tick_hz}")
        if not 1 <= self.max_participants <= 255:
            raise ValueError(f"max_participants must be in [1, 255], got {self.max_participants}")
        if not 0 <= self.start_slide < self.deck_size:
            raise ValueError(f"start_slide {self.start_slide} outside deck of {self.deck_size}")
        if not 0 < self.walk_exit_mps < self.walk_enter_mps:
            raise ValueError("need 0 < walk_exit_mps < walk_enter_mps")


@dataclass(frozen=True, slots=True)
class Send:
    target_id: int
    data: bytes


@dataclass(frozen=True, slots=True)
class Close:
    target_id: int
    reason: str


Effect = Send | Close


@dataclass(frozen=True, slots=True)
class JoinDecision:
    participant_id: int | None  # None = rejected
    reason: str | None
    effects: list[Effect]


@dataclass
class Participant:
    participant_id: int
    role: Role
    display_name: str
    avatar_ref: str
    muted: bool
    last_seen_ms: int
    last_pose: CachedPose | None = None
    stream_seq: dict[StreamClass, int] = field(default_factory=dict)


class Room:
    def __init__(self, config: RoomConfig):
        self.config = config
        self.room_id = config.room_id
        self.participants: dict[int, Participant] = {}
        self.slide_index = config.start_slide
        self.slide_seq = 0
        self.phase = Phase.PRESENTATION
        self.next_participant_id = 1
        self.events: list[dict] = []
        self.counters = {
            "accepted": 0,
            "rejected": 0,
            "stale_dropped": 0,
            "audio_dropped": 0,
        }
        self._server_seq = 0

    # -- helpers -------------------------------------------------------------

    def _log(self, now_ms: int, decision: str, event: str, **fields) -> None:
        entry = {"t_ms": now_ms, "room": self.room_id, "decision": decision, "event": event}
        entry.update(fields)
        self.events.append(entry)
        if decision == "accept":
            self.counters["accepted"] += 1
        elif decision == "reject":
            self.counters["rejected"] += 1

    def drain_log(self) -> list[dict]:
        out = self.events
        self.events = []
        return out

    def _server_frame(self, message, now_ms: int, sender_id: int = SERVER_SENDER_ID) -> bytes:
        self._server_seq += 1
        return codec.encode(
            message,
            room_id=self.room_id,
            sender_id=sender_id,
            seq=self._server_seq,
            timestamp_ms=now_ms,
        )

    def presenter(self) -> Participant | None:
        for p in self.participants.values():
            if p.role is Role.PRESENTER:
                return p
        return None

    def build_snapshot(self) -> Snapshot:
        """Authoritative state for a late joiner: one entry per live participant,
        cached poses carried bit-exact with their original seq/timestamp."""
        entries = tuple(
            SnapshotEntry(
                participant_id=p.participant_id,
                role=p.role,
                muted=p.muted,
                avatar_ref=p.avatar_ref,
                pose=p.last_pose,
            )
            for p in self.participants.values()
        )
        return Snapshot(slide_index=self.slide_index, phase=self.phase, entries=entries)

    # -- join ----------------------------------------------------------------

    def handle_join(self, env: Envelope, now_ms: int) -> JoinDecision:
        if env.msg_type is not MsgType.JOIN_REQUEST or not isinstance(env.message, JoinRequest):
            self._log(now_ms, "reject", "join", reason="ExpectedJoinRequest")
            return JoinDecision(None, "ExpectedJoinRequest", [])
        req = env.message
        if len(self.participants) >= self.config.max_participants:
            self._log(now_ms, "reject", "join", reason="RoomFull", role=int(req.role))
            return JoinDecision(None, "RoomFull", [])
        if req.role is Role.PRESENTER and self.presenter() is not None:
            self._log(now_ms, "reject", "join", reason="PresenterConflict")
            return JoinDecision(None, "PresenterConflict", [])
        if not req.avatar_ref:
            self._log(now_ms, "reject", "join", reason="BadAvatarRef")
            return JoinDecision(None, "BadAvatarRef", [])
        if req.role is Role.AUDIENCE and self.phase is Phase.CLOSED_DISCUSSION:
            self._log(now_ms, "reject", "join", reason="PhaseRestricted")
            return JoinDecision(None, "PhaseRestricted", [])

        pid = self.next_participant_id
        self.next_participant_id += 1
        participant = Participant(
            participant_id=pid,
            role=req.role,
            display_name=req.display_name,
            avatar_ref=req.avatar_ref,
            muted=req.role not in (Role.PRESENTER, Role.ONSITE_BRIDGE),
            last_seen_ms=now_ms,
        )
        self.participants[pid] = participant

        effects: list[Effect] = [
            Send(pid, self._server_frame(JoinAccept(pid, req.role, self.build_snapshot()), now_ms))
        ]
        manifest = AvatarManifest(participant_id=pid, role=req.role, avatar_ref=req.avatar_ref)
        for other in self.participants.values():
            if other.participant_id != pid:
                effects.append(Send(other.participant_id, self._server_frame(manifest, now_ms)))
        self._log(now_ms, "accept", "join", sender=pid, role=int(req.role))
        return JoinDecision(pid, None, effects)

    # -- frame dispatch --------------------------------------------------------

    def handle_frame(self, sender_id: int, data: bytes, now_ms: int) -> list[Effect]:
        participant = self.participants.get(sender_id)
        if participant is None:
            self._log(now_ms, "reject", "frame", sender=sender_id, reason="UnknownParticipant")
            return []
        participant.last_seen_ms = now_ms

        try:
            env = codec.decode(data)
        except ProtocolError as exc:
            self._log(
                now_ms, "reject", "frame", sender=sender_id, reason=type(exc).__name__
            )
            return []
        if env.sender_id != sender_id:
            self._log(now_ms, "reject", "frame", sender=sender_id, reason="SenderIdMismatch")
            return []

        cls = stream_class(env.msg_type)
        if cls is not StreamClass.CONTROL:
            last = participant.stream_seq.get(cls)
            if not codec.validate_sequence(last, env.seq):
                self.counters["stale_dropped"] += 1
                self._log(
                    now_ms, "drop", "stale_seq", sender=sender_id, msg_type=int(env.msg_type)
                )
                return []
            participant.stream_seq[cls] = env.seq

        if env.msg_type in POSE_TYPES:
            return self._on_pose(participant, env, data, now_ms)
        if env.msg_type is MsgType.SLIDE_COMMAND:
            return self._on_slide(participant, env, data, now_ms)
        if env.msg_type is MsgType.MUTE_CONTROL:
            return self._on_mute(participant, env, data, now_ms)
        if env.msg_type is MsgType.PHASE_CHANGE:
            return self._on_phase(participant, env, data, now_ms)
        if env.msg_type is MsgType.AUDIO_FRAME:
            return self._on_audio(participant, env, data, now_ms)
        if env.msg_type is MsgType.HEARTBEAT:
            return []
        if env.msg_type is MsgType.LEAVE:
            return self._remove(participant, "Leave", now_ms, close_reason=None)
        self._log(
            now_ms, "reject", "frame", sender=sender_id,
            msg_type=int(env.msg_type), reason="ServerOnlyType",
        )
        return []

    # -- per-type handlers ----------------------------------------------------

    def _relay(self, data: bytes, exclude: int | None = None) -> list[Effect]:
        return [
            Send(pid, data) for pid in self.participants if pid != exclude
        ]

    def _on_pose(self, p: Participant, env: Envelope, data: bytes, now_ms: int) -> list[Effect]:
        if env.msg_type not in _ALLOWED_POSE[p.role]:
            self._log(
                now_ms, "reject", "pose", sender=p.participant_id,
                msg_type=int(env.msg_type), reason="RoleStreamMismatch",
            )
            return []
        p.last_pose = CachedPose(
            msg_type=env.msg_type,
            seq=env.seq,
            timestamp_ms=env.timestamp_ms,
            payload=data[codec.HEADER_SIZE :],
        )
        self._log(now_ms, "accept", "pose", sender=p.participant_id, msg_type=int(env.msg_type))
        return self._relay(data, exclude=p.participant_id)

    def _on_slide(self, p: Participant, env: Envelope, data: bytes, now_ms: int) -> list[Effect]:
        cmd: SlideCommand = env.message
        if p.role is not Role.PRESENTER:
            self._log(
                now_ms, "reject", "slide", sender=p.participant_id, reason="AuthorityViolation"
            )
            return []
        if cmd.slide_index >= self.config.deck_size:
            self._log(
                now_ms, "reject", "slide", sender=p.participant_id, reason="SlideOutOfRange",
                slide=cmd.slide_index,
            )
            return []
        self.slide_index = cmd.slide_index
        self.slide_seq += 1
        self._log(now_ms, "accept", "slide", sender=p.participant_id, slide=cmd.slide_index)
        return self._relay(data)

    def _on_mute(self, p: Participant, env: Envelope, data: bytes, now_ms: int) -> list[Effect]:
        cmd: MuteControl = env.message
        target = self.participants.get(cmd.target_id)
        if target is None:
            self._log(
                now_ms, "reject", "mute", sender=p.participant_id, reason="UnknownTarget",
                target=cmd.target_id,
            )
            return []
        allowed = (
            p.role is Role.PRESENTER
            or (cmd.target_id == p.participant_id and cmd.muted)
            or (cmd.target_id == p.participant_id and self.phase in _UNMUTE_PHASES)
        )
        if not allowed:
            self._log(
                now_ms, "reject", "mute", sender=p.participant_id, reason="AuthorityViolation",
                target=cmd.target_id, muted=cmd.muted, phase=int(self.phase),
            )
            return []
        target.muted = cmd.muted
        self._log(
            now_ms, "accept", "mute", sender=p.participant_id, target=cmd.target_id,
            muted=cmd.muted,
        )
        return self._relay(data)

    def _on_phase(self, p: Participant, env: Envelope, data: bytes, now_ms: int) -> list[Effect]:
        cmd: PhaseChange = env.message
        if p.role is not Role.PRESENTER:
            self._log(
                now_ms, "reject", "phase", sender=p.participant_id, reason="AuthorityViolation"
            )
            return []
        self.phase = cmd.phase
        self._log(now_ms, "accept", "phase", sender=p.participant_id, phase=int(cmd.phase))
        # broadcast first so excluded members still receive the typed notice
        effects = self._relay(data)
        if cmd.phase is Phase.CLOSED_DISCUSSION:
            for aud in [x for x in self.participants.values() if x.role is Role.AUDIENCE]:
                effects.extend(self._remove(aud, "PhaseExclusion", now_ms, close_reason="PhaseExclusion"))
        return effects

    def _on_audio(self, p: Participant, env: Envelope, data: bytes, now_ms: int) -> list[Effect]:
        if p.muted:
            self.counters["audio_dropped"] += 1
            self._log(now_ms, "drop", "audio_muted", sender=p.participant_id)
            return []
        self._log(now_ms, "accept", "audio", sender=p.participant_id)
        return self._relay(data, exclude=p.participant_id)

    def _remove(
        self, p: Participant, event: str, now_ms: int, close_reason: str | None
    ) -> list[Effect]:
        del self.participants[p.participant_id]
        self._log(now_ms, "accept", event, sender=p.participant_id)
        effects: list[Effect] = []
        if close_reason is not None:
            effects.append(Close(p.participant_id, close_reason))
        leave = self._server_frame(Leave(), now_ms, sender_id=p.participant_id)
        effects.extend(self._relay(leave))
        return effects

    def handle_disconnect(self, participant_id: int, now_ms: int) -> list[Effect]:
        """Transport-level connection loss: purge and tell the others."""
        p = self.participants.get(participant_id)
        if p is None:
            return []
        return self._remove(p, "disconnect", now_ms, close_reason=None)

    # -- liveness ---------------------------------------------------------------

    def tick(self, now_ms: int) -> list[Effect]:
        """Expire participants whose heartbeats went silent."""
        effects: list[Effect] = []
        timeout = self.config.heartbeat_timeout_ms
        for p in [x for x in self.participants.values() if now_ms - x.last_seen_ms > timeout]:
            effects.extend(self._remove(p, "heartbeat_timeout", now_ms, close_reason="HeartbeatTimeout"))
        return effects
