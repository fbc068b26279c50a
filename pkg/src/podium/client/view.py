"""Client-side room mirror.

RoomView applies decoded envelopes (in transport order) and maintains, per
remote participant, a pose buffer for snapshot interpolation plus role,
avatar and mute state; slide and phase track the authoritative room under
last-value semantics.  Poses arriving before the sender's avatar manifest
(a server broadcast race only a late message can win) wait in a pending set
and apply once the manifest lands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from podium.client.interpolate import BUFFER_CAPACITY, PoseBuffer
from podium.protocol.codec import validate_sequence
from podium.protocol.types import (
    AudioFrame,
    AvatarManifest,
    Envelope,
    JoinAccept,
    Leave,
    MuteControl,
    Phase,
    PhaseChange,
    POSE_TYPES,
    Role,
    SlideCommand,
    Snapshot,
    StreamClass,
    stream_class,
)


@dataclass
class ParticipantView:
    role: Role
    avatar_ref: str
    muted: bool
    buffer: PoseBuffer = field(default_factory=PoseBuffer)


class RoomView:
    """One client's picture of the room. Single writer; reads are cheap."""

    def __init__(self, buffer_capacity: int = BUFFER_CAPACITY):
        self.self_id: int | None = None
        self.self_role: Role | None = None
        self.slide_index = 0
        self.phase = Phase.PRESENTATION
        self.participants: dict[int, ParticipantView] = {}
        self.excluded = False
        self.audio_frames: dict[int, int] = {}
        self._buffer_capacity = buffer_capacity
        self._last_seq: dict[tuple[int, StreamClass], int] = {}
        self._pending_poses: dict[int, Envelope] = {}

    # -- freshness ---------------------------------------------------------

    def _fresh(self, env: Envelope) -> bool:
        cls = stream_class(env.msg_type)
        if cls is StreamClass.CONTROL:
            return True
        key = (env.sender_id, cls)
        if not validate_sequence(self._last_seq.get(key), env.seq):
            return False
        self._last_seq[key] = env.seq
        return True

    # -- application -------------------------------------------------------

    def apply(self, env: Envelope) -> bool:
        """Apply one decoded envelope; returns False when ignored (stale/unknown)."""
        m = env.message
        if isinstance(m, JoinAccept):
            self.self_id = m.participant_id
            self.self_role = m.role
            self._apply_snapshot(m.snapshot)
            return True
        if isinstance(m, Snapshot):
            self._apply_snapshot(m)
            return True
        if isinstance(m, AvatarManifest):
            if m.participant_id not in self.participants:
                muted = m.role not in (Role.PRESENTER, Role.ONSITE_BRIDGE)
                self.participants[m.participant_id] = ParticipantView(
                    role=m.role,
                    avatar_ref=m.avatar_ref,
                    muted=muted,
                    buffer=PoseBuffer(self._buffer_capacity),
                )
            pending = self._pending_poses.pop(m.participant_id, None)
            if pending is not None:
                self._push_pose(pending)
            return True
        if env.msg_type in POSE_TYPES:
            if not self._fresh(env):
                return False
            if env.sender_id not in self.participants:
                held = self._pending_poses.get(env.sender_id)
                if held is None or env.seq > held.seq:
                    self._pending_poses[env.sender_id] = env
                return False
            return self._push_pose(env)
        if isinstance(m, SlideCommand):
            if not self._fresh(env):
                return False
            self.slide_index = m.slide_index
            return True
        if isinstance(m, PhaseChange):
            if not self._fresh(env):
                return False
            self.phase = m.phase
            if self.phase is Phase.CLOSED_DISCUSSION and self.self_role is Role.AUDIENCE:
                self.excluded = True
            return True
        if isinstance(m, MuteControl):
            if not self._fresh(env):
                return False
            p = self.participants.get(m.target_id)
            if p is None:
                return False
            p.muted = m.muted
            return True
        if isinstance(m, AudioFrame):
            self.audio_frames[env.sender_id] = self.audio_frames.get(env.sender_id, 0) + 1
            return True
        if isinstance(m, Leave):
            self.participants.pop(env.sender_id, None)
            self._pending_poses.pop(env.sender_id, None)
            for key in [k for k in self._last_seq if k[0] == env.sender_id]:
                del self._last_seq[key]
            return True
        return False  # heartbeats and client-only types carry no view state

    def _push_pose(self, env: Envelope) -> bool:
        return self.participants[env.sender_id].buffer.push(env.timestamp_ms, env.seq, env.message)

    def _apply_snapshot(self, snap: Snapshot) -> None:
        self.slide_index = snap.slide_index
        self.phase = snap.phase
        participants: dict[int, ParticipantView] = {}
        for e in snap.entries:
            view = ParticipantView(
                role=e.role,
                avatar_ref=e.avatar_ref,
                muted=e.muted,
                buffer=PoseBuffer(self._buffer_capacity),
            )
            if e.pose is not None:
                view.buffer.push(e.pose.timestamp_ms, e.pose.seq, e.pose.decoded())
                self._last_seq[(e.participant_id, StreamClass.POSE)] = e.pose.seq
            participants[e.participant_id] = view
        self.participants = participants
        self._pending_poses.clear()
        if self.phase is Phase.CLOSED_DISCUSSION and self.self_role is Role.AUDIENCE:
            self.excluded = True

    # -- inspection --------------------------------------------------------

    def latest_pose(self, participant_id: int):
        p = self.participants.get(participant_id)
        if p is None or len(p.buffer) == 0:
            return None
        return p.buffer.newest

    def state_digest(self):
        """Canonical comparable state under last-value semantics.

        Two views that agree on slide, phase, membership, mute table, and each
        participant's newest pose (message + seq + timestamp) are equivalent.
        """
        rows = []
        for pid in sorted(self.participants):
            p = self.participants[pid]
            newest = p.buffer.samples[-1] if len(p.buffer) else None
            pose_key = (newest.seq, newest.timestamp_ms, newest.message) if newest else None
            rows.append((pid, int(p.role), p.avatar_ref, p.muted, pose_key))
        return (self.slide_index, int(self.phase), tuple(rows))
