"""Headless bots driven by motion traces, plus the in-process simulated
transport binding them to a Room over conditioned links.

Bot kinds mirror the participation modes: a full-body bot retargets sensor
frames at 60 Hz, a headset bot solves IK targets at 60 Hz, a browser bot
integrates WASD-style intents at 20 Hz, and an observer only watches.  Every
bot keeps its own RoomView; observers additionally sample interpolated remote
poses each tick for fidelity metrics and scenario assertions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from podium.animation import LocomotionState, speed_estimate, update_locomotion
from podium.client.interpolate import INTERP_DELAY_MS, sample_pose
from podium.client.view import RoomView
from podium.harness.metrics import MetricsCollector, TruthLog
from podium.harness.netsim import Link, NetworkConditions, VirtualLoop
from podium.harness.traces import MotionTrace, TraceSampler
from podium.kinematics.ik import solve_ik_pose
from podium.kinematics.retarget import retarget
from podium.kinematics.skeleton import SkeletonManifest
from podium.protocol import codec
from podium.protocol.types import (
    Envelope,
    Heartbeat,
    JoinRequest,
    MuteControl,
    Phase,
    PhaseChange,
    POSE_TYPES,
    Role,
    SlideCommand,
    TransformSimple,
)
from podium.server.room import Close, Room, RoomConfig, Send

POSE_RATE_HZ = 60
BROWSER_RATE_HZ = 20
HEARTBEAT_INTERVAL_MS = 1000
WALK_SPEED_MPS = 1.4


class SimServer:
    """Room plus per-bot conditioned links on a shared virtual loop."""

    def __init__(
        self,
        loop: VirtualLoop,
        config: RoomConfig,
        conditions: NetworkConditions,
        seed: int,
        collector: MetricsCollector | None = None,
        recorder=None,
    ):
        self.loop = loop
        self.room = Room(config)
        self.conditions = conditions
        self.seed = seed
        self.collector = collector
        self.recorder = recorder
        self.bots: dict[int, Bot] = {}
        self._links: dict[int, Link] = {}
        self._link_count = 0

    def dropped_frames(self) -> int:
        return sum(link.dropped_frames for link in self._links.values())

    def connect(self, bot: "Bot") -> None:
        """Join immediately (bot -> room uplink delay applies to later frames)."""
        self._link_count += 1
        link = Link(self.loop, self.conditions, self.seed, self._link_count)
        request = codec.encode(
            JoinRequest(bot.role, bot.name, bot.avatar_ref),
            room_id=self.room.room_id,
            sender_id=0,
            seq=1,
            timestamp_ms=self.loop.now_int,
        )

        def do_join():
            now = self.loop.now_int
            if self.recorder is not None:
                self.recorder.on_join(now, request)
            decision = self.room.handle_join(codec.decode(request), now)
            if decision.participant_id is None:
                raise RuntimeError(f"join rejected for {bot.name}: {decision.reason}")
            pid = decision.participant_id
            self._links[pid] = link
            self.bots[pid] = bot
            bot.attach(self, pid)
            if self.collector is not None:
                self.collector.register(pid, bot.role.name.lower())
                self.collector.count_uplink(pid, len(request), self.loop.now_ms)
            self._dispatch(decision.effects)

        link.deliver(request, lambda data: do_join())

    def client_send(self, pid: int, data: bytes) -> None:
        if self.collector is not None:
            self.collector.count_uplink(pid, len(data), self.loop.now_ms)
        link = self._links[pid]

        def arrive(frame: bytes) -> None:
            now = self.loop.now_int
            if self.recorder is not None:
                self.recorder.on_frame(now, pid, frame)
            self._dispatch(self.room.handle_frame(pid, frame, now))

        link.deliver(data, arrive)

    def _dispatch(self, effects) -> None:
        for effect in effects:
            if isinstance(effect, Send):
                bot = self.bots.get(effect.target_id)
                link = self._links.get(effect.target_id)
                if bot is None or link is None:
                    continue
                link.deliver(effect.data, bot.on_frame)
            elif isinstance(effect, Close):
                bot = self.bots.pop(effect.target_id, None)
                self._links.pop(effect.target_id, None)
                if bot is not None:
                    bot.on_close(effect.reason)


@dataclass
class BotSpec:
    name: str
    role: Role
    trace: MotionTrace | None = None
    avatar_ref: str = "avatar://generic"
    stream_start_ms: float = 1000.0
    stream_end_ms: float = 0.0  # 0 = derive from trace
    start_position: tuple[float, float, float] = (2.0, 0.0, 2.5)


class Bot:
    """Base: joined participant with a RoomView and heartbeats."""

    kind = "observer"

    def __init__(self, spec: BotSpec, manifest: SkeletonManifest):
        self.name = spec.name
        self.role = spec.role
        self.avatar_ref = spec.avatar_ref
        self.spec = spec
        self.manifest = manifest
        self.view = RoomView()
        self.truth = TruthLog()
        self.sim: SimServer | None = None
        self.pid: int | None = None
        self.closed_reason: str | None = None
        self._seq = 1  # seq 1 was the join request

        self.slide_log: list[int] = []
        self.samplers: list = []  # callables(now_ms, view), driven over the observe window
        self._observe_window: tuple[float, float] | None = None
        self._observe_rate_hz = POSE_RATE_HZ

    # -- wiring --------------------------------------------------------------

    def attach(self, sim: SimServer, pid: int) -> None:
        self.sim = sim
        self.pid = pid
        self._schedule_heartbeats()
        self._schedule_sampling()
        self.on_attached()

    def on_attached(self) -> None:
        pass

    def observe_window(self, start_ms: float, end_ms: float, rate_hz: int = POSE_RATE_HZ) -> None:
        self._observe_window = (start_ms, end_ms)
        self._observe_rate_hz = rate_hz

    def _schedule_sampling(self) -> None:
        if self._observe_window is None:
            return
        start, end = self._observe_window
        period = 1000.0 / self._observe_rate_hz
        for k in range(round((end - start) / period)):
            self.sim.loop.schedule_at(start + k * period, self._sample_tick)

    def _sample_tick(self) -> None:
        if self.closed_reason is not None:
            return
        now = self.sim.loop.now_ms
        for fn in self.samplers:
            fn(now, self.view)

    def _schedule_heartbeats(self) -> None:
        def beat():
            if self.closed_reason is not None or self.sim is None:
                return
            self.send_message(Heartbeat())
            self.sim.loop.schedule(HEARTBEAT_INTERVAL_MS, beat)

        self.sim.loop.schedule(HEARTBEAT_INTERVAL_MS, beat)

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def send(self, data: bytes) -> None:
        if self.sim is not None and self.closed_reason is None:
            self.sim.client_send(self.pid, data)

    def send_message(self, message) -> None:
        self.send(
            codec.encode(
                message,
                room_id=self.sim.room.room_id,
                sender_id=self.pid,
                seq=self._next_seq(),
                timestamp_ms=self.sim.loop.now_int,
            )
        )

    # -- downlink --------------------------------------------------------------

    def on_frame(self, data: bytes) -> None:
        if self.closed_reason is not None:
            return
        env = codec.decode(data)
        now = self.sim.loop.now_ms
        if self.sim.collector is not None:
            self.sim.collector.count_downlink(self.pid, len(data), now)
            if env.msg_type in POSE_TYPES:
                self.sim.collector.record_pose_latency(now - env.timestamp_ms)
        applied = self.view.apply(env)
        if applied and isinstance(env.message, SlideCommand):
            self.slide_log.append(env.message.slide_index)
        self.on_message(env)

    def on_message(self, env: Envelope) -> None:
        pass

    def on_close(self, reason: str) -> None:
        self.closed_reason = reason

    # -- scripted events -------------------------------------------------------

    def schedule_trace_events(self) -> None:
        if self.spec.trace is None:
            return
        for t_ms, event in self.spec.trace.events:
            when = self.spec.stream_start_ms + t_ms

            def fire(event=event):
                if self.closed_reason is not None:
                    return
                kind = event["kind"]
                if kind == "slide":
                    self.send_message(SlideCommand(event["index"]))
                elif kind == "phase":
                    self.send_message(PhaseChange(Phase(event["phase"])))
                elif kind == "mute":
                    target = event["target"] or self.pid
                    self.send_message(MuteControl(target, event["muted"]))

            self.sim.loop.schedule_at(when, fire)


class FullBodyBot(Bot):
    """Streams retargeted 59-joint poses at 60 Hz from a sensor-frame trace."""

    kind = "full_body"

    def __init__(self, spec: BotSpec, manifest: SkeletonManifest):
        super().__init__(spec, manifest)
        self.sampler = TraceSampler(spec.trace)
        self.root_joint = 0

    def on_attached(self) -> None:
        self.schedule_trace_events()
        start = self.spec.stream_start_ms
        end = self.spec.stream_end_ms or start + self.spec.trace.duration_ms
        period = 1000.0 / POSE_RATE_HZ
        n_frames = round((end - start) / period)
        for k in range(n_frames):
            self.sim.loop.schedule_at(start + k * period, self._stream_tick)

    def _stream_tick(self) -> None:
        if self.closed_reason is not None:
            return
        t_local = self.sim.loop.now_ms - self.spec.stream_start_ms
        frame = self.sampler.sensor_frame_at(t_local)
        pose = retarget(frame, self.manifest)
        self.truth.record(self.sim.loop.now_ms, pose.joints[self.root_joint].position)
        self.send_message(pose)


class HeadsetBot(Bot):
    """Streams 9-joint IK poses at 60 Hz from an IK-target trace."""

    kind = "headset"

    def __init__(self, spec: BotSpec, manifest: SkeletonManifest):
        super().__init__(spec, manifest)
        self.sampler = TraceSampler(spec.trace)
        self.prev_pose = None
        self.loco = LocomotionState()
        self._last_root: tuple[float, tuple] | None = None

    def on_attached(self) -> None:
        self.schedule_trace_events()
        start = self.spec.stream_start_ms
        end = self.spec.stream_end_ms or start + self.spec.trace.duration_ms
        period = 1000.0 / POSE_RATE_HZ
        for k in range(round((end - start) / period)):
            self.sim.loop.schedule_at(start + k * period, self._stream_tick)

    def _stream_tick(self) -> None:
        if self.closed_reason is not None:
            return
        now = self.sim.loop.now_ms
        targets = self.sampler.ik_targets_at(now - self.spec.stream_start_ms)
        pose = solve_ik_pose(targets, self.manifest, prev=self.prev_pose)
        root = pose.joints[0].position
        if self._last_root is not None and now > self._last_root[0]:
            speed = speed_estimate(self._last_root[0], self._last_root[1], now, root)
            self.loco = update_locomotion(self.loco, speed, int(now))
        self._last_root = (now, root)
        pose = replace(pose, locomotion=self.loco.state)
        self.prev_pose = pose
        self.truth.record(now, root)
        self.send_message(pose)


class BrowserBot(Bot):
    """Integrates held-key intents into a 20 Hz TransformSimple stream."""

    kind = "browser"

    def __init__(self, spec: BotSpec, manifest: SkeletonManifest):
        super().__init__(spec, manifest)
        self.sampler = TraceSampler(spec.trace)
        self.position = list(spec.start_position)
        self.loco = LocomotionState()
        self._held_history: list[tuple[float, bool]] = []

    def on_attached(self) -> None:
        self.schedule_trace_events()
        start = self.spec.stream_start_ms
        end = self.spec.stream_end_ms or start + self.spec.trace.duration_ms
        period = 1000.0 / BROWSER_RATE_HZ
        for k in range(round((end - start) / period)):
            self.sim.loop.schedule_at(start + k * period, self._stream_tick)

    def _stream_tick(self) -> None:
        if self.closed_reason is not None:
            return
        now = self.sim.loop.now_ms
        intent = self.sampler.intent_at(now - self.spec.stream_start_ms)
        keys = intent.get("keys", "")
        yaw = float(intent.get("yaw", 0.0))
        dt = 1.0 / BROWSER_RATE_HZ
        fwd = (math.sin(yaw), 0.0, math.cos(yaw))
        right = (fwd[2], 0.0, -fwd[0])
        vx = vz = 0.0
        if "W" in keys:
            vx += fwd[0]
            vz += fwd[2]
        if "S" in keys:
            vx -= fwd[0]
            vz -= fwd[2]
        if "D" in keys:
            vx += right[0]
            vz += right[2]
        if "A" in keys:
            vx -= right[0]
            vz -= right[2]
        norm = math.hypot(vx, vz)
        moving = norm > 1e-9
        if moving:
            self.position[0] += vx / norm * WALK_SPEED_MPS * dt
            self.position[2] += vz / norm * WALK_SPEED_MPS * dt
        self._held_history.append((now, moving))
        cutoff = now - 250.0
        self._held_history = [(t, h) for t, h in self._held_history if t >= cutoff]
        held = sum(1 for _, h in self._held_history if h)
        intensity = held / len(self._held_history)
        speed = WALK_SPEED_MPS if moving else 0.0
        self.loco = update_locomotion(self.loco, speed, int(now))
        wrapped = math.remainder(yaw, 2.0 * math.pi)
        if wrapped <= -math.pi:
            wrapped = math.pi
        pos = (self.position[0], self.position[1], self.position[2])
        self.truth.record(now, pos)
        self.send_message(
            TransformSimple(
                position=pos,
                yaw=wrapped,
                locomotion=self.loco.state,
                intensity=intensity,
            )
        )


class ObserverBot(Bot):
    """Receive-only participant; inherits the sampling machinery unchanged."""

    kind = "observer"


def interpolated_root(view: RoomView, pid: int, render_time_ms: float):
    """Root position of a remote participant at render time, or None."""
    participant = view.participants.get(pid)
    if participant is None or len(participant.buffer) == 0:
        return None
    msg = sample_pose(participant.buffer, render_time_ms)
    if isinstance(msg, TransformSimple):
        return msg.position
    return msg.joints[0].position


def make_positional_error_sampler(
    collector: MetricsCollector,
    target_pid: int,
    truth: TruthLog,
    *,
    delay_ms: float = INTERP_DELAY_MS,
):
    """Observer sampler comparing interpolated remote root vs delayed truth."""

    def sampler(now_ms: float, view: RoomView) -> None:
        render_time = now_ms - delay_ms
        expected = truth.at(render_time)
        if expected is None:
            return
        observed = interpolated_root(view, target_pid, render_time)
        if observed is None:
            return
        collector.record_positional_error(math.dist(expected, observed))

    return sampler
