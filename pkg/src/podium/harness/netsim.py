"""Deterministic discrete-event simulation: virtual clock, scheduler, and a
per-link network conditioner (latency, jitter, loss).

Everything runs on virtual time, so a scenario with a given seed replays to
identical results byte for byte; processing consumes zero virtual time.  Loss
applies only to pose and audio frames: the real transports are stream-based
and lossless, and control messages (join/snapshot/slide/mute/phase) must
deliver for the session to make sense.  Jitter may reorder frames; last-value
semantics downstream absorb that.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass

from podium.protocol.codec import HEADER_SIZE
from podium.protocol.types import MsgType

_LOSSY_TYPES = (
    int(MsgType.POSE_FULL),
    int(MsgType.POSE_IK),
    int(MsgType.TRANSFORM_SIMPLE),
    int(MsgType.AUDIO_FRAME),
)


class VirtualLoop:
    """Priority-queue scheduler over a virtual millisecond clock."""

    def __init__(self):
        self.now_ms = 0.0
        self._queue: list[tuple[float, int, object]] = []
        self._tie = 0

    def schedule(self, delay_ms: float, fn) -> None:
        self.schedule_at(self.now_ms + delay_ms, fn)

    def schedule_at(self, t_ms: float, fn) -> None:
        if t_ms < self.now_ms:
            t_ms = self.now_ms
        self._tie += 1
        heapq.heappush(self._queue, (t_ms, self._tie, fn))

    def run_until(self, t_end_ms: float) -> None:
        while self._queue and self._queue[0][0] <= t_end_ms:
            t, _, fn = heapq.heappop(self._queue)
            self.now_ms = t
            fn()
        self.now_ms = max(self.now_ms, t_end_ms)

    @property
    def now_int(self) -> int:
        return int(self.now_ms)


@dataclass(frozen=True, slots=True)
class NetworkConditions:
    """Injected path conditions.

    latency_ms and jitter_ms describe the sender-to-receiver path through the
    relay; every client link contributes half in each direction, so a relayed
    message accrues the full figure end to end.  loss_fraction strikes each
    link crossing independently.
    """

    latency_ms: float = 0.0
    jitter_ms: float = 0.0
    loss_fraction: float = 0.0

    def __post_init__(self):
        if self.latency_ms < 0 or self.jitter_ms < 0:
            raise ValueError("latency and jitter must be non-negative")
        if not 0.0 <= self.loss_fraction < 1.0:
            raise ValueError(f"loss_fraction must be in [0, 1), got {self.loss_fraction}")


def _is_lossy_frame(data: bytes) -> bool:
    return len(data) > 3 and data[3] in _LOSSY_TYPES


class Link:
    """One client's bidirectional pipe; both directions share the conditions.

    Deterministic per (seed, link id): drops and jitter come from the link's
    own RNG, so adding a bot never perturbs another link's stream.
    """

    def __init__(self, loop: VirtualLoop, conditions: NetworkConditions, seed: int, link_id: int):
        self.loop = loop
        self.conditions = conditions
        self.rng = random.Random(seed * 1_000_003 + link_id * 7919 + 1)
        self.dropped_frames = 0

    def deliver(self, data: bytes, deliver_fn) -> None:
        """Schedule delivery of one frame across this hop (half the path figures)."""
        c = self.conditions
        if c.loss_fraction > 0.0 and _is_lossy_frame(data):
            if self.rng.random() < c.loss_fraction:
                self.dropped_frames += 1
                return
        delay = 0.5 * c.latency_ms
        if c.jitter_ms > 0.0:
            delay += self.rng.uniform(-0.5 * c.jitter_ms, 0.5 * c.jitter_ms)
        self.loop.schedule(max(0.0, delay), lambda: deliver_fn(data))


def frame_payload_size(data: bytes) -> int:
    return max(0, len(data) - HEADER_SIZE)
