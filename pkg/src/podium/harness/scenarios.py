"""The three canned scenarios and their assertions.

  handshake     two parties approach to 0.8 m and extend right hands; a remote
                observer must see the wrists within 0.12 m for at least one
                second (checked on interpolated views, not ground truth).
  presentation  a full-body presenter streams 59-joint poses at 60 Hz for 60 s
                and issues 10 slide changes; three listeners (one headset bot
                streaming 9-joint IK poses, two browser bots) must observe all
                slides in order.
  freestyle     a high-variance full-body solo run; characterization only.

Everything runs on the virtual clock, so a (scenario, seed, conditions)
triple reproduces byte-identical metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from podium.client.interpolate import INTERP_DELAY_MS, sample_pose
from podium.harness.bots import (
    Bot,
    BotSpec,
    BrowserBot,
    FullBodyBot,
    HeadsetBot,
    ObserverBot,
    SimServer,
    make_positional_error_sampler,
)
from podium.harness.metrics import MetricsCollector, RunMetrics
from podium.harness.netsim import NetworkConditions, VirtualLoop
from podium.harness.traces import load_or_generate
from podium.kinematics.skeleton import SkeletonManifest, default_manifest
from podium.protocol.types import Role
from podium.server.room import RoomConfig

SCENARIO_NAMES = ("handshake", "presentation", "freestyle")

HANDSHAKE_WRIST_MAX_M = 0.12
HANDSHAKE_HOLD_MIN_MS = 1000.0


class ScenarioAssertionFailed(AssertionError):
    pass


@dataclass
class ScenarioResult:
    metrics: RunMetrics
    events: list[dict]
    details: dict


def _finish(
    sim: SimServer,
    collector: MetricsCollector,
    scenario: str,
    seed: int,
) -> tuple[RunMetrics, list[dict]]:
    counters = sim.room.counters
    metrics = collector.build(
        scenario,
        seed,
        dropped_frames=sim.dropped_frames(),
        stale_dropped=counters["stale_dropped"],
        violations_rejected=counters["rejected"],
        audio_dropped=counters["audio_dropped"],
    )
    return metrics, sim.room.drain_log()


def _stagger_joins(sim: SimServer, bots: list[Bot], step_ms: float = 10.0) -> None:
    for i, bot in enumerate(bots):
        sim.loop.schedule_at(i * step_ms, lambda b=bot: sim.connect(b))


def run_presentation(
    *,
    seed: int,
    conditions: NetworkConditions,
    traces_dir=None,
    manifest: SkeletonManifest | None = None,
    recorder=None,
) -> ScenarioResult:
    manifest = manifest or default_manifest()
    traces = load_or_generate("presentation", traces_dir)
    loop = VirtualLoop()
    collector = MetricsCollector()

    start, end = 1000.0, 61000.0
    collector.window_start_ms = start
    collector.window_end_ms = end

    config = RoomConfig(room_id=1, deck_size=12, max_participants=16)
    sim = SimServer(loop, config, conditions, seed, collector, recorder)

    presenter = FullBodyBot(
        BotSpec("presenter", Role.PRESENTER, traces["presenter"], stream_start_ms=start), manifest
    )
    vr = HeadsetBot(
        BotSpec("vr-examiner", Role.EXAMINER, traces["vr-examiner"], stream_start_ms=start), manifest
    )
    walkers = [
        BrowserBot(
            BotSpec(
                name,
                Role.AUDIENCE,
                traces[name],
                stream_start_ms=start,
                start_position=(1.5 + i, 0.0, 2.5),
            ),
            manifest,
        )
        for i, name in enumerate(("walker-1", "walker-2"))
    ]

    vr.observe_window(start + INTERP_DELAY_MS + 500, end)
    vr.samplers.append(
        _deferred_truth_sampler(collector, lambda: presenter.pid, presenter.truth)
    )

    bots = [presenter, vr, *walkers]
    _stagger_joins(sim, bots)
    loop.run_until(end + 1000.0)

    listeners = [vr, *walkers]
    expected = [e[1]["index"] for e in traces["presenter"].events if e[1]["kind"] == "slide"]
    for bot in listeners:
        if bot.slide_log != expected:
            raise ScenarioAssertionFailed(
                f"{bot.name} observed slides {bot.slide_log}, expected {expected}"
            )

    metrics, events = _finish(sim, collector, "presentation", seed)
    return ScenarioResult(metrics=metrics, events=events, details={"slides_observed": expected})


def _deferred_truth_sampler(collector, pid_fn, truth):
    """Positional-error sampler resolving the target pid lazily (assigned on join)."""
    inner = {}

    def sampler(now_ms, view):
        if "fn" not in inner:
            pid = pid_fn()
            if pid is None:
                return
            inner["fn"] = make_positional_error_sampler(collector, pid, truth)
        inner["fn"](now_ms, view)

    return sampler


def run_handshake(
    *,
    seed: int,
    conditions: NetworkConditions,
    traces_dir=None,
    manifest: SkeletonManifest | None = None,
    recorder=None,
) -> ScenarioResult:
    manifest = manifest or default_manifest()
    traces = load_or_generate("handshake", traces_dir)
    loop = VirtualLoop()
    collector = MetricsCollector()

    start, end = 1000.0, 11000.0
    collector.window_start_ms = start
    collector.window_end_ms = end

    config = RoomConfig(room_id=1, deck_size=1, max_participants=8)
    sim = SimServer(loop, config, conditions, seed, collector, recorder)

    presenter = FullBodyBot(
        BotSpec("presenter", Role.PRESENTER, traces["presenter"], stream_start_ms=start), manifest
    )
    examiner = HeadsetBot(
        BotSpec("examiner", Role.EXAMINER, traces["examiner"], stream_start_ms=start), manifest
    )
    observer = ObserverBot(BotSpec("observer", Role.AUDIENCE), manifest)

    wrist_joint = manifest.index_of["right_hand"]
    ik_wrist = 8  # right hand slot in the nine-joint wire order
    distances: list[tuple[float, float]] = []

    def wrist_sampler(now_ms, view):
        render_time = now_ms - INTERP_DELAY_MS
        p1 = view.participants.get(presenter.pid)
        p2 = view.participants.get(examiner.pid)
        if not p1 or not p2 or not len(p1.buffer) or not len(p2.buffer):
            return
        full = sample_pose(p1.buffer, render_time)
        ik = sample_pose(p2.buffer, render_time)
        w1 = full.joints[wrist_joint].position
        w2 = ik.joints[ik_wrist].position
        distances.append((now_ms, math.dist(w1, w2)))

    observer.observe_window(start + INTERP_DELAY_MS + 500, end)
    observer.samplers.append(wrist_sampler)
    observer.samplers.append(
        _deferred_truth_sampler(collector, lambda: presenter.pid, presenter.truth)
    )

    _stagger_joins(sim, [presenter, examiner, observer])
    loop.run_until(end + 1000.0)

    best_ms, best_span = _longest_hold(distances, HANDSHAKE_WRIST_MAX_M)
    details = {
        "wrist_samples": len(distances),
        "min_wrist_distance_m": min((d for _, d in distances), default=float("inf")),
        "held_below_threshold_ms": best_ms,
        "hold_window": best_span,
    }
    if best_ms < HANDSHAKE_HOLD_MIN_MS:
        raise ScenarioAssertionFailed(
            f"wrist proximity <= {HANDSHAKE_WRIST_MAX_M} m held only {best_ms:.0f} ms "
            f"(needs >= {HANDSHAKE_HOLD_MIN_MS:.0f} ms); details {details}"
        )

    metrics, events = _finish(sim, collector, "handshake", seed)
    return ScenarioResult(metrics=metrics, events=events, details=details)


def _longest_hold(series: list[tuple[float, float]], threshold: float) -> tuple[float, tuple]:
    """Longest contiguous stretch with value <= threshold: (duration_ms, (t0, t1))."""
    best = 0.0
    best_span = (0.0, 0.0)
    run_start = None
    last_t = None
    for t, value in series:
        if value <= threshold:
            if run_start is None:
                run_start = t
            last_t = t
            if last_t - run_start > best:
                best = last_t - run_start
                best_span = (run_start, last_t)
        else:
            run_start = None
    return best, best_span


def run_freestyle(
    *,
    seed: int,
    conditions: NetworkConditions,
    traces_dir=None,
    manifest: SkeletonManifest | None = None,
    recorder=None,
) -> ScenarioResult:
    manifest = manifest or default_manifest()
    traces = load_or_generate("freestyle", traces_dir)
    loop = VirtualLoop()
    collector = MetricsCollector()

    start, end = 1000.0, 21000.0
    collector.window_start_ms = start
    collector.window_end_ms = end

    config = RoomConfig(room_id=1, deck_size=1, max_participants=8)
    sim = SimServer(loop, config, conditions, seed, collector, recorder)

    presenter = FullBodyBot(
        BotSpec("presenter", Role.PRESENTER, traces["presenter"], stream_start_ms=start), manifest
    )
    observer = ObserverBot(BotSpec("observer", Role.AUDIENCE), manifest)
    observer.observe_window(start + INTERP_DELAY_MS + 500, end)
    observer.samplers.append(
        _deferred_truth_sampler(collector, lambda: presenter.pid, presenter.truth)
    )

    _stagger_joins(sim, [presenter, observer])
    loop.run_until(end + 1000.0)

    metrics, events = _finish(sim, collector, "freestyle", seed)
    return ScenarioResult(metrics=metrics, events=events, details={})


_RUNNERS = {
    "handshake": run_handshake,
    "presentation": run_presentation,
    "freestyle": run_freestyle,
}


def run_scenario(
    name: str,
    *,
    seed: int = 0,
    latency_ms: float = 0.0,
    jitter_ms: float = 0.0,
    loss: float = 0.0,
    traces_dir=None,
    manifest: SkeletonManifest | None = None,
    recorder=None,
) -> ScenarioResult:
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIO_NAMES}") from None
    conditions = NetworkConditions(latency_ms=latency_ms, jitter_ms=jitter_ms, loss_fraction=loss)
    return runner(
        seed=seed, conditions=conditions, traces_dir=traces_dir, manifest=manifest, recorder=recorder
    )
