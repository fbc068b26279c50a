"""Run metrics: bandwidth, end-to-end pose latency percentiles, positional
fidelity against ground truth, drop/violation counts.

All aggregation is deterministic (sorted percentile ranks, stable JSON key
order), so identical runs serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass


def percentile(sorted_values: list[float], p: float) -> float:
    """Nearest-rank percentile over an ascending list."""
    if not sorted_values:
        return 0.0
    rank = max(1, math.ceil(p / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


@dataclass(frozen=True, slots=True)
class RunMetrics:
    scenario: str
    seed: int
    duration_ms: float
    per_role: dict  # role name -> {"uplink_bytes_per_s", "downlink_bytes_per_s", ...}
    pose_latency_ms: dict  # {"p50", "p95", "p99", "count"}
    mean_positional_error_m: float
    max_positional_error_m: float
    dropped_frames: int
    stale_dropped: int
    violations_rejected: int
    audio_dropped: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "scenario": self.scenario,
                "seed": self.seed,
                "duration_ms": self.duration_ms,
                "per_role": self.per_role,
                "pose_latency_ms": self.pose_latency_ms,
                "mean_positional_error_m": self.mean_positional_error_m,
                "max_positional_error_m": self.max_positional_error_m,
                "dropped_frames": self.dropped_frames,
                "stale_dropped": self.stale_dropped,
                "violations_rejected": self.violations_rejected,
                "audio_dropped": self.audio_dropped,
            },
            sort_keys=True,
            indent=1,
        )


class TruthLog:
    """Ground-truth root positions a bot actually streamed, by send time."""

    __slots__ = ("times", "positions")

    def __init__(self):
        self.times: list[float] = []
        self.positions: list[tuple[float, float, float]] = []

    def record(self, t_ms: float, position) -> None:
        self.times.append(t_ms)
        self.positions.append(tuple(position))

    def at(self, t_ms: float) -> tuple[float, float, float] | None:
        """Linear interpolation of the truth trajectory; None outside coverage."""
        times = self.times
        if not times or t_ms < times[0] or t_ms > times[-1]:
            return None
        lo, hi = 0, len(times) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if times[mid] <= t_ms:
                lo = mid
            else:
                hi = mid
        if times[lo] == t_ms or lo == hi:
            return self.positions[lo]
        t0, t1 = times[lo], times[hi]
        k = (t_ms - t0) / (t1 - t0)
        p0, p1 = self.positions[lo], self.positions[hi]
        return (
            p0[0] + (p1[0] - p0[0]) * k,
            p0[1] + (p1[1] - p0[1]) * k,
            p0[2] + (p1[2] - p0[2]) * k,
        )


class ClockSkewUnresolved(ValueError):
    """Observed samples never overlap the (delay-shifted) truth trajectory."""


def compute_positional_error(
    truth: TruthLog,
    observed: list[tuple[float, tuple[float, float, float]]],
    *,
    delay_ms: float = 100.0,
) -> float:
    """Mean distance between observed root positions and the ground truth
    delayed by the interpolation delay.

    `observed` holds (sample_time_ms, position) pairs from a remote view;
    each is compared against truth at sample_time - delay.  Samples outside
    the truth trajectory's support are skipped; if none overlap at all, the
    clocks were never aligned and ClockSkewUnresolved is raised.
    """
    errors = []
    for t_ms, pos in observed:
        expected = truth.at(t_ms - delay_ms)
        if expected is None:
            continue
        dx = pos[0] - expected[0]
        dy = pos[1] - expected[1]
        dz = pos[2] - expected[2]
        errors.append(math.sqrt(dx * dx + dy * dy + dz * dz))
    if not errors:
        raise ClockSkewUnresolved(
            "no observed sample falls inside the truth trajectory; clocks unaligned"
        )
    return sum(errors) / len(errors)


class MetricsCollector:
    def __init__(self):
        self.uplink_bytes: dict[int, int] = {}
        self.downlink_bytes: dict[int, int] = {}
        self.roles: dict[int, str] = {}
        self.pose_latencies: list[float] = []
        self.positional_errors: list[float] = []
        self.window_start_ms = 0.0
        self.window_end_ms = 0.0

    def register(self, participant_id: int, role_name: str) -> None:
        self.roles[participant_id] = role_name
        self.uplink_bytes.setdefault(participant_id, 0)
        self.downlink_bytes.setdefault(participant_id, 0)

    def count_uplink(self, participant_id: int, n: int, t_ms: float) -> None:
        if self.window_start_ms <= t_ms < self.window_end_ms:
            self.uplink_bytes[participant_id] = self.uplink_bytes.get(participant_id, 0) + n

    def count_downlink(self, participant_id: int, n: int, t_ms: float) -> None:
        if self.window_start_ms <= t_ms < self.window_end_ms:
            self.downlink_bytes[participant_id] = self.downlink_bytes.get(participant_id, 0) + n

    def record_pose_latency(self, latency_ms: float) -> None:
        self.pose_latencies.append(latency_ms)

    def record_positional_error(self, error_m: float) -> None:
        self.positional_errors.append(error_m)

    def build(
        self,
        scenario: str,
        seed: int,
        *,
        dropped_frames: int,
        stale_dropped: int,
        violations_rejected: int,
        audio_dropped: int,
    ) -> RunMetrics:
        duration_s = (self.window_end_ms - self.window_start_ms) / 1000.0
        per_role: dict[str, dict] = {}
        for pid, role_name in sorted(self.roles.items()):
            bucket = per_role.setdefault(
                role_name,
                {"participants": 0, "uplink_bytes_per_s": 0.0, "downlink_bytes_per_s": 0.0},
            )
            bucket["participants"] += 1
            bucket["uplink_bytes_per_s"] += self.uplink_bytes.get(pid, 0) / duration_s
            bucket["downlink_bytes_per_s"] += self.downlink_bytes.get(pid, 0) / duration_s
        for bucket in per_role.values():
            n = bucket["participants"]
            bucket["uplink_bytes_per_s"] /= n
            bucket["downlink_bytes_per_s"] /= n

        lats = sorted(self.pose_latencies)
        latency = {
            "count": len(lats),
            "p50": percentile(lats, 50),
            "p95": percentile(lats, 95),
            "p99": percentile(lats, 99),
        }
        errs = self.positional_errors
        mean_err = sum(errs) / len(errs) if errs else 0.0
        max_err = max(errs) if errs else 0.0
        return RunMetrics(
            scenario=scenario,
            seed=seed,
            duration_ms=self.window_end_ms - self.window_start_ms,
            per_role=per_role,
            pose_latency_ms=latency,
            mean_positional_error_m=mean_err,
            max_positional_error_m=max_err,
            dropped_frames=dropped_frames,
            stale_dropped=stale_dropped,
            violations_rejected=violations_rejected,
            audio_dropped=audio_dropped,
        )
