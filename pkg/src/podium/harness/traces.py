"""Motion traces: scripted bot inputs as JSON-Lines bundles.

A bundle file holds every bot of one scenario, one timestamped input per
line.  Each bot opens with a header line, then motion samples (sensor frames
for full-body bots, IK targets for headset bots, key intents for browser
bots) and control events (slide/mute/phase), timestamps strictly increasing
per bot:

    {"t_ms": 0, "bot": "presenter", "kind": "header", "role": "presenter"}
    {"t_ms": 0, "bot": "presenter", "kind": "sensor_frame", "sensors": {...}}
    {"t_ms": 3000, "bot": "presenter", "kind": "slide", "index": 1}
    {"t_ms": 0, "bot": "vr", "kind": "ik_targets", "head": {"p": [...], "q": [...]}, ...}
    {"t_ms": 0, "bot": "walker", "kind": "intent", "keys": "W", "yaw": 0.0}

Bots resample motion between keyframes (positions lerp, rotations slerp;
intents are step functions), so trace keyframe rate is independent of a
bot's stream rate.  The canonical bundles are generated deterministically;
the checked-in files and `generate_bundle()` agree byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from podium.kinematics import quat
from podium.kinematics.ik import solve_two_bone
from podium.kinematics.retarget import SensorFrame
from podium.kinematics.skeleton import SensorId, SkeletonManifest, default_manifest
from podium.kinematics.ik import IKTargets
from podium.protocol.types import IDENTITY_ROTATION, JointTransform, Role

MOTION_KINDS = ("sensor_frame", "ik_targets", "intent")
EVENT_KINDS = ("slide", "mute", "phase")

_ROLE_NAMES = {r.name.lower(): r for r in Role}
# events a trace of the given role may carry (authority mirror)
_ROLE_EVENTS = {
    Role.PRESENTER: {"slide", "mute", "phase"},
    Role.EXAMINER: {"mute"},
    Role.AUDIENCE: {"mute"},
    Role.ONSITE_BRIDGE: set(),
}


class TraceError(ValueError):
    pass


@dataclass
class MotionTrace:
    bot: str
    role: Role
    samples: list[tuple[int, dict]] = field(default_factory=list)
    events: list[tuple[int, dict]] = field(default_factory=list)

    def validate(self) -> None:
        for series, label in ((self.samples, "samples"), (self.events, "events")):
            last = None
            for t, _ in series:
                if last is not None and t <= last:
                    raise TraceError(f"{self.bot}: {label} timestamps must strictly increase")
                last = t
        kinds = {s[1]["kind"] for s in self.samples}
        if len(kinds) > 1:
            raise TraceError(f"{self.bot}: mixed motion kinds {sorted(kinds)}")
        allowed = _ROLE_EVENTS[self.role]
        for _, e in self.events:
            if e["kind"] not in allowed:
                raise TraceError(
                    f"{self.bot}: event {e['kind']!r} not permitted for role {self.role.name}"
                )

    @property
    def duration_ms(self) -> int:
        t = 0
        if self.samples:
            t = max(t, self.samples[-1][0])
        if self.events:
            t = max(t, self.events[-1][0])
        return t


# ---------------------------------------------------------------------------
# serialization


def _jt_to_doc(t: JointTransform) -> dict:
    return {"p": [round(v, 5) for v in t.position], "q": [round(v, 6) for v in t.rotation]}


def _jt_from_doc(d: dict) -> JointTransform:
    return JointTransform(position=tuple(d["p"]), rotation=tuple(d["q"]))


def save_bundle(traces: list[MotionTrace], path: str | Path) -> None:
    lines = []
    for tr in traces:
        tr.validate()
        rows = [(0, {"kind": "header", "role": tr.role.name.lower()})]
        rows += [(t, s) for t, s in tr.samples]
        rows += [(t, e) for t, e in tr.events]
        for t, doc in rows:
            line = {"t_ms": t, "bot": tr.bot}
            line.update(doc)
            lines.append(line)
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(json.dumps(line, sort_keys=True) + "\n")


def load_bundle(path: str | Path) -> dict[str, MotionTrace]:
    traces: dict[str, MotionTrace] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                doc = json.loads(raw)
                t = int(doc.pop("t_ms"))
                bot = doc.pop("bot")
                kind = doc["kind"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise TraceError(f"{path}:{lineno}: bad trace line ({exc})") from None
            if kind == "header":
                role = _ROLE_NAMES.get(doc.get("role", ""))
                if role is None:
                    raise TraceError(f"{path}:{lineno}: unknown role {doc.get('role')!r}")
                traces[bot] = MotionTrace(bot=bot, role=role)
            elif kind in MOTION_KINDS:
                traces[bot].samples.append((t, doc))
            elif kind in EVENT_KINDS:
                traces[bot].events.append((t, doc))
            else:
                raise TraceError(f"{path}:{lineno}: unknown kind {kind!r}")
    for tr in traces.values():
        tr.validate()
    return traces


# ---------------------------------------------------------------------------
# resampling


def _bracket(samples: list[tuple[int, dict]], t_ms: float) -> tuple[tuple[int, dict], tuple[int, dict], float]:
    if t_ms <= samples[0][0]:
        return samples[0], samples[0], 0.0
    if t_ms >= samples[-1][0]:
        return samples[-1], samples[-1], 0.0
    lo, hi = 0, len(samples) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if samples[mid][0] <= t_ms:
            lo = mid
        else:
            hi = mid
    k = (t_ms - samples[lo][0]) / (samples[hi][0] - samples[lo][0])
    return samples[lo], samples[hi], k


def _blend_jt(d0: dict, d1: dict, k: float) -> JointTransform:
    p0, p1 = d0["p"], d1["p"]
    return JointTransform(
        position=(
            p0[0] + (p1[0] - p0[0]) * k,
            p0[1] + (p1[1] - p0[1]) * k,
            p0[2] + (p1[2] - p0[2]) * k,
        ),
        rotation=quat.slerp(tuple(d0["q"]), tuple(d1["q"]), k),
    )


class TraceSampler:
    """Continuous-time view of one bot's motion samples."""

    def __init__(self, trace: MotionTrace):
        if not trace.samples:
            raise TraceError(f"{trace.bot}: trace has no motion samples")
        self.trace = trace
        self.kind = trace.samples[0][1]["kind"]

    def sensor_frame_at(self, t_ms: float) -> SensorFrame:
        (_, d0), (_, d1), k = _bracket(self.trace.samples, t_ms)
        sensors = {}
        for key in d0["sensors"]:
            sensors[SensorId(key)] = (
                _jt_from_doc(d0["sensors"][key])
                if k == 0.0
                else _blend_jt(d0["sensors"][key], d1["sensors"][key], k)
            )
        return SensorFrame(sensors=sensors)

    def ik_targets_at(self, t_ms: float) -> IKTargets:
        (_, d0), (_, d1), k = _bracket(self.trace.samples, t_ms)

        def part(name):
            return _jt_from_doc(d0[name]) if k == 0.0 else _blend_jt(d0[name], d1[name], k)

        return IKTargets(head=part("head"), left_hand=part("left_hand"), right_hand=part("right_hand"))

    def intent_at(self, t_ms: float) -> dict:
        """Step function: the intent in force at t_ms (held until the next sample)."""
        samples = self.trace.samples
        if t_ms <= samples[0][0]:
            return samples[0][1]
        (_, d0), _, _ = _bracket(samples, t_ms)
        return d0


# ---------------------------------------------------------------------------
# canonical bundle generation

_CANONICAL = ("handshake", "presentation", "freestyle")


def _sensor_doc(manifest: SkeletonManifest, rotations: dict[SensorId, tuple], hips_pos) -> dict:
    sensors = {}
    for sid, joint in manifest.sensor_joint.items():
        pos = hips_pos if sid is SensorId.HIPS else manifest.rest_position(joint)
        q = rotations.get(sid, IDENTITY_ROTATION)
        sensors[sid.value] = {"p": [round(v, 5) for v in pos], "q": [round(v, 6) for v in q]}
    return {"kind": "sensor_frame", "sensors": sensors}


def _smoothstep(t: float) -> float:
    t = min(1.0, max(0.0, t))
    return t * t * (3.0 - 2.0 * t)


def _arm_sensors_for_target(
    manifest: SkeletonManifest, side: str, hips_pos, hips_rot, target
) -> dict[SensorId, tuple]:
    """Sensor rotations that place one hand at a world target (trace tooling).

    Trunk is assumed identity apart from the hips rotation; arm bones aim via
    minimal-twist swings, so FK lands the hand on the two-bone solution.
    """
    sign = 1.0 if side == "left" else -1.0
    up_s = SensorId.LEFT_UPPER_ARM if side == "left" else SensorId.RIGHT_UPPER_ARM
    fo_s = SensorId.LEFT_FOREARM if side == "left" else SensorId.RIGHT_FOREARM
    hips0 = manifest.rest_position(manifest.sensor_joint[SensorId.HIPS])
    sh0 = manifest.rest_position(manifest.sensor_joint[up_s])
    el0 = manifest.rest_position(manifest.sensor_joint[fo_s])
    ha0 = manifest.rest_position(manifest.sensor_joint[SensorId.LEFT_HAND if side == "left" else SensorId.RIGHT_HAND])
    a = math.dist(sh0, el0)
    b = math.dist(el0, ha0)
    shoulder_off = (sh0[0] - hips0[0], sh0[1] - hips0[1], sh0[2] - hips0[2])
    ro = quat.rotate_vector(hips_rot, shoulder_off)
    shoulder = (hips_pos[0] + ro[0], hips_pos[1] + ro[1], hips_pos[2] + ro[2])
    pole = quat.rotate_vector(hips_rot, (sign * 0.3, -0.6, -0.74))
    lateral = quat.rotate_vector(hips_rot, (sign, 0.0, 0.0))
    sol = solve_two_bone(
        shoulder, target, a, b, pole, fallback_pole=lateral, rest_dir=(sign, 0.0, 0.0)
    )
    # world bone rotations back to sensor-local (trunk is identity except hips)
    upper_local = quat.multiply(quat.conjugate(hips_rot), sol.upper_rotation)
    lower_local = quat.multiply(quat.conjugate(sol.upper_rotation), sol.lower_rotation)
    return {up_s: upper_local, fo_s: lower_local}


def _gen_handshake(manifest: SkeletonManifest) -> list[MotionTrace]:
    """Two parties approach to 0.8 m, extend right hands to a shared meet
    point, hold, and release; a third (observer) bot needs no trace."""
    rate_hz = 20
    duration_ms = 10_000
    meet = (0.0, 1.25, 0.0)
    approach_end = 4000
    extend_end = 5000
    hold_end = 8000

    presenter = MotionTrace(bot="presenter", role=Role.PRESENTER)
    examiner = MotionTrace(bot="examiner", role=Role.EXAMINER)

    yaw_back = quat.from_axis_angle((0.0, 1.0, 0.0), math.pi)
    rest_hand_r = manifest.rest_position(manifest.sensor_joint[SensorId.RIGHT_HAND])
    hips0 = manifest.rest_position(manifest.sensor_joint[SensorId.HIPS])
    side_off_r = (rest_hand_r[0] - hips0[0], rest_hand_r[1] - hips0[1], rest_hand_r[2] - hips0[2])

    steps = duration_ms * rate_hz // 1000
    for i in range(steps + 1):
        t = i * 1000 // rate_hz
        # walk-in: z from +/-1.5 to +/-0.4 (0.8 m separation), eased
        w = _smoothstep(t / approach_end) if t < approach_end else 1.0
        z_p = -1.5 + (-0.4 - -1.5) * w
        z_e = 1.5 + (0.4 - 1.5) * w
        # right-hand raise/release blend
        if t < approach_end:
            reach = 0.0
        elif t < extend_end:
            reach = _smoothstep((t - approach_end) / (extend_end - approach_end))
        elif t <= hold_end:
            reach = 1.0
        else:
            reach = 1.0 - _smoothstep((t - hold_end) / (duration_ms - hold_end))
        bob = 0.02 * math.sin(2.0 * math.pi * (t - extend_end) / 500.0) if extend_end <= t <= hold_end else 0.0
        target_now = (meet[0], meet[1] + bob, meet[2])

        # presenter: sensor frame, facing +z at (0, 0.95, z_p)
        hips_p = (0.0, 0.95, z_p)
        rest_target_p = (hips_p[0] + side_off_r[0], hips_p[1] + side_off_r[1], hips_p[2] + side_off_r[2])
        goal_p = tuple(
            rest_target_p[k] + (target_now[k] - rest_target_p[k]) * reach for k in range(3)
        )
        rots = _arm_sensors_for_target(manifest, "right", hips_p, IDENTITY_ROTATION, goal_p) if reach > 0 else {}
        presenter.samples.append((t, _sensor_doc(manifest, rots, hips_p)))

        # examiner: IK targets, facing -z at (0, ?, z_e)
        head_e = {"p": [0.0, 1.6, round(z_e, 5)], "q": [round(v, 6) for v in yaw_back]}
        side_world = quat.rotate_vector(yaw_back, side_off_r)
        rest_target_e = (0.0 + side_world[0], 0.95 + side_world[1], z_e + side_world[2])
        goal_e = tuple(
            rest_target_e[k] + (target_now[k] - rest_target_e[k]) * reach for k in range(3)
        )
        left_world = quat.rotate_vector(yaw_back, (side_off_r[0] * -1.0, side_off_r[1], side_off_r[2]))
        left_e = (0.0 + left_world[0], 0.95 + left_world[1], z_e + left_world[2])
        examiner.samples.append(
            (
                t,
                {
                    "kind": "ik_targets",
                    "head": head_e,
                    "left_hand": {"p": [round(v, 5) for v in left_e], "q": [round(v, 6) for v in yaw_back]},
                    "right_hand": {"p": [round(v, 5) for v in goal_e], "q": [round(v, 6) for v in yaw_back]},
                },
            )
        )
    return [presenter, examiner]


def _gesture_rotations(t_s: float, vigor: float) -> dict[SensorId, tuple]:
    """Procedural upper-body motion; vigor scales amplitude and tempo."""
    two_pi = 2.0 * math.pi
    yaw = 0.26 * vigor * math.sin(two_pi * t_s / 8.0)
    sway = 0.06 * vigor * math.sin(two_pi * t_s / 5.3)
    nod = 0.18 * vigor * math.sin(two_pi * t_s / 4.1)
    lift_l = 0.45 + 0.35 * vigor * math.sin(two_pi * t_s / 2.2)
    lift_r = 0.45 + 0.35 * vigor * math.sin(two_pi * t_s / 2.6 + 1.3)
    bend_l = 0.5 + 0.45 * vigor * math.sin(two_pi * t_s / 1.7 + 0.4)
    bend_r = 0.5 + 0.45 * vigor * math.sin(two_pi * t_s / 1.9 + 2.1)
    swing = 0.25 * vigor * math.sin(two_pi * t_s / 1.3)
    return {
        SensorId.HIPS: quat.from_axis_angle((0.0, 1.0, 0.0), yaw),
        SensorId.SPINE: quat.from_axis_angle((0.0, 0.0, 1.0), sway),
        SensorId.HEAD: quat.from_axis_angle((1.0, 0.0, 0.0), nod),
        # arms swing down-forward: negative z lowers the left arm, mirrored right
        SensorId.LEFT_UPPER_ARM: quat.multiply(
            quat.from_axis_angle((0.0, 0.0, 1.0), -lift_l),
            quat.from_axis_angle((0.0, 1.0, 0.0), -swing),
        ),
        SensorId.RIGHT_UPPER_ARM: quat.multiply(
            quat.from_axis_angle((0.0, 0.0, 1.0), lift_r),
            quat.from_axis_angle((0.0, 1.0, 0.0), swing),
        ),
        SensorId.LEFT_FOREARM: quat.from_axis_angle((0.0, 1.0, 0.0), -bend_l),
        SensorId.RIGHT_FOREARM: quat.from_axis_angle((0.0, 1.0, 0.0), bend_r),
        SensorId.LEFT_THIGH: quat.from_axis_angle((1.0, 0.0, 0.0), 0.12 * vigor * math.sin(two_pi * t_s / 1.1)),
        SensorId.RIGHT_THIGH: quat.from_axis_angle((1.0, 0.0, 0.0), -0.12 * vigor * math.sin(two_pi * t_s / 1.1)),
    }


def _gen_presenter_motion(
    manifest: SkeletonManifest, *, duration_ms: int, rate_hz: int, vigor: float, roam_m: float
) -> MotionTrace:
    trace = MotionTrace(bot="presenter", role=Role.PRESENTER)
    two_pi = 2.0 * math.pi
    steps = duration_ms * rate_hz // 1000
    period_s = max(20.0, duration_ms / 2000.0)
    for i in range(steps + 1):
        t = i * 1000 // rate_hz
        t_s = t / 1000.0
        hips = (
            roam_m * math.sin(two_pi * t_s / period_s),
            0.95 + 0.015 * vigor * math.sin(two_pi * t_s / 3.7),
            -0.8 + 0.5 * roam_m * math.cos(two_pi * t_s / period_s),
        )
        trace.samples.append((t, _sensor_doc(manifest, _gesture_rotations(t_s, vigor), hips)))
    return trace


def _gen_presentation(manifest: SkeletonManifest) -> list[MotionTrace]:
    duration = 60_000
    presenter = _gen_presenter_motion(
        manifest, duration_ms=duration, rate_hz=10, vigor=0.7, roam_m=0.5
    )
    for i in range(10):
        presenter.events.append((3000 + i * 5500, {"kind": "slide", "index": i + 1}))

    vr = MotionTrace(bot="vr-examiner", role=Role.EXAMINER)
    two_pi = 2.0 * math.pi
    for i in range(0, duration // 100 + 1):
        t = i * 100
        t_s = t / 1000.0
        cx, cz = 1.2, 2.2
        hx = cx + 0.7 * math.sin(two_pi * t_s / 23.0)
        hz = cz + 0.7 * math.cos(two_pi * t_s / 23.0)
        head_q = quat.from_axis_angle((0.0, 1.0, 0.0), math.pi + 0.3 * math.sin(two_pi * t_s / 9.0))
        sway = 0.1 * math.sin(two_pi * t_s / 2.9)
        vr.samples.append(
            (
                t,
                {
                    "kind": "ik_targets",
                    "head": {"p": [round(hx, 5), 1.6, round(hz, 5)], "q": [round(v, 6) for v in head_q]},
                    "left_hand": {
                        "p": [round(hx + 0.3, 5), round(1.0 + sway, 5), round(hz, 5)],
                        "q": [0.0, 0.0, 0.0, 1.0],
                    },
                    "right_hand": {
                        "p": [round(hx - 0.3, 5), round(1.0 - sway, 5), round(hz, 5)],
                        "q": [0.0, 0.0, 0.0, 1.0],
                    },
                },
            )
        )

    walkers = []
    pattern = [("W", 2500), ("", 1500), ("WA", 2000), ("", 1000), ("S", 1500), ("D", 2000), ("", 1500)]
    for w, name in enumerate(("walker-1", "walker-2")):
        tr = MotionTrace(bot=name, role=Role.AUDIENCE)
        rotated = pattern[2 * w :] + pattern[: 2 * w]
        t = 0
        yaw = -2.0 + 0.9 * w
        while t <= duration:
            for keys, hold in rotated:
                if t > duration:
                    break
                wrapped = math.remainder(yaw, 2.0 * math.pi)
                tr.samples.append((t, {"kind": "intent", "keys": keys, "yaw": round(wrapped, 5)}))
                yaw += 0.35
                t += hold
        walkers.append(tr)
    return [presenter, vr] + walkers


def _gen_freestyle(manifest: SkeletonManifest) -> list[MotionTrace]:
    return [
        _gen_presenter_motion(manifest, duration_ms=20_000, rate_hz=10, vigor=1.6, roam_m=1.0)
    ]


def generate_bundle(name: str, manifest: SkeletonManifest | None = None) -> list[MotionTrace]:
    manifest = manifest or default_manifest()
    if name == "handshake":
        return _gen_handshake(manifest)
    if name == "presentation":
        return _gen_presentation(manifest)
    if name == "freestyle":
        return _gen_freestyle(manifest)
    raise TraceError(f"unknown canonical bundle {name!r}; expected one of {_CANONICAL}")


def load_or_generate(name: str, traces_dir: str | Path | None) -> dict[str, MotionTrace]:
    """Load <dir>/<name>.jsonl when present; otherwise regenerate (identical content)."""
    if traces_dir is not None:
        path = Path(traces_dir) / f"{name}.jsonl"
        if path.exists():
            return load_bundle(path)
    return {tr.bot: tr for tr in generate_bundle(name)}


def write_canonical(traces_dir: str | Path) -> list[Path]:
    out = []
    directory = Path(traces_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for name in _CANONICAL:
        path = directory / f"{name}.jsonl"
        save_bundle(generate_bundle(name), path)
        out.append(path)
    return out
