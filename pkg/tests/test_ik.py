"""Two-bone IK against the law-of-cosines oracle, and the nine-joint solve."""

import math
import random

import pytest

from podium.kinematics import DegenerateInput, IKTargets, solve_ik_pose, solve_two_bone
from podium.protocol.types import IDENTITY_ROTATION, JointTransform, Locomotion


def _dist(a, b):
    return math.dist(a, b)


def _law_of_cosines_elbow(a, b, d):
    return math.acos(max(-1.0, min(1.0, (a * a + b * b - d * d) / (2 * a * b))))


def _geometric_elbow_angle(sol, shoulder):
    v1 = tuple(s - e for s, e in zip(shoulder, sol.elbow_pos))
    v2 = tuple(t - e for t, e in zip(sol.end_pos, sol.elbow_pos))
    n1 = math.sqrt(sum(v * v for v in v1))
    n2 = math.sqrt(sum(v * v for v in v2))
    d = sum(x * y for x, y in zip(v1, v2)) / (n1 * n2)
    return math.acos(max(-1.0, min(1.0, d)))


def test_full_extension():
    sol = solve_two_bone((0, 0, 0), (0.6, 0, 0), 0.3, 0.3, (0, 0, -1))
    assert sol.reached is True
    assert sol.elbow_angle == pytest.approx(math.pi, abs=1e-12)
    assert _dist(sol.end_pos, (0.6, 0, 0)) < 1e-12


def test_law_of_cosines_example():
    sol = solve_two_bone((0, 0, 0), (0.3, 0, 0), 0.3, 0.3, (0, 0, -1))
    assert sol.elbow_angle == pytest.approx(math.radians(60.0), abs=1e-12)
    assert _geometric_elbow_angle(sol, (0, 0, 0)) == pytest.approx(sol.elbow_angle, abs=1e-9)


def test_unreachable_clamps():
    sol = solve_two_bone((0, 0, 0), (0.7, 0, 0), 0.3, 0.3, (0, 0, -1))
    assert sol.reached is False
    assert _dist(sol.end_pos, (0.6, 0, 0)) < 1e-12


def test_too_close_clamps_to_min_reach():
    sol = solve_two_bone((0, 0, 0), (0.05, 0, 0), 0.4, 0.2, (0, 0, -1))
    assert sol.reached is False
    assert _dist(sol.end_pos, (0, 0, 0)) == pytest.approx(0.2, abs=1e-12)


def test_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        solve_two_bone((0, 0, 0), (1, 0, 0), 0.0, 0.3, (0, 0, -1))
    # pole collinear with reach falls back to the fallback pole
    sol = solve_two_bone((0, 0, 0), (0.4, 0, 0), 0.3, 0.3, (1, 0, 0), fallback_pole=(0, 0, -1))
    assert sol.reached
    # both collinear is unsolvable
    with pytest.raises(DegenerateInput):
        solve_two_bone((0, 0, 0), (0.4, 0, 0), 0.3, 0.3, (1, 0, 0), fallback_pole=(-2, 0, 0))


def test_random_reachable_sweep():
    """Reach + elbow-angle oracle + elbow-plane property over random solves."""
    rng = random.Random(77)
    for _ in range(2000):
        a = rng.uniform(0.1, 0.6)
        b = rng.uniform(0.1, 0.6)
        shoulder = tuple(rng.uniform(-1, 1) for _ in range(3))
        d = rng.uniform(abs(a - b) + 1e-4, (a + b) - 1e-4)
        direction = [rng.gauss(0, 1) for _ in range(3)]
        n = math.sqrt(sum(v * v for v in direction)) or 1.0
        target = tuple(s + d * v / n for s, v in zip(shoulder, direction))
        pole = tuple(rng.gauss(0, 1) for _ in range(3))
        try:
            sol = solve_two_bone(shoulder, target, a, b, pole)
        except DegenerateInput:
            continue  # pole collinear with reach and with fallback; skip
        assert sol.reached
        assert _dist(sol.end_pos, target) < 1e-5
        assert _dist(sol.elbow_pos, shoulder) == pytest.approx(a, abs=1e-9)
        assert _dist(sol.elbow_pos, sol.end_pos) == pytest.approx(b, abs=1e-9)
        want = _law_of_cosines_elbow(a, b, d)
        assert abs(sol.elbow_angle - want) < 1e-6
        assert abs(_geometric_elbow_angle(sol, shoulder) - want) < 1e-6
        # elbow in the plane spanned by reach line and pole
        reach = tuple(t - s for t, s in zip(target, shoulder))
        normal = (
            reach[1] * pole[2] - reach[2] * pole[1],
            reach[2] * pole[0] - reach[0] * pole[2],
            reach[0] * pole[1] - reach[1] * pole[0],
        )
        nn = math.sqrt(sum(v * v for v in normal))
        if nn > 1e-6:
            offset = tuple(e - s for e, s in zip(sol.elbow_pos, shoulder))
            assert abs(sum(o * v / nn for o, v in zip(offset, normal))) < 1e-6


def _rest_targets(manifest):
    return IKTargets(
        head=JointTransform(manifest.rest_position(manifest.index_of["head"]), IDENTITY_ROTATION),
        left_hand=JointTransform(
            manifest.rest_position(manifest.index_of["left_hand"]), IDENTITY_ROTATION
        ),
        right_hand=JointTransform(
            manifest.rest_position(manifest.index_of["right_hand"]), IDENTITY_ROTATION
        ),
    )


def test_pose_solve_rest_fixed_point(manifest):
    pose = solve_ik_pose(_rest_targets(manifest), manifest)
    names = (
        "hips", "spine_02", "head",
        "left_upper_arm", "left_forearm", "left_hand",
        "right_upper_arm", "right_forearm", "right_hand",
    )
    for jt, name in zip(pose.joints, names):
        rest = manifest.rest_position(manifest.index_of[name])
        assert _dist(jt.position, rest) < 1e-5, name
    assert pose.locomotion is Locomotion.IDLE


def test_pose_solve_translation_equivariance(manifest):
    base = _rest_targets(manifest)
    moved = IKTargets(
        head=JointTransform(tuple(v + o for v, o in zip(base.head.position, (1, 0, 0))), IDENTITY_ROTATION),
        left_hand=JointTransform(
            tuple(v + o for v, o in zip(base.left_hand.position, (1, 0, 0))), IDENTITY_ROTATION
        ),
        right_hand=JointTransform(
            tuple(v + o for v, o in zip(base.right_hand.position, (1, 0, 0))), IDENTITY_ROTATION
        ),
    )
    p0 = solve_ik_pose(base, manifest)
    p1 = solve_ik_pose(moved, manifest)
    for a, b in zip(p0.joints, p1.joints):
        assert abs(a.position[0] + 1.0 - b.position[0]) < 1e-9
        assert abs(a.position[1] - b.position[1]) < 1e-9
        assert abs(a.position[2] - b.position[2]) < 1e-9


def test_pose_solve_unreachable_hands_stay_finite(manifest):
    """Clamp + finiteness sweep over random, often unreachable, targets."""
    rng = random.Random(4242)
    arm_reach = math.dist(
        manifest.rest_position(manifest.index_of["left_upper_arm"]),
        manifest.rest_position(manifest.index_of["left_hand"]),
    )
    for _ in range(1000):
        head = JointTransform(
            (rng.uniform(-3, 3), rng.uniform(0.8, 2.2), rng.uniform(-3, 3)), IDENTITY_ROTATION
        )
        targets = IKTargets(
            head=head,
            left_hand=JointTransform(
                tuple(h + rng.uniform(-2, 2) for h in head.position), IDENTITY_ROTATION
            ),
            right_hand=JointTransform(
                tuple(h + rng.uniform(-2, 2) for h in head.position), IDENTITY_ROTATION
            ),
        )
        pose = solve_ik_pose(targets, manifest)
        for jt in pose.joints:
            assert all(math.isfinite(v) for v in jt.position)
            assert all(math.isfinite(v) for v in jt.rotation)
            assert abs(sum(v * v for v in jt.rotation) - 1.0) < 1e-6
        # hand joints sit on or within the reach sphere around the shoulders
        for shoulder, hand in ((3, 5), (6, 8)):
            reach = _dist(pose.joints[shoulder].position, pose.joints[hand].position)
            assert reach <= arm_reach + 1e-6


def test_pose_solve_hips_damping(manifest):
    base = _rest_targets(manifest)
    prev = solve_ik_pose(base, manifest)
    moved = IKTargets(
        head=JointTransform(
            (base.head.position[0] + 1.0, base.head.position[1], base.head.position[2]),
            IDENTITY_ROTATION,
        ),
        left_hand=base.left_hand,
        right_hand=base.right_hand,
    )
    step = solve_ik_pose(moved, manifest, prev=prev, damping=0.2)
    # hips consumed 20% of the horizontal offset, full height tracking
    assert step.joints[0].position[0] == pytest.approx(0.2, abs=1e-9)
    snapped = solve_ik_pose(moved, manifest)  # no prev: directly under head
    assert snapped.joints[0].position[0] == pytest.approx(1.0, abs=1e-9)


def test_pose_solve_continuity(manifest):
    """Targets 1 mm apart produce joints within 5 mm (no pole flips)."""
    rng = random.Random(99)
    for _ in range(300):
        head_pos = (rng.uniform(-1, 1), rng.uniform(1.3, 1.9), rng.uniform(-1, 1))
        hand_l = (
            head_pos[0] + rng.uniform(0.05, 0.5),
            head_pos[1] - rng.uniform(0.0, 0.6),
            head_pos[2] + rng.uniform(0.05, 0.5),
        )
        hand_r = (
            head_pos[0] - rng.uniform(0.05, 0.5),
            head_pos[1] - rng.uniform(0.0, 0.6),
            head_pos[2] + rng.uniform(0.05, 0.5),
        )
        t0 = IKTargets(
            head=JointTransform(head_pos, IDENTITY_ROTATION),
            left_hand=JointTransform(hand_l, IDENTITY_ROTATION),
            right_hand=JointTransform(hand_r, IDENTITY_ROTATION),
        )
        eps = 0.001 / math.sqrt(3.0)
        t1 = IKTargets(
            head=JointTransform(tuple(v + eps for v in head_pos), IDENTITY_ROTATION),
            left_hand=JointTransform(tuple(v + eps for v in hand_l), IDENTITY_ROTATION),
            right_hand=JointTransform(tuple(v + eps for v in hand_r), IDENTITY_ROTATION),
        )
        p0 = solve_ik_pose(t0, manifest)
        p1 = solve_ik_pose(t1, manifest)
        for a, b in zip(p0.joints, p1.joints):
            assert _dist(a.position, b.position) <= 0.005
