"""Sensor-to-skeleton retargeting against an independent FK oracle."""

import math
import random

import numpy as np
import pytest

from podium.kinematics import (
    MissingSensor,
    SensorFrame,
    SensorId,
    identity_frame,
    retarget,
)
from podium.kinematics import quat
from podium.protocol.types import IDENTITY_ROTATION, JointTransform


def _quat_mat(q):
    x, y, z, w = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def oracle_fk(manifest, pose):
    """Recompute joint positions from the pose's local rotations + rest offsets."""
    n = manifest.joint_count
    pos = np.zeros((n, 3))
    rot = [None] * n
    for j in range(n):
        R = _quat_mat(pose.joints[j].rotation)
        p = manifest.parents[j]
        if p < 0:
            pos[j] = pose.joints[j].position
            rot[j] = R
        else:
            pos[j] = pos[p] + rot[p] @ np.array(manifest.rest_offsets[j])
            rot[j] = rot[p] @ R
    return pos


def _rand_unit_quat(rng, scale=1.0):
    axis = [rng.gauss(0, 1) for _ in range(3)]
    n = math.sqrt(sum(v * v for v in axis)) or 1.0
    return quat.from_axis_angle(tuple(v / n for v in axis), rng.uniform(-scale, scale))


def test_identity_frame_reproduces_rest_pose_bitwise(manifest):
    pose = retarget(identity_frame(manifest), manifest)
    rest = manifest.rest_pose()
    assert pose == rest  # bit-for-bit


def test_rotated_root_matches_fk_oracle(manifest):
    rot90 = quat.from_axis_angle((0.0, 1.0, 0.0), math.pi / 2)
    frame = identity_frame(manifest)
    sensors = dict(frame.sensors)
    sensors[SensorId.HIPS] = JointTransform(
        position=manifest.rest_position(0), rotation=rot90
    )
    pose = retarget(SensorFrame(sensors=sensors), manifest)

    # every joint's world position is the rest position rotated about the root
    root = np.array(manifest.rest_position(0))
    R = _quat_mat(rot90)
    worst = 0.0
    for j in range(59):
        rest = np.array(manifest.rest_position(j))
        expect = root + R @ (rest - root)
        got = np.array(pose.joints[j].position)
        worst = max(worst, float(np.max(np.abs(expect - got))))
    assert worst < 1e-5

    # and the oracle FK agrees with the emitted positions
    emitted = np.array([j.position for j in pose.joints])
    assert np.max(np.abs(oracle_fk(manifest, pose) - emitted)) < 1e-5


def test_missing_sensor_rejected(manifest):
    frame = identity_frame(manifest)
    sensors = dict(frame.sensors)
    del sensors[SensorId.LEFT_FOOT]
    with pytest.raises(MissingSensor):
        retarget(SensorFrame(sensors=sensors), manifest)


def test_mapped_joints_carry_sensor_rotations(manifest):
    rng = random.Random(5)
    frame = identity_frame(manifest)
    sensors = dict(frame.sensors)
    q_arm = _rand_unit_quat(rng)
    sensors[SensorId.LEFT_UPPER_ARM] = JointTransform((0.0, 0.0, 0.0), q_arm)
    pose = retarget(SensorFrame(sensors=sensors), manifest)
    j = manifest.sensor_joint[SensorId.LEFT_UPPER_ARM]
    assert max(abs(a - b) for a, b in zip(pose.joints[j].rotation, q_arm)) < 1e-12


def test_trunk_distribution_equal_fractions(manifest):
    """The head keeps its full sensor rotation; each untracked joint between
    the spine sensor and the head receives the same slerp fraction of it."""
    q_head = quat.from_axis_angle((1.0, 0.0, 0.0), 0.8)
    frame = identity_frame(manifest)
    sensors = dict(frame.sensors)
    sensors[SensorId.HEAD] = JointTransform((0.0, 0.0, 0.0), q_head)
    pose = retarget(SensorFrame(sensors=sensors), manifest)

    spine_j = manifest.sensor_joint[SensorId.SPINE]
    head_j = manifest.sensor_joint[SensorId.HEAD]
    chain = []  # joints strictly between spine sensor and head, bottom-up
    j = manifest.parents[head_j]
    while j != spine_j:
        chain.append(j)
        j = manifest.parents[j]
    assert len(chain) == 3  # spine_03, spine_04, neck in the shipped manifest

    assert max(abs(a - b) for a, b in zip(pose.joints[head_j].rotation, q_head)) < 1e-12
    fraction = quat.slerp(IDENTITY_ROTATION, q_head, 1.0 / (len(chain) + 1))
    for j in chain:
        assert max(abs(a - b) for a, b in zip(pose.joints[j].rotation, fraction)) < 1e-12
    # untracked joints outside the trunk stay at rest
    assert pose.joints[manifest.index_of["left_toe"]].rotation == IDENTITY_ROTATION


def test_finger_curl_blend(manifest):
    frame = identity_frame(manifest)
    rest = retarget(frame, manifest, fingers=0.0)
    curled = retarget(frame, manifest, fingers=1.0)
    half = retarget(frame, manifest, fingers=0.5)

    idx = manifest.index_of["left_index_02"]
    assert rest.joints[idx].rotation == IDENTITY_ROTATION
    full_q = curled.joints[idx].rotation
    assert quat.angle_between(IDENTITY_ROTATION, full_q) == pytest.approx(
        math.radians(60.0), abs=1e-9
    )
    half_q = half.joints[idx].rotation
    assert quat.angle_between(IDENTITY_ROTATION, half_q) == pytest.approx(
        math.radians(30.0), abs=1e-9
    )
    # non-finger joints untouched
    assert curled.joints[manifest.index_of["left_hand"]].rotation == IDENTITY_ROTATION

    with pytest.raises(ValueError):
        retarget(frame, manifest, fingers=1.5)


def test_fk_consistency_random_frames(manifest):
    """Emitted positions always equal FK of emitted rotations (1e-5 m)."""
    rng = random.Random(2024)
    frame = identity_frame(manifest)
    for trial in range(25):
        sensors = {}
        for sid, joint in manifest.sensor_joint.items():
            pos = (
                (rng.uniform(-2, 2), rng.uniform(0, 2), rng.uniform(-2, 2))
                if sid is SensorId.HIPS
                else frame.sensors[sid].position
            )
            sensors[sid] = JointTransform(pos, _rand_unit_quat(rng, scale=1.2))
        pose = retarget(SensorFrame(sensors=sensors), manifest, fingers=rng.random())
        emitted = np.array([j.position for j in pose.joints])
        assert np.max(np.abs(oracle_fk(manifest, pose) - emitted)) < 1e-5
        for j in pose.joints:
            assert abs(sum(v * v for v in j.rotation) - 1.0) < 1e-6
