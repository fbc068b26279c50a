"""Kernel math against independent oracles, on every available backend."""

import math
import random
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import _BACKENDS


def _rand_unit_quat(rng):
    while True:
        q = tuple(rng.gauss(0, 1) for _ in range(4))
        n = math.sqrt(sum(v * v for v in q))
        if n > 1e-6:
            return tuple(v / n for v in q)


# -- quaternion basics -------------------------------------------------------


def test_normalize_examples(kernels):
    assert kernels.quat_normalize((0.0, 0.0, 0.0, 2.0)) == (0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        kernels.quat_normalize((0.0, 0.0, 0.0, 1e-15))


def test_slerp_examples(kernels):
    # slerp(q, q, 0.5) == q
    q = kernels.quat_normalize((0.3, -0.2, 0.5, 0.9))
    out = kernels.quat_slerp(q, q, 0.5)
    assert max(abs(a - b) for a, b in zip(out, q)) < 1e-12

    # slerp(identity, 90 deg about z, 0.5) == 45 deg about z (axis-angle arithmetic)
    identity = (0.0, 0.0, 0.0, 1.0)
    q90 = (0.0, 0.0, math.sin(math.pi / 4), math.cos(math.pi / 4))
    q45 = (0.0, 0.0, math.sin(math.pi / 8), math.cos(math.pi / 8))
    out = kernels.quat_slerp(identity, q90, 0.5)
    assert max(abs(a - b) for a, b in zip(out, q45)) < 1e-12


def test_slerp_endpoints_and_shorter_arc(kernels):
    rng = random.Random(11)
    for _ in range(200):
        a = _rand_unit_quat(rng)
        b = _rand_unit_quat(rng)
        s0 = kernels.quat_slerp(a, b, 0.0)
        s1 = kernels.quat_slerp(a, b, 1.0)
        # endpoints reproduced up to sign
        assert min(
            max(abs(x - y) for x, y in zip(s0, a)),
            max(abs(x + y) for x, y in zip(s0, a)),
        ) < 1e-9
        assert min(
            max(abs(x - y) for x, y in zip(s1, b)),
            max(abs(x + y) for x, y in zip(s1, b)),
        ) < 1e-9
        # midpoint angle to either end never exceeds pi/2 (shorter arc)
        mid = kernels.quat_slerp(a, b, 0.5)
        dot_a = abs(sum(x * y for x, y in zip(mid, a)))
        assert dot_a >= math.cos(math.pi / 2) - 1e-9
        # unit output
        assert abs(sum(v * v for v in mid) - 1.0) < 1e-12


def test_multiply_rotate_against_numpy(kernels):
    """Oracle: rotation matrices. q1*q2 must act on vectors like R1 @ R2."""

    def mat(q):
        x, y, z, w = q
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
                [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
                [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
            ]
        )

    rng = random.Random(7)
    for _ in range(100):
        q1 = _rand_unit_quat(rng)
        q2 = _rand_unit_quat(rng)
        v = np.array([rng.uniform(-2, 2) for _ in range(3)])
        got = np.array(kernels.quat_rotate(kernels.quat_multiply(q1, q2), tuple(v)))
        want = mat(q1) @ (mat(q2) @ v)
        assert np.allclose(got, want, atol=1e-10)


def test_from_axis_angle(kernels):
    q = kernels.quat_from_axis_angle((0.0, 0.0, 3.0), math.pi / 2)  # axis normalized inside
    v = kernels.quat_rotate(q, (1.0, 0.0, 0.0))
    assert max(abs(a - b) for a, b in zip(v, (0.0, 1.0, 0.0))) < 1e-12


# -- FK ----------------------------------------------------------------------


def _numpy_fk(parents, offsets, local_rots, root_pos):
    """Independent FK oracle using scipy-free matrix accumulation."""

    def mat(q):
        x, y, z, w = q
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
                [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
                [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
            ]
        )

    n = len(parents)
    pos = np.zeros((n, 3))
    rot = [None] * n
    for j in range(n):
        q = tuple(local_rots[4 * j : 4 * j + 4])
        if parents[j] < 0:
            pos[j] = root_pos
            rot[j] = mat(q)
        else:
            p = parents[j]
            off = np.array(offsets[3 * j : 3 * j + 3])
            pos[j] = pos[p] + rot[p] @ off
            rot[j] = rot[p] @ mat(q)
    return pos


def test_fk_against_matrix_oracle(kernels):
    rng = random.Random(42)
    parents = [-1, 0, 1, 1, 3, 0]
    offsets = [rng.uniform(-0.5, 0.5) for _ in range(18)]
    locals_flat = []
    for _ in range(6):
        locals_flat.extend(_rand_unit_quat(rng))
    root = (0.3, 1.0, -0.2)
    got_pos, got_world = kernels.fk_pass(parents, offsets, locals_flat, root)
    want = _numpy_fk(parents, offsets, locals_flat, root)
    assert np.allclose(np.array(got_pos).reshape(-1, 3), want, atol=1e-10)
    for j in range(6):
        norm = sum(v * v for v in got_world[4 * j : 4 * j + 4])
        assert abs(norm - 1.0) < 1e-12


# -- joint block codec ---------------------------------------------------------


def test_pack_unpack_roundtrip(kernels):
    rng = random.Random(3)
    vals = []
    for _ in range(9):
        vals.extend(rng.uniform(-5, 5) for _ in range(3))
        vals.extend(_rand_unit_quat(rng))
    packed = kernels.pack_joints(vals)
    assert len(packed) == 9 * 28
    out = kernels.unpack_joints(packed, 0, 9, 1e-3)
    # values round-trip exactly at float32 precision
    want = struct.unpack("<63f", struct.pack("<63f", *vals))
    assert tuple(out) == want


def test_unpack_rejects_bad_rotation(kernels):
    vals = [0.0] * 7  # zero quaternion
    packed = kernels.pack_joints(vals)
    with pytest.raises(ValueError):
        kernels.unpack_joints(packed, 0, 1, 1e-3)


def test_unpack_rejects_nonfinite_position(kernels):
    packed = struct.pack("<7f", math.nan, 0, 0, 0, 0, 0, 1)
    with pytest.raises(ValueError):
        kernels.unpack_joints(packed, 0, 1, 1e-3)


def test_interp_joints_midpoint(kernels):
    a = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]
    b = [1.0, 2.0, 3.0, 0.0, 0.0, math.sin(math.pi / 4), math.cos(math.pi / 4)]
    mid = kernels.interp_joints(a, b, 0.5)
    assert mid[:3] == [0.5, 1.0, 1.5]
    want_q = (0.0, 0.0, math.sin(math.pi / 8), math.cos(math.pi / 8))
    assert max(abs(x - y) for x, y in zip(mid[3:], want_q)) < 1e-12


# -- backend equivalence -------------------------------------------------------


@pytest.mark.skipif(len(_BACKENDS) < 2, reason="compiled backend not built")
def test_backends_bit_identical():
    """Pure and compiled kernels must produce identical doubles."""
    py = dict(_BACKENDS)["pure-python"]
    cy = dict(_BACKENDS)["compiled"]
    rng = random.Random(99)
    for _ in range(200):
        a = _rand_unit_quat(rng)
        b = _rand_unit_quat(rng)
        t = rng.random()
        assert py.quat_slerp(a, b, t) == cy.quat_slerp(a, b, t)
        assert py.quat_multiply(a, b) == cy.quat_multiply(a, b)
        v = tuple(rng.uniform(-2, 2) for _ in range(3))
        assert py.quat_rotate(a, v) == cy.quat_rotate(a, v)

    parents = [-1, 0, 1, 2, 0, 4]
    offsets = [rng.uniform(-1, 1) for _ in range(18)]
    locals_flat = []
    for _ in range(6):
        locals_flat.extend(_rand_unit_quat(rng))
    assert py.fk_pass(parents, offsets, locals_flat, (0, 1, 0)) == cy.fk_pass(
        parents, offsets, locals_flat, (0, 1, 0)
    )

    vals = []
    for _ in range(5):
        vals.extend(rng.uniform(-3, 3) for _ in range(3))
        vals.extend(_rand_unit_quat(rng))
    assert py.pack_joints(vals) == cy.pack_joints(vals)
    packed = py.pack_joints(vals)
    assert py.unpack_joints(packed, 0, 5, 1e-3) == cy.unpack_joints(packed, 0, 5, 1e-3)
    assert py.interp_joints(vals, vals, 0.3) == cy.interp_joints(vals, vals, 0.3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4), st.floats(0, 1))
def test_slerp_unit_output_property(q_raw, t):
    """Any valid slerp output is unit-norm (hypothesis over both endpoints)."""
    from podium._kernels import quat_normalize, quat_slerp

    n = math.sqrt(sum(v * v for v in q_raw))
    if n < 1e-3:
        return
    a = quat_normalize(tuple(q_raw))
    b = quat_normalize((q_raw[1], -q_raw[0], q_raw[3], q_raw[2]))
    out = quat_slerp(a, b, t)
    assert abs(sum(v * v for v in out) - 1.0) < 1e-9
