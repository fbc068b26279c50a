"""Pure-Python kernels: quaternion math, forward kinematics, joint-block codec.

This module is the fallback implementation behind :mod:`podium._kernels`; the
compiled extension `_ckernels` mirrors it function for function.  Quaternions
are ``(x, y, z, w)`` tuples matching the wire order, vectors are ``(x, y, z)``.
Joint blocks are flat float sequences, seven floats per joint
(px, py, pz, qx, qy, qz, qw).

Everything here is pure and allocation-light; keep the two implementations
byte-for-byte equivalent in float semantics (same operation order).
"""

from __future__ import annotations

import math
import struct

_INF = float("inf")


def quat_normalize(q):
    """Return q scaled to unit norm. Raises ValueError on a near-zero input."""
    x, y, z, w = q
    n = math.sqrt(x * x + y * y + z * z + w * w)
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero quaternion")
    inv = 1.0 / n
    return (x * inv, y * inv, z * inv, w * inv)


def quat_multiply(a, b):
    """Hamilton product a*b in (x, y, z, w) order."""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


def quat_conjugate(q):
    x, y, z, w = q
    return (-x, -y, -z, w)


def quat_rotate(q, v):
    """Rotate vector v by unit quaternion q."""
    qx, qy, qz, qw = q
    vx, vy, vz = v
    # t = 2 * (qv x v); v' = v + w*t + qv x t
    tx = 2.0 * (qy * vz - qz * vy)
    ty = 2.0 * (qz * vx - qx * vz)
    tz = 2.0 * (qx * vy - qy * vx)
    return (
        vx + qw * tx + (qy * tz - qz * ty),
        vy + qw * ty + (qz * tx - qx * tz),
        vz + qw * tz + (qx * ty - qy * tx),
    )


def quat_from_axis_angle(axis, angle):
    """Unit quaternion rotating by `angle` radians about `axis` (normalized here)."""
    ax, ay, az = axis
    n = math.sqrt(ax * ax + ay * ay + az * az)
    if n < 1e-12:
        raise ValueError("zero-length rotation axis")
    half = 0.5 * angle
    s = math.sin(half) / n
    return (ax * s, ay * s, az * s, math.cos(half))


def quat_slerp(a, b, t):
    """Spherical interpolation along the shorter arc; unit-norm output.

    slerp(a, b, 0) == a and slerp(a, b, 1) == b up to sign.
    """
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    d = ax * bx + ay * by + az * bz + aw * bw
    if d < 0.0:
        bx, by, bz, bw = -bx, -by, -bz, -bw
        d = -d
    if d > 0.9995:
        # nearly parallel: linear blend, then renormalize
        x = ax + (bx - ax) * t
        y = ay + (by - ay) * t
        z = az + (bz - az) * t
        w = aw + (bw - aw) * t
    else:
        theta0 = math.acos(min(d, 1.0))
        sin0 = math.sin(theta0)
        s0 = math.sin((1.0 - t) * theta0) / sin0
        s1 = math.sin(t * theta0) / sin0
        x = ax * s0 + bx * s1
        y = ay * s0 + by * s1
        z = az * s0 + bz * s1
        w = aw * s0 + bw * s1
    n = math.sqrt(x * x + y * y + z * z + w * w)
    inv = 1.0 / n
    return (x * inv, y * inv, z * inv, w * inv)


def fk_pass(parents, offsets, local_rots, root_pos):
    """Accumulate local rotations down a topologically sorted joint hierarchy.

    parents: sequence of parent indices, -1 for the single root (index 0).
    offsets: flat 3N rest offsets (child position in parent frame at rest).
    local_rots: flat 4N local rotations (x, y, z, w).
    root_pos: world position assigned to the root joint.

    Returns (positions, world_rots) as flat lists (3N and 4N).
    """
    n = len(parents)
    pos = [0.0] * (3 * n)
    world = [0.0] * (4 * n)
    for j in range(n):
        p = parents[j]
        qj = 4 * j
        vj = 3 * j
        lx = local_rots[qj]
        ly = local_rots[qj + 1]
        lz = local_rots[qj + 2]
        lw = local_rots[qj + 3]
        if p < 0:
            pos[vj], pos[vj + 1], pos[vj + 2] = root_pos
            world[qj], world[qj + 1], world[qj + 2], world[qj + 3] = lx, ly, lz, lw
            continue
        qp = 4 * p
        px, py, pz, pw = world[qp], world[qp + 1], world[qp + 2], world[qp + 3]
        ox, oy, oz = offsets[vj], offsets[vj + 1], offsets[vj + 2]
        # rotate offset by parent world rotation
        tx = 2.0 * (py * oz - pz * oy)
        ty = 2.0 * (pz * ox - px * oz)
        tz = 2.0 * (px * oy - py * ox)
        vp = 3 * p
        pos[vj] = pos[vp] + ox + pw * tx + (py * tz - pz * ty)
        pos[vj + 1] = pos[vp + 1] + oy + pw * ty + (pz * tx - px * tz)
        pos[vj + 2] = pos[vp + 2] + oz + pw * tz + (px * ty - py * tx)
        # world = parent_world * local
        world[qj] = pw * lx + px * lw + py * lz - pz * ly
        world[qj + 1] = pw * ly - px * lz + py * lw + pz * lx
        world[qj + 2] = pw * lz + px * ly - py * lx + pz * lw
        world[qj + 3] = pw * lw - px * lx - py * ly - pz * lz
    return pos, world


def pack_joints(values):
    """Pack 7N floats into N little-endian 28-byte joint blocks (float32)."""
    return struct.pack("<%df" % len(values), *values)


def unpack_joints(data, offset, count, norm_tol):
    """Unpack `count` joint blocks, validating finiteness and rotation norm.

    Raises ValueError if any position component is non-finite or any rotation
    norm falls outside 1 +/- norm_tol.  Values are returned as read (float32
    widened to float), without renormalization.
    """
    vals = struct.unpack_from("<%df" % (7 * count), data, offset)
    lo = (1.0 - norm_tol) * (1.0 - norm_tol)
    hi = (1.0 + norm_tol) * (1.0 + norm_tol)
    for j in range(count):
        i = 7 * j
        px, py, pz = vals[i], vals[i + 1], vals[i + 2]
        if not (-_INF < px < _INF and -_INF < py < _INF and -_INF < pz < _INF):
            raise ValueError("non-finite joint position at joint %d" % j)
        qx, qy, qz, qw = vals[i + 3], vals[i + 4], vals[i + 5], vals[i + 6]
        n2 = qx * qx + qy * qy + qz * qz + qw * qw
        if not (lo <= n2 <= hi):
            raise ValueError("joint %d rotation norm out of tolerance" % j)
    return list(vals)


def interp_joints(a, b, t):
    """Interpolate two equal-length joint blocks: lerp positions, slerp rotations."""
    n = len(a) // 7
    out = [0.0] * (7 * n)
    for j in range(n):
        i = 7 * j
        out[i] = a[i] + (b[i] - a[i]) * t
        out[i + 1] = a[i + 1] + (b[i + 1] - a[i + 1]) * t
        out[i + 2] = a[i + 2] + (b[i + 2] - a[i + 2]) * t
        qx, qy, qz, qw = quat_slerp(
            (a[i + 3], a[i + 4], a[i + 5], a[i + 6]),
            (b[i + 3], b[i + 4], b[i + 5], b[i + 6]),
            t,
        )
        out[i + 3] = qx
        out[i + 4] = qy
        out[i + 5] = qz
        out[i + 6] = qw
    return out
