"""Quaternion utilities over (x, y, z, w) tuples.

Thin public face over the selected kernel backend; adds the couple of
constructions the kernels don't need to know about.
"""

from __future__ import annotations

import math

from podium import _kernels
from podium.kinematics.errors import ZeroNorm

IDENTITY = (0.0, 0.0, 0.0, 1.0)

multiply = _kernels.quat_multiply
conjugate = _kernels.quat_conjugate
rotate_vector = _kernels.quat_rotate
slerp = _kernels.quat_slerp
from_axis_angle = _kernels.quat_from_axis_angle


def normalize(q):
    try:
        return _kernels.quat_normalize(q)
    except ValueError as exc:
        raise ZeroNorm(str(exc)) from None


def norm(q) -> float:
    x, y, z, w = q
    return math.sqrt(x * x + y * y + z * z + w * w)


def dot(a, b) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]


def from_two_vectors(v_from, v_to):
    """Smallest rotation carrying direction v_from onto v_to.

    Inputs need not be normalized.  Antiparallel inputs rotate 180 degrees
    about a deterministic perpendicular axis.
    """
    fx, fy, fz = v_from
    tx, ty, tz = v_to
    fn = math.sqrt(fx * fx + fy * fy + fz * fz)
    tn = math.sqrt(tx * tx + ty * ty + tz * tz)
    if fn < 1e-12 or tn < 1e-12:
        raise ZeroNorm("cannot build rotation from zero-length direction")
    fx, fy, fz = fx / fn, fy / fn, fz / fn
    tx, ty, tz = tx / tn, ty / tn, tz / tn
    d = fx * tx + fy * ty + fz * tz
    if d > 1.0 - 1e-12:
        return IDENTITY
    if d < -1.0 + 1e-12:
        # 180 degrees: any axis perpendicular to v_from works; pick stably
        ax, ay, az = (0.0, -fz, fy) if abs(fx) < 0.9 else (-fy, fx, 0.0)
        n = math.sqrt(ax * ax + ay * ay + az * az)
        return (ax / n, ay / n, az / n, 0.0)
    cx = fy * tz - fz * ty
    cy = fz * tx - fx * tz
    cz = fx * ty - fy * tx
    s = math.sqrt((1.0 + d) * 2.0)
    inv = 1.0 / s
    return (cx * inv, cy * inv, cz * inv, 0.5 * s)


def angle_between(a, b) -> float:
    """Absolute rotation angle carrying unit quaternion a to b, in [0, pi]."""
    d = min(1.0, abs(dot(a, b)))
    return 2.0 * math.acos(d)
