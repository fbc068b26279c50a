# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels mirroring podium._kernels._pykernels.

Same functions, same float semantics (IEEE doubles, identical operation
order), same tuple/list/bytes interfaces.  Keep in lockstep with the pure
implementation; the test suite runs both backends against each other.
"""

from libc.math cimport sqrt, sin, cos, acos, isfinite
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy
from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AS_STRING


def quat_normalize(q):
    """Return q scaled to unit norm. Raises ValueError on a near-zero input."""
    cdef double x = q[0], y = q[1], z = q[2], w = q[3]
    cdef double n = sqrt(x * x + y * y + z * z + w * w)
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero quaternion")
    cdef double inv = 1.0 / n
    return (x * inv, y * inv, z * inv, w * inv)


def quat_multiply(a, b):
    """Hamilton product a*b in (x, y, z, w) order."""
    cdef double ax = a[0], ay = a[1], az = a[2], aw = a[3]
    cdef double bx = b[0], by = b[1], bz = b[2], bw = b[3]
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


def quat_conjugate(q):
    return (-q[0], -q[1], -q[2], q[3])


def quat_rotate(q, v):
    """Rotate vector v by unit quaternion q."""
    cdef double qx = q[0], qy = q[1], qz = q[2], qw = q[3]
    cdef double vx = v[0], vy = v[1], vz = v[2]
    cdef double tx = 2.0 * (qy * vz - qz * vy)
    cdef double ty = 2.0 * (qz * vx - qx * vz)
    cdef double tz = 2.0 * (qx * vy - qy * vx)
    return (
        vx + qw * tx + (qy * tz - qz * ty),
        vy + qw * ty + (qz * tx - qx * tz),
        vz + qw * tz + (qx * ty - qy * tx),
    )


def quat_from_axis_angle(axis, angle):
    """Unit quaternion rotating by `angle` radians about `axis` (normalized here)."""
    cdef double ax = axis[0], ay = axis[1], az = axis[2]
    cdef double n = sqrt(ax * ax + ay * ay + az * az)
    if n < 1e-12:
        raise ValueError("zero-length rotation axis")
    cdef double half = 0.5 * angle
    cdef double s = sin(half) / n
    return (ax * s, ay * s, az * s, cos(half))


cdef inline void _slerp(double ax, double ay, double az, double aw,
                        double bx, double by, double bz, double bw,
                        double t, double* out) noexcept:
    cdef double d = ax * bx + ay * by + az * bz + aw * bw
    cdef double theta0, sin0, s0, s1, x, y, z, w, n, inv
    if d < 0.0:
        bx = -bx; by = -by; bz = -bz; bw = -bw
        d = -d
    if d > 0.9995:
        x = ax + (bx - ax) * t
        y = ay + (by - ay) * t
        z = az + (bz - az) * t
        w = aw + (bw - aw) * t
    else:
        theta0 = acos(d if d < 1.0 else 1.0)
        sin0 = sin(theta0)
        s0 = sin((1.0 - t) * theta0) / sin0
        s1 = sin(t * theta0) / sin0
        x = ax * s0 + bx * s1
        y = ay * s0 + by * s1
        z = az * s0 + bz * s1
        w = aw * s0 + bw * s1
    n = sqrt(x * x + y * y + z * z + w * w)
    inv = 1.0 / n
    out[0] = x * inv; out[1] = y * inv; out[2] = z * inv; out[3] = w * inv


def quat_slerp(a, b, t):
    """Spherical interpolation along the shorter arc; unit-norm output."""
    cdef double out[4]
    _slerp(a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3], t, out)
    return (out[0], out[1], out[2], out[3])


def fk_pass(parents, offsets, local_rots, root_pos):
    """Accumulate local rotations down a topologically sorted joint hierarchy."""
    cdef Py_ssize_t n = len(parents)
    cdef double* wp = <double*> malloc(3 * n * sizeof(double))
    cdef double* wq = <double*> malloc(4 * n * sizeof(double))
    if wp == NULL or wq == NULL:
        free(wp); free(wq)
        raise MemoryError()
    cdef list pos = [0.0] * (3 * n)
    cdef list world = [0.0] * (4 * n)
    cdef Py_ssize_t j, p, qj, vj, qp, vp
    cdef double lx, ly, lz, lw, px, py, pz, pw, ox, oy, oz, tx, ty, tz
    try:
        for j in range(n):
            p = parents[j]
            qj = 4 * j
            vj = 3 * j
            lx = local_rots[qj]
            ly = local_rots[qj + 1]
            lz = local_rots[qj + 2]
            lw = local_rots[qj + 3]
            if p < 0:
                wp[vj] = root_pos[0]; wp[vj + 1] = root_pos[1]; wp[vj + 2] = root_pos[2]
                wq[qj] = lx; wq[qj + 1] = ly; wq[qj + 2] = lz; wq[qj + 3] = lw
            else:
                qp = 4 * p
                vp = 3 * p
                px = wq[qp]; py = wq[qp + 1]; pz = wq[qp + 2]; pw = wq[qp + 3]
                ox = offsets[vj]; oy = offsets[vj + 1]; oz = offsets[vj + 2]
                tx = 2.0 * (py * oz - pz * oy)
                ty = 2.0 * (pz * ox - px * oz)
                tz = 2.0 * (px * oy - py * ox)
                wp[vj] = wp[vp] + ox + pw * tx + (py * tz - pz * ty)
                wp[vj + 1] = wp[vp + 1] + oy + pw * ty + (pz * tx - px * tz)
                wp[vj + 2] = wp[vp + 2] + oz + pw * tz + (px * ty - py * tx)
                wq[qj] = pw * lx + px * lw + py * lz - pz * ly
                wq[qj + 1] = pw * ly - px * lz + py * lw + pz * lx
                wq[qj + 2] = pw * lz + px * ly - py * lx + pz * lw
                wq[qj + 3] = pw * lw - px * lx - py * ly - pz * lz
            pos[vj] = wp[vj]; pos[vj + 1] = wp[vj + 1]; pos[vj + 2] = wp[vj + 2]
            world[qj] = wq[qj]; world[qj + 1] = wq[qj + 1]
            world[qj + 2] = wq[qj + 2]; world[qj + 3] = wq[qj + 3]
    finally:
        free(wp)
        free(wq)
    return pos, world


def pack_joints(values):
    """Pack 7N floats into N little-endian 28-byte joint blocks (float32)."""
    cdef Py_ssize_t n = len(values)
    cdef bytes out = PyBytes_FromStringAndSize(NULL, n * 4)
    cdef char* buf = PyBytes_AS_STRING(out)
    cdef float f
    cdef Py_ssize_t i
    for i in range(n):
        f = <float> (<double> values[i])
        memcpy(buf + 4 * i, &f, 4)
    return out


def unpack_joints(data, Py_ssize_t offset, Py_ssize_t count, double norm_tol):
    """Unpack `count` joint blocks, validating finiteness and rotation norm."""
    cdef const unsigned char[:] view = data
    if offset + 28 * count > view.shape[0]:
        raise ValueError("joint block out of range")
    cdef list out = [0.0] * (7 * count)
    cdef double lo = (1.0 - norm_tol) * (1.0 - norm_tol)
    cdef double hi = (1.0 + norm_tol) * (1.0 + norm_tol)
    cdef Py_ssize_t j, i, k
    cdef float f
    cdef double v[7]
    cdef double n2
    for j in range(count):
        for k in range(7):
            memcpy(&f, &view[offset + 28 * j + 4 * k], 4)
            v[k] = <double> f
        if not (isfinite(v[0]) and isfinite(v[1]) and isfinite(v[2])):
            raise ValueError("non-finite joint position at joint %d" % j)
        n2 = v[3] * v[3] + v[4] * v[4] + v[5] * v[5] + v[6] * v[6]
        if not (lo <= n2 <= hi):
            raise ValueError("joint %d rotation norm out of tolerance" % j)
        i = 7 * j
        out[i] = v[0]; out[i + 1] = v[1]; out[i + 2] = v[2]
        out[i + 3] = v[3]; out[i + 4] = v[4]; out[i + 5] = v[5]; out[i + 6] = v[6]
    return out


def interp_joints(a, b, t):
    """Interpolate two equal-length joint blocks: lerp positions, slerp rotations."""
    cdef Py_ssize_t n = len(a) // 7
    cdef list out = [0.0] * (7 * n)
    cdef Py_ssize_t j, i
    cdef double ax, ay, az, aw, bx, by, bz, bw
    cdef double tt = t
    cdef double q[4]
    for j in range(n):
        i = 7 * j
        out[i] = a[i] + (b[i] - a[i]) * tt
        out[i + 1] = a[i + 1] + (b[i + 1] - a[i + 1]) * tt
        out[i + 2] = a[i + 2] + (b[i + 2] - a[i + 2]) * tt
        _slerp(a[i + 3], a[i + 4], a[i + 5], a[i + 6],
               b[i + 3], b[i + 4], b[i + 5], b[i + 6], tt, q)
        out[i + 3] = q[0]; out[i + 4] = q[1]; out[i + 5] = q[2]; out[i + 6] = q[3]
    return out
