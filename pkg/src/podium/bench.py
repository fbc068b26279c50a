"""podium-bench: compare the compiled kernels against the pure-Python fallback.

Times the hot inner loops (joint-block pack/unpack, slerp, forward kinematics,
pose interpolation) on both backends in one process, plus the end-to-end
pose encode/decode path on whichever backend the package selected.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
import time

from podium import _kernels
from podium._kernels import _pykernels
from podium.kinematics.skeleton import default_manifest
from podium.protocol import codec
from podium.protocol.types import JointTransform, PoseFull

try:
    from podium._kernels import _ckernels
except ImportError:
    _ckernels = None


def _rand_unit_quat(rng):
    while True:
        q = tuple(rng.gauss(0, 1) for _ in range(4))
        n = math.sqrt(sum(v * v for v in q))
        if n > 1e-6:
            return tuple(v / n for v in q)


def _time(fn, *, repeats: int, number: int) -> float:
    """Best-of-repeats seconds per call."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def run(repeats: int = 5, number: int = 200) -> list[tuple[str, float, float | None]]:
    rng = random.Random(1)
    manifest = default_manifest()

    flat = []
    for _ in range(59):
        flat.extend(rng.uniform(-2, 2) for _ in range(3))
        flat.extend(_rand_unit_quat(rng))
    flat_b = list(flat)
    rng.shuffle(flat_b)
    packed = _pykernels.pack_joints(flat)
    locals_flat = []
    for _ in range(59):
        locals_flat.extend(_rand_unit_quat(rng))
    parents = manifest.parents
    offsets = manifest._offsets_flat
    q0, q1 = _rand_unit_quat(rng), _rand_unit_quat(rng)

    def kernel_cases(k):
        return [
            ("pack_joints[59]", lambda: k.pack_joints(flat)),
            ("unpack_joints[59]", lambda: k.unpack_joints(packed, 0, 59, 1e-3)),
            ("fk_pass[59]", lambda: k.fk_pass(parents, offsets, locals_flat, (0.0, 0.95, 0.0))),
            ("interp_joints[59]", lambda: k.interp_joints(flat, flat_b, 0.37)),
            ("quat_slerp x59", lambda: [k.quat_slerp(q0, q1, 0.4) for _ in range(59)]),
        ]

    rows = []
    pure_cases = kernel_cases(_pykernels)
    fast_cases = kernel_cases(_ckernels) if _ckernels is not None else None
    for i, (name, fn) in enumerate(pure_cases):
        pure_t = _time(fn, repeats=repeats, number=number)
        fast_t = (
            _time(fast_cases[i][1], repeats=repeats, number=number)
            if fast_cases is not None
            else None
        )
        rows.append((name, pure_t, fast_t))

    # end-to-end, current backend
    pose = PoseFull(
        joints=tuple(
            JointTransform(tuple(flat[7 * j : 7 * j + 3]), tuple(flat[7 * j + 3 : 7 * j + 7]))
            for j in range(59)
        )
    )
    header = dict(room_id=1, sender_id=1, seq=1, timestamp_ms=1)
    frame = codec.encode(pose, **header)
    rows.append(
        (
            f"codec encode PoseFull ({_kernels.BACKEND})",
            _time(lambda: codec.encode(pose, **header), repeats=repeats, number=number),
            None,
        )
    )
    rows.append(
        (
            f"codec decode PoseFull ({_kernels.BACKEND})",
            _time(lambda: codec.decode(frame), repeats=repeats, number=number),
            None,
        )
    )
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="podium-bench", description=__doc__)
    parser.add_argument("--number", type=int, default=200, help="calls per timing sample")
    parser.add_argument("--repeats", type=int, default=5, help="timing samples (best-of)")
    args = parser.parse_args(argv)

    if _ckernels is None:
        print("compiled kernels unavailable; timing pure-Python only", file=sys.stderr)

    rows = run(repeats=args.repeats, number=args.number)
    width = max(len(r[0]) for r in rows) + 2
    print(f"{'case':<{width}}{'pure us':>12}{'compiled us':>14}{'speedup':>9}")
    for name, pure_t, fast_t in rows:
        pure_us = pure_t * 1e6
        if fast_t is None:
            print(f"{name:<{width}}{pure_us:>12.2f}{'-':>14}{'-':>9}")
        else:
            print(
                f"{name:<{width}}{pure_us:>12.2f}{fast_t * 1e6:>14.2f}"
                f"{pure_t / fast_t:>8.1f}x"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
