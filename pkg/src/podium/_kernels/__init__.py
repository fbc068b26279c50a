"""Kernel backend selection.

Imports the compiled extension when present, otherwise the pure-Python
fallback.  Set PODIUM_PURE_PYTHON=1 to force the fallback (used by the
benchmark and by CI to exercise both paths).
"""

import os

if os.environ.get("PODIUM_PURE_PYTHON") == "1":
    from podium._kernels import _pykernels as _impl

    BACKEND = "pure-python"
else:
    try:
        from podium._kernels import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from podium._kernels import _pykernels as _impl  # type: ignore[no-redef]

        BACKEND = "pure-python"

quat_normalize = _impl.quat_normalize
quat_multiply = _impl.quat_multiply
quat_conjugate = _impl.quat_conjugate
quat_rotate = _impl.quat_rotate
quat_from_axis_angle = _impl.quat_from_axis_angle
quat_slerp = _impl.quat_slerp
fk_pass = _impl.fk_pass
pack_joints = _impl.pack_joints
unpack_joints = _impl.unpack_joints
interp_joints = _impl.interp_joints

__all__ = [
    "BACKEND",
    "quat_normalize",
    "quat_multiply",
    "quat_conjugate",
    "quat_rotate",
    "quat_from_axis_angle",
    "quat_slerp",
    "fk_pass",
    "pack_joints",
    "unpack_joints",
    "interp_joints",
]
