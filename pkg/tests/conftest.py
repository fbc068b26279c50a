import math
import struct

import pytest

from podium._kernels import _pykernels
from podium.kinematics.skeleton import default_manifest

try:
    from podium._kernels import _ckernels

    _BACKENDS = [("pure-python", _pykernels), ("compiled", _ckernels)]
except ImportError:
    _ckernels = None
    _BACKENDS = [("pure-python", _pykernels)]


@pytest.fixture(params=_BACKENDS, ids=[name for name, _ in _BACKENDS])
def kernels(request):
    """Run kernel-level tests against every available backend."""
    return request.param[1]


@pytest.fixture(scope="session")
def manifest():
    return default_manifest()


def f32(x: float) -> float:
    """Quantize to float32, the wire precision."""
    return struct.unpack("<f", struct.pack("<f", x))[0]


def f32v(values):
    return tuple(f32(v) for v in values)


def unit_quat_f32(x, y, z, w):
    """A float32-quantized unit quaternion (wire-representable)."""
    n = math.sqrt(x * x + y * y + z * z + w * w)
    return f32v((x / n, y / n, z / n, w / n))
