"""podium: hybrid-presence session engine.

Binary pose/slide/audio-control wire protocol, authoritative relay rooms,
IMU-to-skeleton retargeting and analytic IK, a snapshot-interpolating client
core, and a deterministic bot harness for end-to-end measurement.
"""

from podium._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
