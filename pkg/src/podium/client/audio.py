"""Proximity audio: per-speaker gain and direction for the local listener.

Gain follows an inverse-distance law clamped to [min_gain, 1]: full volume
inside the reference radius, then ref/d falloff.  Muted speakers produce no
cue at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

AUDIO_REF_M = 1.0
AUDIO_MIN_GAIN = 0.05


@dataclass(frozen=True, slots=True)
class AudioCue:
    gain: float
    direction: tuple[float, float, float]
    speaker_id: int


def audio_cue(
    listener_pos,
    listener_forward,
    speaker_pos,
    speaker_muted: bool,
    *,
    speaker_id: int = 0,
    ref_m: float = AUDIO_REF_M,
    min_gain: float = AUDIO_MIN_GAIN,
) -> AudioCue | None:
    """Gain/direction for one remote speaker, or None when muted.

    Co-located speakers (zero offset) reuse the listener's forward vector so
    the direction stays unit-norm.
    """
    if speaker_muted:
        return None
    dx = speaker_pos[0] - listener_pos[0]
    dy = speaker_pos[1] - listener_pos[1]
    dz = speaker_pos[2] - listener_pos[2]
    d = math.sqrt(dx * dx + dy * dy + dz * dz)
    gain = min(1.0, max(ref_m / max(d, ref_m), min_gain))
    if d > 1e-9:
        direction = (dx / d, dy / d, dz / d)
    else:
        fx, fy, fz = listener_forward
        fn = math.sqrt(fx * fx + fy * fy + fz * fz)
        direction = (fx / fn, fy / fn, fz / fn) if fn > 1e-9 else (0.0, 0.0, 1.0)
    return AudioCue(gain=gain, direction=direction, speaker_id=speaker_id)
