from podium.client.audio import AUDIO_MIN_GAIN, AUDIO_REF_M, AudioCue, audio_cue
from podium.client.interpolate import (
    BUFFER_CAPACITY,
    EXTRAP_CAP_MS,
    EmptyBuffer,
    INTERP_DELAY_MS,
    PoseBuffer,
    PoseSample,
    sample_pose,
)
from podium.client.view import ParticipantView, RoomView
