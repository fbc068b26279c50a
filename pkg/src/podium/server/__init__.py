from podium.server.config import load_config, parse_config
from podium.server.room import (
    Close,
    Effect,
    JoinDecision,
    Participant,
    Room,
    RoomConfig,
    Send,
    SERVER_SENDER_ID,
)
from podium.server.transport import RoomHost, Server
