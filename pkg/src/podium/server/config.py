"""Server configuration: JSON file with one entry per room.

    {
      "rooms": [
        {"room_id": 1, "deck_size": 40, "tick_hz": 60, "max_participants": 64,
         "start_slide": 0, "heartbeat_timeout_ms": 5000,
         "walk_enter_mps": 0.15, "walk_exit_mps": 0.10}
      ]
    }

Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from podium.server.room import RoomConfig

_KNOWN_KEYS = {f.name for f in dataclasses.fields(RoomConfig)}


def parse_config(data: dict) -> dict[int, RoomConfig]:
    rooms_raw = data.get("rooms")
    if not isinstance(rooms_raw, list) or not rooms_raw:
        raise ValueError("config needs a non-empty 'rooms' list")
    rooms: dict[int, RoomConfig] = {}
    for i, entry in enumerate(rooms_raw):
        if not isinstance(entry, dict):
            raise ValueError(f"rooms[{i}] must be an object")
        unknown = set(entry) - _KNOWN_KEYS
        if unknown:
            raise ValueError(f"rooms[{i}]: unknown keys {sorted(unknown)}")
        cfg = RoomConfig(**entry)
        if cfg.room_id in rooms:
            raise ValueError(f"duplicate room_id {cfg.room_id}")
        rooms[cfg.room_id] = cfg
    return rooms


def load_config(path: str | Path) -> dict[int, RoomConfig]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(json.load(fh))
