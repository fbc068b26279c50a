"""Room input/output traces: record a live room's inputs, replay them into a
fresh room, and capture the resulting effect stream.

Rooms are pure functions of their input trace, so replaying a recording
yields a byte-identical effect trace; the determinism test replays twice and
compares.  Lines are JSON:

    {"t_ms": 0, "op": "join", "frame": "<hex>"}
    {"t_ms": 5, "op": "frame", "sender": 2, "frame": "<hex>"}

and on output:

    {"t_ms": 5, "op": "send", "target": 1, "frame": "<hex>"}
    {"t_ms": 9, "op": "close", "target": 3, "reason": "PhaseExclusion"}
"""

from __future__ import annotations

import json
from pathlib import Path

from podium.protocol import codec
from podium.server.room import Close, Room, RoomConfig, Send


class RoomRecorder:
    """Plugged into SimServer; captures every room input in arrival order."""

    def __init__(self):
        self.lines: list[dict] = []

    def on_join(self, t_ms: int, frame: bytes) -> None:
        self.lines.append({"t_ms": t_ms, "op": "join", "frame": frame.hex()})

    def on_frame(self, t_ms: int, sender: int, frame: bytes) -> None:
        self.lines.append({"t_ms": t_ms, "op": "frame", "sender": sender, "frame": frame.hex()})

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.lines:
                fh.write(json.dumps(line, sort_keys=True) + "\n")


def load_input_trace(path: str | Path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def replay(input_lines: list[dict], config: RoomConfig) -> list[dict]:
    """Feed a recorded input trace into a fresh room; return its effect trace."""
    room = Room(config)
    out: list[dict] = []
    for line in input_lines:
        t = line["t_ms"]
        op = line["op"]
        if op == "join":
            decision = room.handle_join(codec.decode(bytes.fromhex(line["frame"])), t)
            effects = decision.effects
            out.append({"t_ms": t, "op": "join_decision", "participant": decision.participant_id, "reason": decision.reason})
        elif op == "frame":
            effects = room.handle_frame(line["sender"], bytes.fromhex(line["frame"]), t)
        elif op == "tick":
            effects = room.tick(t)
        else:
            raise ValueError(f"unknown trace op {op!r}")
        for e in effects:
            if isinstance(e, Send):
                out.append({"t_ms": t, "op": "send", "target": e.target_id, "frame": e.data.hex()})
            elif isinstance(e, Close):
                out.append({"t_ms": t, "op": "close", "target": e.target_id, "reason": e.reason})
    return out


def save_output_trace(lines: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(json.dumps(line, sort_keys=True) + "\n")
