"""Network front end: WebSocket (one envelope per binary frame) and an
optional raw-TCP listener (frames delimited by the header's payload_len).

Each room is a single serialized event loop: connection handlers funnel
frames through the room's asyncio lock, so room logic sees a total order.
Structured JSON log lines go to the 'podium.server' logger, one per
accepted/rejected message.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time

from websockets.asyncio.server import serve

from podium.protocol import codec
from podium.protocol.errors import ProtocolError
from podium.server.room import Close, Room, RoomConfig, Send

log = logging.getLogger("podium.server")


def _now_ms() -> int:
    return time.monotonic_ns() // 1_000_000


class _Peer:
    """Transport-agnostic send/close for one connected participant."""

    def __init__(self, send_bytes, close):
        self.send_bytes = send_bytes
        self.close = close


class RoomHost:
    """Serializes one Room and routes its effects to live connections."""

    def __init__(self, config: RoomConfig, clock=_now_ms):
        self.room = Room(config)
        self.clock = clock
        self.lock = asyncio.Lock()
        self.peers: dict[int, _Peer] = {}

    def _emit_log(self) -> None:
        for entry in self.room.drain_log():
            log.info(json.dumps(entry, sort_keys=True))

    async def _apply(self, effects) -> None:
        for effect in effects:
            if isinstance(effect, Send):
                peer = self.peers.get(effect.target_id)
                if peer is not None:
                    try:
                        await peer.send_bytes(effect.data)
                    except Exception:
                        pass  # disconnect handling reaps this peer
            elif isinstance(effect, Close):
                peer = self.peers.pop(effect.target_id, None)
                if peer is not None:
                    try:
                        await peer.close(effect.reason)
                    except Exception:
                        pass

    async def join(self, data: bytes, peer: _Peer) -> tuple[int | None, str | None]:
        async with self.lock:
            now = self.clock()
            try:
                env = codec.decode(data)
            except ProtocolError as exc:
                return None, type(exc).__name__
            decision = self.room.handle_join(env, now)
            if decision.participant_id is not None:
                self.peers[decision.participant_id] = peer
            await self._apply(decision.effects)
            self._emit_log()
            return decision.participant_id, decision.reason

    async def frame(self, participant_id: int, data: bytes) -> None:
        async with self.lock:
            effects = self.room.handle_frame(participant_id, data, self.clock())
            await self._apply(effects)
            self._emit_log()

    async def disconnect(self, participant_id: int) -> None:
        async with self.lock:
            self.peers.pop(participant_id, None)
            effects = self.room.handle_disconnect(participant_id, self.clock())
            await self._apply(effects)
            self._emit_log()

    async def tick_forever(self, interval_s: float = 1.0) -> None:
        while True:
            await asyncio.sleep(interval_s)
            async with self.lock:
                await self._apply(self.room.tick(self.clock()))
                self._emit_log()


class Server:
    def __init__(self, rooms: dict[int, RoomConfig]):
        self.hosts = {room_id: RoomHost(cfg) for room_id, cfg in rooms.items()}

    def host_for(self, room_id: int) -> RoomHost | None:
        return self.hosts.get(room_id)

    # -- WebSocket ---------------------------------------------------------

    async def ws_handler(self, websocket) -> None:
        try:
            first = await websocket.recv()
        except Exception:
            return
        if isinstance(first, str):
            await websocket.close(code=1003, reason="BinaryFramesOnly")
            return
        try:
            room_id = codec.decode(bytes(first)).room_id
        except ProtocolError as exc:
            await websocket.close(code=1002, reason=type(exc).__name__)
            return
        host = self.host_for(room_id)
        if host is None:
            await websocket.close(code=1008, reason="UnknownRoom")
            return

        async def send_bytes(data: bytes) -> None:
            await websocket.send(data)

        async def close(reason: str) -> None:
            await websocket.close(code=1000, reason=reason)

        pid, reason = await host.join(bytes(first), _Peer(send_bytes, close))
        if pid is None:
            await websocket.close(code=1008, reason=reason or "JoinRejected")
            return
        try:
            async for frame in websocket:
                if isinstance(frame, str):
                    continue
                await host.frame(pid, bytes(frame))
        except Exception:
            pass
        finally:
            await host.disconnect(pid)

    # -- raw TCP -----------------------------------------------------------

    async def tcp_handler(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        buffer = bytearray()

        async def read_frame() -> bytes | None:
            while True:
                size = codec.frame_size(bytes(buffer))
                if size is not None and len(buffer) >= size:
                    frame = bytes(buffer[:size])
                    del buffer[:size]
                    return frame
                chunk = await reader.read(65536)
                if not chunk:
                    return None
                buffer.extend(chunk)

        async def send_bytes(data: bytes) -> None:
            writer.write(data)
            await writer.drain()

        async def close(reason: str) -> None:
            writer.close()

        pid = None
        host = None
        try:
            first = await read_frame()
            if first is None:
                return
            try:
                room_id = codec.decode(first).room_id
            except ProtocolError:
                return
            host = self.host_for(room_id)
            if host is None:
                return
            pid, _reason = await host.join(first, _Peer(send_bytes, close))
            if pid is None:
                return
            while True:
                frame = await read_frame()
                if frame is None:
                    break
                await host.frame(pid, frame)
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            if host is not None and pid is not None:
                await host.disconnect(pid)
            try:
                writer.close()
            except Exception:
                pass

    # -- lifecycle -----------------------------------------------------------

    async def serve(self, host: str, ws_port: int, tcp_port: int | None = None) -> None:
        tickers = [
            asyncio.create_task(room_host.tick_forever()) for room_host in self.hosts.values()
        ]
        tcp_server = None
        if tcp_port is not None:
            tcp_server = await asyncio.start_server(self.tcp_handler, host, tcp_port)
        async with serve(self.ws_handler, host, ws_port, max_size=2**20):
            log.info(json.dumps({"event": "listening", "host": host, "ws_port": ws_port, "tcp_port": tcp_port}))
            try:
                await asyncio.Future()
            finally:
                for t in tickers:
                    t.cancel()
                if tcp_server is not None:
                    tcp_server.close()
