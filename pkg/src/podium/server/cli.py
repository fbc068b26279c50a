"""podium-server: run the relay.

    podium-server --port 8750 --config rooms.json [--tcp-port 8751] [--host 0.0.0.0]
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys

from podium.server.config import load_config
from podium.server.transport import Server


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="podium-server", description=__doc__)
    parser.add_argument("--port", type=int, required=True, help="WebSocket listen port")
    parser.add_argument("--config", required=True, help="room config JSON path")
    parser.add_argument("--tcp-port", type=int, default=None, help="optional raw-TCP listen port")
    parser.add_argument("--host", default="0.0.0.0")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stdout)

    rooms = load_config(args.config)
    server = Server(rooms)
    try:
        asyncio.run(server.serve(args.host, args.port, args.tcp_port))
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
