"""podium-harness: scripted bots, metrics, and room trace tooling.

    podium-harness run --scenario presentation --seed 7 --latency-ms 50 --loss 0.05 --out metrics.json
    podium-harness record --scenario handshake --seed 7 --out inputs.jsonl
    podium-harness replay --inputs inputs.jsonl --out effects.jsonl
    podium-harness gen-traces --out traces/
"""

from __future__ import annotations

import argparse
import sys

from podium.harness.recorder import RoomRecorder, load_input_trace, replay, save_output_trace
from podium.harness.scenarios import SCENARIO_NAMES, ScenarioAssertionFailed, run_scenario
from podium.harness.traces import write_canonical
from podium.server.room import RoomConfig


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--latency-ms", type=float, default=0.0)
    p.add_argument("--jitter-ms", type=float, default=0.0)
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--traces", default=None, help="directory with canonical trace bundles")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="podium-harness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and emit metrics JSON")
    _add_run_args(run_p)
    run_p.add_argument("--out", default=None, help="metrics JSON path (default: stdout)")

    rec_p = sub.add_parser("record", help="run a scenario, recording the room input trace")
    _add_run_args(rec_p)
    rec_p.add_argument("--out", required=True, help="input trace JSONL path")

    rep_p = sub.add_parser("replay", help="replay a recorded room input trace")
    rep_p.add_argument("--inputs", required=True)
    rep_p.add_argument("--out", required=True, help="effect trace JSONL path")
    rep_p.add_argument("--deck-size", type=int, default=12)
    rep_p.add_argument("--max-participants", type=int, default=16)

    gen_p = sub.add_parser("gen-traces", help="write the canonical trace bundles")
    gen_p.add_argument("--out", required=True, help="target directory")

    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            result = run_scenario(
                args.scenario,
                seed=args.seed,
                latency_ms=args.latency_ms,
                jitter_ms=args.jitter_ms,
                loss=args.loss,
                traces_dir=args.traces,
            )
        except ScenarioAssertionFailed as exc:
            print(f"scenario assertion failed: {exc}", file=sys.stderr)
            return 1
        text = result.metrics.to_json()
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return 0

    if args.command == "record":
        recorder = RoomRecorder()
        try:
            run_scenario(
                args.scenario,
                seed=args.seed,
                latency_ms=args.latency_ms,
                jitter_ms=args.jitter_ms,
                loss=args.loss,
                traces_dir=args.traces,
                recorder=recorder,
            )
        except ScenarioAssertionFailed as exc:
            print(f"scenario assertion failed (trace still recorded): {exc}", file=sys.stderr)
        recorder.save(args.out)
        print(f"recorded {len(recorder.lines)} room inputs to {args.out}")
        return 0

    if args.command == "replay":
        config = RoomConfig(room_id=1, deck_size=args.deck_size, max_participants=args.max_participants)
        out = replay(load_input_trace(args.inputs), config)
        save_output_trace(out, args.out)
        print(f"replayed {args.inputs}: {len(out)} output lines -> {args.out}")
        return 0

    if args.command == "gen-traces":
        paths = write_canonical(args.out)
        for p in paths:
            print(f"wrote {p}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
