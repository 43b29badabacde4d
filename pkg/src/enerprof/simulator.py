"""Scripted workload process speaking the harness protocol.

Stands in for a real inference runtime in tests and the bundled demo
scenario. Batch latency follows ``base + per_item * batch_size``; timestamps
advance on an exact virtual schedule from ``--t0-ns`` (default: the real
clock at startup), so runs are reproducible. ``--realtime`` additionally
sleeps each batch out, pacing the virtual schedule against the wall clock.

Run as: python -m enerprof.simulator [options]
"""

from __future__ import annotations

import argparse
import sys
import time


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enerprof-simulator", description=__doc__.splitlines()[0]
    )
    parser.add_argument("--latency-base-ms", type=float, default=50.0,
                        help="fixed per-batch latency component (ms)")
    parser.add_argument("--latency-per-item-ms", type=float, default=0.0,
                        help="latency added per image in the batch (ms)")
    parser.add_argument("--oom-at", type=int, default=0,
                        help="emit OOM for batch sizes >= this (0 = never)")
    parser.add_argument("--fatal-at-exec", type=int, default=0,
                        help="emit FATAL on the Nth EXEC (0 = never)")
    parser.add_argument("--t0-ns", type=int, default=0,
                        help="virtual clock origin (0 = real clock at start)")
    parser.add_argument("--realtime", action="store_true",
                        help="sleep each batch's latency instead of running instantly")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    base_ns = round(args.latency_base_ms * 1e6)
    per_item_ns = round(args.latency_per_item_ms * 1e6)
    t = args.t0_ns if args.t0_ns > 0 else time.time_ns()
    batch_size = 1
    execs = 0

    print("READY", flush=True)
    for line in sys.stdin:
        parts = line.strip().split()
        if not parts:
            continue
        cmd = parts[0]
        if cmd == "CONFIG":
            batch_size = int(parts[1])
        elif cmd == "EXEC":
            execs += 1
            if args.fatal_at_exec and execs >= args.fatal_at_exec:
                print("FATAL simulated crash", flush=True)
                continue
            if args.oom_at and batch_size >= args.oom_at:
                print("OOM", flush=True)
                continue
            latency_ns = base_ns + per_item_ns * batch_size
            if args.realtime:
                time.sleep(latency_ns / 1e9)
            t += latency_ns
            print(f"BATCH_END {t}", flush=True)
        elif cmd == "STOP":
            print("DONE", flush=True)
            return 0
        else:
            print(f"FATAL unknown command {cmd}", flush=True)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
