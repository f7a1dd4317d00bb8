"""Command line: headless runs, network validation, and the HTTP service.

    skysim run --network net.json --scenario scenario.json --out results/
    skysim validate --network net.json
    skysim serve --port 8000 --network net.json
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from ..engine import ScenarioError, World, parse_scenario
from ..model import NetworkError, load_network
from ..protocol import ControllerSessionError
from ..telemetry import export_events_csv, export_frames_csv
from .app import build_controller, create_app

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="skysim", description="Skyway drone-delivery simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario headlessly and export telemetry")
    run_p.add_argument("--network", required=True, help="network JSON file")
    run_p.add_argument("--scenario", required=True, help="scenario JSON file")
    run_p.add_argument(
        "--controller",
        default="builtin:greedy",
        help="builtin:<name> or tcp:<host>:<port> (default builtin:greedy)",
    )
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--out", required=True, help="output directory for CSVs and summary")
    run_p.add_argument("--dt", type=float, default=None, help="override settings dt_s")
    run_p.add_argument(
        "--headless", action="store_true", help="suppress progress output (batch mode)"
    )

    val_p = sub.add_parser("validate", help="validate a network JSON file")
    val_p.add_argument("--network", required=True, help="network JSON file")

    serve_p = sub.add_parser("serve", help="serve the HTTP/WebSocket gateway")
    serve_p.add_argument(
        "--port",
        type=int,
        default=int(os.environ.get("SKYSIM_PORT", "8000")),
        help="HTTP port (default $SKYSIM_PORT or 8000)",
    )
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--network", default=None, help="network JSON to preload")
    serve_p.add_argument("--ui-dir", default=None, help="static web UI directory to mount at /ui")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cli_run(args)
    if args.command == "validate":
        return cli_validate(args)
    if args.command == "serve":
        return cli_serve(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_CONFIG


def _read_file(path: str, what: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"{what} file not found: {path}")
    return p.read_bytes()


def cli_run(args) -> int:
    try:
        net = load_network(_read_file(args.network, "network"))
        scenario = parse_scenario(_read_file(args.scenario, "scenario"))
        if args.seed is not None:
            scenario = dataclasses.replace(scenario, seed=args.seed)
        controller = build_controller(args.controller)
        world = World(net, scenario, controller, dt_override=args.dt)
    except (FileNotFoundError, NetworkError, ScenarioError, ValueError) as exc:
        print(f"skysim: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if not args.headless and args.controller.startswith("tcp:"):
        print(f"waiting for a controller on {args.controller[4:]} ...", file=sys.stderr)
    try:
        result = world.run()
    except ControllerSessionError as exc:
        print(f"skysim: controller session failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "frames.csv").write_bytes(export_frames_csv(result.frames))
    (out / "events.csv").write_bytes(export_events_csv(result.events))
    (out / "summary.json").write_text(
        json.dumps(result.summary, indent=2, sort_keys=True) + "\n"
    )
    if not args.headless:
        s = result.summary
        print(
            f"run finished at t={s['total_time_s']:.1f} s: "
            f"{s['completed']} completed, {s['failed']} failed, {s['active']} active"
        )
        print(f"wrote {out / 'frames.csv'}, {out / 'events.csv'}, {out / 'summary.json'}")
    return EXIT_OK


def cli_validate(args) -> int:
    try:
        raw = _read_file(args.network, "network")
    except FileNotFoundError as exc:
        print(f"skysim: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        net = load_network(raw)
    except NetworkError as exc:
        print(f"invalid network: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"OK: {len(net.nodes)} nodes, {len(net.segments)} segments")
    return EXIT_OK


def cli_serve(args) -> int:
    import uvicorn

    network = None
    if args.network is not None:
        try:
            network = load_network(_read_file(args.network, "network"))
        except (FileNotFoundError, NetworkError) as exc:
            print(f"skysim: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    app = create_app(network=network, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
