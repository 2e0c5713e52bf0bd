"""Operator entry points: serve the API/dashboard, emit plugin reports
headlessly, and convert run data to the native format.

Exit codes: 0 success, 1 data error, 2 usage error.  Logs go to stderr;
machine-readable output goes to stdout (or the requested file).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import socket
import sys
from pathlib import Path

from . import __version__, ingest
from .model import ValidationError
from .plugins import PLUGINS, InputError, compute_envelope, canonical_inputs, plugin_names

logger = logging.getLogger("optboard")

ENV_PREFIX = "OPTBOARD_"

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE_ERROR = 2


def _env(name: str, default):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optboard",
        description="Analyze and monitor hyperparameter-optimization runs.",
    )
    parser.add_argument("--version", action="version", version=f"optboard {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="serve the API and dashboard")
    serve.add_argument("--runs-dir", default=_env("RUNS_DIR", "."), help="directory of run subdirectories")
    serve.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    serve.add_argument("--port", type=int, default=_env("PORT", 8050))
    serve.add_argument(
        "--poll-interval", type=float, default=_env("POLL_INTERVAL", 10.0),
        help="seconds between source refresh polls",
    )
    serve.add_argument(
        "--workers", type=int, default=_env("WORKERS", max(1, (os.cpu_count() or 2) - 1)),
        help="worker threads for queued plugins",
    )
    serve.add_argument(
        "--assets-dir", default=_env("ASSETS_DIR", ""),
        help="built dashboard assets (defaults to ./frontend/dist when present)",
    )

    report = sub.add_parser("report", help="compute one plugin result headlessly")
    report.add_argument("run_path", help="run directory")
    report.add_argument("plugin", help="plugin name")
    report.add_argument("--inputs", default="{}", help="plugin inputs as a JSON object")
    report.add_argument("--out", default="-", help="output path, or '-' for stdout")

    convert = sub.add_parser("convert", help="convert a run to the native format")
    convert.add_argument("in_path", help="source run directory")
    convert.add_argument("out_path", help="destination directory")
    convert.add_argument(
        "--format", default="auto",
        help="source format name, or 'auto' to detect",
    )
    return parser


def _validate_serve_args(args: argparse.Namespace) -> None:
    if not 1 <= args.port <= 65535:
        raise InputError("port", "must be in [1, 65535]")
    if args.poll_interval <= 0:
        raise InputError("poll-interval", "must be > 0")
    if args.workers < 1:
        raise InputError("workers", "must be >= 1")


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import JobQueue, RunRegistry, create_app

    _validate_serve_args(args)
    runs_dir = Path(args.runs_dir)
    if not runs_dir.is_dir():
        logger.error("runs directory %s does not exist", runs_dir)
        return EXIT_DATA_ERROR

    registry = RunRegistry(groups_file=runs_dir / ".groups.json")
    added = registry.scan_directory(runs_dir)
    logger.info("registered %d run(s) from %s", len(added), runs_dir)

    assets_dir: Path | None = Path(args.assets_dir) if args.assets_dir else None
    if assets_dir is None:
        candidate = Path.cwd() / "frontend" / "dist"
        assets_dir = candidate if candidate.is_dir() else None
    if assets_dir is not None and not assets_dir.is_dir():
        logger.warning("assets directory %s not found; serving the API only", assets_dir)
        assets_dir = None

    # bind check up front so an occupied port exits nonzero with a clear message
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
    except OSError as exc:
        logger.error("cannot bind %s:%d: %s", args.host, args.port, exc)
        return EXIT_DATA_ERROR
    finally:
        probe.close()

    app = create_app(
        registry,
        queue=JobQueue(workers=args.workers),
        poll_interval_s=args.poll_interval,
        assets_dir=assets_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_config=None)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if args.plugin not in PLUGINS:
        logger.error("unknown plugin %r; valid plugins: %s", args.plugin, plugin_names())
        return EXIT_USAGE_ERROR
    try:
        inputs = json.loads(args.inputs)
        if not isinstance(inputs, dict):
            raise ValueError("inputs must be a JSON object")
    except ValueError as exc:
        logger.error("bad --inputs: %s", exc)
        return EXIT_USAGE_ERROR
    try:
        run = ingest.load_run(args.run_path)
    except ingest.IngestError as exc:
        logger.error("%s", exc)
        return EXIT_DATA_ERROR
    plugin = PLUGINS[args.plugin]
    try:
        canonical = canonical_inputs(plugin, run, inputs)
    except InputError as exc:
        logger.error("invalid inputs: %s", exc)
        return EXIT_USAGE_ERROR
    try:
        envelope = compute_envelope(plugin, run, canonical)
    except (InputError, ValidationError) as exc:
        logger.error("%s", exc)
        return EXIT_DATA_ERROR
    text = json.dumps(envelope, sort_keys=True, separators=(",", ":")) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_convert(args: argparse.Namespace) -> int:
    try:
        if args.format == "auto":
            format_name = ingest.detect_format(args.in_path)
        else:
            format_name = ingest.get_converter(args.format).format_name
    except ingest.UnsupportedFormatError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE_ERROR if args.format != "auto" else EXIT_DATA_ERROR
    except ingest.IngestError as exc:
        logger.error("%s", exc)
        return EXIT_DATA_ERROR
    try:
        run = ingest.load_run(args.in_path, format_name)
    except ingest.IngestError as exc:
        logger.error("%s", exc)
        return EXIT_DATA_ERROR
    ingest.write_native(run, args.out_path)
    logger.info("wrote native run to %s", args.out_path)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "report":
            return cmd_report(args)
        return cmd_convert(args)
    except InputError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
