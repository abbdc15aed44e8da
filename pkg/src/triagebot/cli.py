"""Operator command line.

    triagebot validate <table-file>            check a table, print findings
    triagebot chat --table <file>              interactive terminal triage
    triagebot replay --table <file> --answers yes,no,...
    triagebot report fallbacks [--from X] [--to Y]
    triagebot serve [--port N] [--data-dir DIR]

Exit codes: 0 success, 1 validation/input errors, 2 usage or IO errors.
Honors TRIAGEBOT_DATA_DIR, TRIAGEBOT_MATCHER_CONFIG and TRIAGEBOT_NOTIFY_URL.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime
from pathlib import Path

from .engine import DialogEngine, parse_answer, run_path
from .errors import FormatError, TriagebotError
from .improvement import FallbackStore
from .matcher import load_matcher_config
from .model import parse_table, validate_table
from .service import DATA_DIR_ENV, TriageService, resolve_data_dir

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triagebot", description=__doc__)
    parser.add_argument("--json", action="store_true", help="JSON output for all commands")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a table file")
    p_validate.add_argument("table_file")

    p_chat = sub.add_parser("chat", help="interactive triage in the terminal")
    p_chat.add_argument("--table", required=True, dest="table_file")
    p_chat.add_argument("--matcher-config", default=None)
    p_chat.add_argument("--data-dir", default=None)

    p_replay = sub.add_parser("replay", help="walk a table with a fixed answer list")
    p_replay.add_argument("--table", required=True, dest="table_file")
    p_replay.add_argument("--answers", required=True, help="comma-separated yes/no list")

    p_report = sub.add_parser("report", help="emit reports")
    report_sub = p_report.add_subparsers(dest="report_kind", required=True)
    p_fallbacks = report_sub.add_parser("fallbacks", help="fallback report as JSON")
    p_fallbacks.add_argument("--from", dest="window_from", default=None)
    p_fallbacks.add_argument("--to", dest="window_to", default=None)
    p_fallbacks.add_argument("--data-dir", default=None)
    p_fallbacks.add_argument("--matcher-config", default=None)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data-dir", default=None)
    p_serve.add_argument("--matcher-config", default=None)

    return parser


def _read_table(path: str):
    # OSError propagates to main(), which maps it to the usage/IO exit code.
    text = Path(path).read_text(encoding="utf-8")
    fmt = "json" if path.endswith(".json") else None
    return parse_table(text, fmt)


def cmd_validate(args) -> int:
    try:
        table = _read_table(args.table_file)
    except FormatError as exc:
        if args.json:
            print(json.dumps({"ok": False, "error": exc.code, "message": exc.message}))
        else:
            print(f"ERROR {exc.code} @document {exc.message}")
        return EXIT_INVALID
    report = validate_table(table)
    if args.json:
        print(json.dumps(report.to_dict(), ensure_ascii=False))
    else:
        for finding in report.findings:
            print(str(finding))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_chat(args) -> int:
    try:
        table = _read_table(args.table_file)
    except FormatError as exc:
        print(f"invalid table: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    report = validate_table(table)
    if not report.ok:
        for finding in report.errors:
            print(str(finding), file=sys.stderr)
        return EXIT_INVALID

    cfg = load_matcher_config(args.matcher_config)
    store = FallbackStore()
    data_dir = args.data_dir or os.environ.get(DATA_DIR_ENV)
    engine = DialogEngine(cfg, fallback_store=store)
    session, prompt = engine.start_session(table)
    print(prompt)
    event = None
    try:
        for line in sys.stdin:
            result = engine.advance(session.id, line.rstrip("\n"))
            print(result.reply)
            if result.terminal:
                event = result.event
                break
    except KeyboardInterrupt:
        pass
    if event is not None:
        print(f"EVENT {event.value}")

    log_dir = Path(data_dir) if data_dir else Path.cwd()
    log_dir.mkdir(parents=True, exist_ok=True)
    log_path = log_dir / f"transcript-{session.id[:8]}.log"
    with open(log_path, "w", encoding="utf-8") as fh:
        for turn in session.transcript:
            fh.write(f"{turn.direction.upper()}: {turn.text}\n")
    print(f"transcript written to {log_path}", file=sys.stderr)
    return EXIT_OK


def _short_id(intention_id: str) -> str:
    return intention_id.removeprefix("intention-")


def cmd_replay(args) -> int:
    try:
        table = _read_table(args.table_file)
        answers = [parse_answer(a) for a in args.answers.split(",") if a.strip()]
    except FormatError as exc:
        print(f"invalid table: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        event, visited = run_path(table, answers)
    except TriagebotError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    real = [v for v in visited if v in table]
    if args.json:
        print(json.dumps({"visited": visited, "event": event.value}))
    else:
        print(" ".join(_short_id(v) for v in real) + f" {event.value}")
    return EXIT_OK


def _parse_instant_arg(value: str | None, default: float) -> float:
    if value is None:
        return default
    try:
        return float(value)
    except ValueError:
        return datetime.fromisoformat(value).timestamp()


def cmd_report_fallbacks(args) -> int:
    data_dir = resolve_data_dir(args.data_dir)
    service = TriageService(data_dir, matcher_config_path=args.matcher_config)
    try:
        window_from = _parse_instant_arg(args.window_from, 0.0)
        window_to = _parse_instant_arg(args.window_to, time.time())
    except ValueError as exc:
        print(f"bad instant: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = service.fallback_report(window_from, window_to)
    print(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    data_dir = resolve_data_dir(args.data_dir)
    service = TriageService(data_dir, matcher_config_path=args.matcher_config)
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if exc.code not in (0,) else EXIT_OK
    try:
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "chat":
            return cmd_chat(args)
        if args.command == "replay":
            return cmd_replay(args)
        if args.command == "report":
            return cmd_report_fallbacks(args)
        if args.command == "serve":
            return cmd_serve(args)
    except TriagebotError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    parser.print_usage(sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
