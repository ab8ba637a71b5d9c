"""Command line entry points: serve, simulate, analyze, import-interviews.

Settings resolve in the usual order: explicit flags win over environment
variables (CHARLA_CONFIG, CHARLA_LOGS), which win over built-in defaults.
Exit codes: 0 success, 2 bad usage or configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .config import ConfigError, load_config

CONFIG_ENV = "CHARLA_CONFIG"
LOGS_ENV = "CHARLA_LOGS"
DEFAULT_LOGS = "./charla-logs"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _resolve(flag_value: str | None, env_name: str, default: str | None) -> str | None:
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(env_name)
    if env_value:
        return env_value
    return default


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="charla",
        description="Chatbot backend for guided conversations with teenagers, "
        "with log analysis tooling.",
    )
    parser.add_argument("--config", help="path to a JSON config overlay")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--logs", help="log directory (default ./charla-logs)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--static-dir", help="directory with the web console build")
    serve.add_argument(
        "--adapter",
        choices=("local", "platform", "replay"),
        default="local",
        help="messaging adapter: local HTTP sessions, a hosted platform "
        "(needs COMPLETION_URL), or transcript replay",
    )

    simulate = sub.add_parser("simulate", help="generate a deterministic synthetic log")
    simulate.add_argument("--seed", type=int, default=7)
    simulate.add_argument("--users", type=int, default=10)
    simulate.add_argument("--days", type=int, default=3)
    simulate.add_argument("--script", help="persona script JSON overriding generated users")
    simulate.add_argument("--out", required=True, help="log directory to create")

    analyze = sub.add_parser("analyze", help="analyze a log directory")
    analyze.add_argument("--logs", help="log directory to read")
    analyze.add_argument("--out", required=True, help="output directory for the report")
    analyze.add_argument("--top-k", type=int, default=10)
    analyze.add_argument("--no-figures", action="store_true")

    imp = sub.add_parser("import-interviews", help="load clinician interview outcomes")
    imp.add_argument("--csv", required=True, help="csv with header alias,topic_id,level")
    imp.add_argument("--logs", help="log directory to update")

    return parser


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app
    from .gateways import COMPLETION_URL_ENV
    from .service import ChatService

    if args.adapter == "replay":
        print("adapter 'replay' is not available in this build", file=sys.stderr)
        return EXIT_USAGE
    if args.adapter == "platform" and not os.environ.get(COMPLETION_URL_ENV):
        print(
            f"adapter 'platform' needs {COMPLETION_URL_ENV} to be set",
            file=sys.stderr,
        )
        return EXIT_USAGE

    cfg = load_config(_resolve(args.config, CONFIG_ENV, None))
    logs = _resolve(args.logs, LOGS_ENV, DEFAULT_LOGS)
    service = ChatService(cfg, logs)
    app = create_app(service, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    from .simulate import run_simulation

    cfg = load_config(_resolve(args.config, CONFIG_ENV, None))
    summary = run_simulation(
        cfg,
        args.out,
        seed=args.seed,
        users=args.users,
        days=args.days,
        script_path=args.script,
    )
    print(json.dumps(summary, ensure_ascii=False, sort_keys=True))
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    from .analytics.pipeline import run_analysis

    cfg = load_config(_resolve(args.config, CONFIG_ENV, None))
    logs = _resolve(args.logs, LOGS_ENV, DEFAULT_LOGS)
    if not os.path.isdir(logs):
        print(f"log directory not found: {logs}", file=sys.stderr)
        return EXIT_USAGE
    summary = run_analysis(
        logs,
        args.out,
        cfg,
        top_k=args.top_k,
        with_figures=not args.no_figures,
    )
    print(json.dumps(summary, ensure_ascii=False, sort_keys=True))
    return EXIT_OK


def _cmd_import_interviews(args: argparse.Namespace) -> int:
    from .store import SensitivityStore

    logs = _resolve(args.logs, LOGS_ENV, DEFAULT_LOGS)
    store = SensitivityStore(logs)
    count = store.import_interviews_csv(args.csv, at=time.time())
    print(json.dumps({"imported": count}, sort_keys=True))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "simulate": _cmd_simulate,
        "analyze": _cmd_analyze,
        "import-interviews": _cmd_import_interviews,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # surface anything unexpected as a runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
