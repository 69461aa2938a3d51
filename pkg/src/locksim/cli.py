"""Command-line entry points: scripted scenario runs and the live service.

Exit codes for ``run``: 0 pass, 1 assertion failure, 2 usage/parse error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, SimConfig, load_config_file
from .eeprom import EepromError, load_image
from .scenario import ScenarioSyntaxError, parse_scenario, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locksim",
                                     description="Electronic code-lock simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scripted scenario")
    p_run.add_argument("script", help="scenario script file")
    p_run.add_argument("--eeprom", help="initial EEPROM image (.bin or .hex)")
    p_run.add_argument("--config", help="config file (key = value lines)")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--json", action="store_true", help="print the report as JSON")
    p_run.add_argument("--trace", help="write the LCD bus trace to this file")

    p_serve = sub.add_parser("serve", help="serve one live simulation over HTTP")
    p_serve.add_argument("--bind", default="127.0.0.1:8625", help="host:port")
    p_serve.add_argument("--eeprom", help="initial EEPROM image (.bin or .hex)")
    p_serve.add_argument("--config", help="config file")
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--manual-clock", action="store_true",
                         help="advance simulated time only via POST /api/clock")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_serve(args)


def _cmd_run(args) -> int:
    try:
        with open(args.script, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        script = parse_scenario(text)
        config = load_config_file(args.config) if args.config else SimConfig()
        image = load_image(args.eeprom) if args.eeprom else None
    except (ScenarioSyntaxError, ConfigError, EepromError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    holder = {}
    report = run(script, seed=args.seed, config=config, eeprom_image=image,
                 on_sim=lambda sim: holder.update(sim=sim))

    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(holder["sim"].lcd.trace_text() + "\n")

    if args.json:
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        status = "PASS" if report.passed else "FAIL"
        print(f"{status}  t={report.t_ms}ms  scans={report.scans_executed}")
        print(f"  lcd0 [{report.lcd[0]}]")
        print(f"  lcd1 [{report.lcd[1]}]")
        print(f"  lock={report.lock} buzzer={report.buzzer}")
        for line, expected, actual in report.failures:
            print(f"  line {line}: expected {expected}, got {actual}")
    return 0 if report.passed else 1


def _cmd_serve(args) -> int:
    from .service import serve  # deferred: pulls in fastapi/uvicorn

    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"error: --bind expects host:port, got {args.bind!r}", file=sys.stderr)
        return 2
    try:
        config = load_config_file(args.config) if args.config else SimConfig()
        image = load_image(args.eeprom) if args.eeprom else None
    except (ConfigError, EepromError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        serve(host, int(port_text), config=config, eeprom_image=image,
              manual_clock=args.manual_clock, seed=args.seed)
    except OSError as exc:
        print(f"error: bind failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
