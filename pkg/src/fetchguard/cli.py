"""Command-line front end: validate configs, run scenarios, explain decisions.

Exit codes: 0 success, 1 validation or expectation failure, 2 I/O or parse
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import PolicyConfig
from .engine import ALLOW, STAGES, DecisionTrace
from .errors import ConfigError, ScenarioParseError
from .scenario import load_scenario, run_scenario, write_traces

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_IO = 2


def _load_config(path: str) -> PolicyConfig:
    try:
        return PolicyConfig.load(path)
    except (OSError, ConfigError) as exc:
        raise SystemExit(_io_error(f"cannot load config {path}: {exc}"))


def _io_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_IO


def cmd_validate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    report = config.validate()
    if report.ok:
        print(f"config {args.config}: valid ({config.fingerprint()[:12]})")
        return EXIT_OK
    print(report.render())
    print(f"config {args.config}: {len(report.findings)} finding(s)")
    return EXIT_FAILURE


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    report = config.validate()
    if not report.ok:
        print(report.render(), file=sys.stderr)
        print("config invalid; nothing was run", file=sys.stderr)
        return EXIT_FAILURE
    try:
        script = load_scenario(args.scenario)
    except (OSError, ScenarioParseError) as exc:
        return _io_error(f"cannot load scenario {args.scenario}: {exc}")
    result = run_scenario(config, script, audit_all=args.audit_all)
    try:
        write_traces(result.traces, args.trace)
    except OSError as exc:
        return _io_error(f"cannot write traces to {args.trace}: {exc}")
    print(result.summary())
    print(f"traces written to {args.trace}")
    return EXIT_OK if result.ok else EXIT_FAILURE


def _find_trace(path: str, request_id: str) -> DecisionTrace | None:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            if doc.get("request_id") == request_id:
                return DecisionTrace.from_dict(doc)
    return None


_STAGE_TITLES = {
    "eligibility": "eligibility",
    "ordering": "ordering",
    "emotion": "emotion/matrix",
    "category_context": "category/context",
    "personal": "personal",
}


def render_explanation(trace: DecisionTrace) -> str:
    """Plain-language walk through the five policy stages.

    Personal-policy denials never name the user who tagged the object."""
    req = trace.request
    out = [
        f"request {trace.request_id}: user={req['user_id']} object={req['object_id']} at t={req['now']}",
    ]
    outcomes: dict[str, dict] = {}
    for event in trace.events:
        if event.get("audit"):
            continue
        name = event["node"]
        if name.endswith("_ok"):
            outcomes[name[: -len("_ok")]] = event
    deciding = trace.decision.deciding_policy
    for stage in STAGES:
        title = _STAGE_TITLES[stage]
        event = outcomes.get(stage)
        if event is None:
            out.append(f"  {title}: not evaluated")
            continue
        inputs = event.get("inputs", {})
        if event["outcome"] == "success":
            line = f"  {title}: pass"
        elif stage == "personal":
            line = f"  {title}: FAIL - personal object, access not granted"
        else:
            line = f"  {title}: FAIL - {trace.decision.reason}"
        if stage == "emotion" and inputs:
            line += (
                f" (zone {inputs.get('base_zone')} -> effective {inputs.get('effective_zone')}; "
                f"matrix row cooldown={inputs.get('cooldown_profile')} "
                f"class={inputs.get('request_class')} allows {inputs.get('allowed_groups')}; "
                f"required checks {inputs.get('required_checks')})"
            )
        if stage == "ordering" and inputs and inputs.get("active_cooldowns"):
            line += f" (active cool-downs: {inputs['active_cooldowns']})"
        if stage == "category_context" and inputs.get("failed_check"):
            line += f" (failed check: {inputs['failed_check']})"
        out.append(line)
    for warning in trace.warnings:
        out.append(f"  warning: {warning}")
    verdict = trace.decision.verdict.upper()
    if trace.decision.verdict == ALLOW:
        out.append(f"verdict: {verdict}")
    else:
        out.append(f"verdict: {verdict} (deciding policy: {deciding}) - {trace.decision.reason}")
    return "\n".join(out)


def cmd_explain(args: argparse.Namespace) -> int:
    if not Path(args.trace).exists():
        return _io_error(f"no such trace file: {args.trace}")
    try:
        trace = _find_trace(args.trace, args.request)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        return _io_error(f"cannot read trace {args.trace}: {exc}")
    if trace is None:
        print(f"error: no decision with request id {args.request!r}", file=sys.stderr)
        return EXIT_FAILURE
    print(render_explanation(trace))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fetchguard",
        description="Decide household-robot fetch requests and audit the decisions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a policy config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run a scenario script and write traces")
    p.add_argument("--config", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--audit-all", action="store_true", dest="audit_all")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("explain", help="explain one decision from a trace file")
    p.add_argument("--trace", required=True)
    p.add_argument("--request", required=True)
    p.set_defaults(func=cmd_explain)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_IO


def main_entry() -> None:
    sys.exit(main())
