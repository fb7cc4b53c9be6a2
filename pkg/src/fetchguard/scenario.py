"""Timestamped scenario scripts and the simulated-clock runner.

A scenario is an ordered list of events (set_emotion, set_context, request,
tag_personal, grant) with non-decreasing integer timestamps. Parsing is
fail-fast: a malformed script raises before anything executes. Requests may
carry an `expect` annotation; mismatches are collected, not raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import json

from .config import PolicyConfig
from .emotion import EmotionSample
from .engine import ALLOW, DENY, DecisionEngine, DecisionTrace, FetchRequest
from .errors import FetchguardError, ScenarioParseError
from .model import ContextSnapshot

EVENT_TYPES = ("set_emotion", "set_context", "request", "tag_personal", "grant")

#: Conservative context assumed until a scenario sets one.
DEFAULT_ROOM = "unspecified"


@dataclass(frozen=True)
class Event:
    t: int
    type: str
    fields: dict


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    events: tuple[Event, ...]


def parse_scenario(data: dict, fallback_name: str = "scenario") -> ScenarioScript:
    if not isinstance(data, dict) or "events" not in data:
        raise ScenarioParseError("scenario must be an object with an 'events' list")
    name = str(data.get("name", fallback_name))
    raw_events = data["events"]
    if not isinstance(raw_events, list):
        raise ScenarioParseError("'events' must be a list")
    events: list[Event] = []
    last_t = 0
    for i, raw in enumerate(raw_events):
        where = f"event #{i}"
        if not isinstance(raw, dict):
            raise ScenarioParseError(f"{where}: not an object")
        etype = raw.get("type")
        if etype not in EVENT_TYPES:
            raise ScenarioParseError(f"{where}: unknown event type {etype!r}")
        if "t" not in raw or not isinstance(raw["t"], int) or raw["t"] < 0:
            raise ScenarioParseError(f"{where}: 't' must be a non-negative integer")
        t = raw["t"]
        if t < last_t:
            raise ScenarioParseError(f"{where}: timestamps must be non-decreasing")
        last_t = t
        fields = {k: v for k, v in raw.items() if k not in ("t", "type")}
        _check_fields(etype, fields, where)
        events.append(Event(t=t, type=etype, fields=fields))
    return ScenarioScript(name=name, events=tuple(events))


_REQUIRED_FIELDS = {
    "set_emotion": {"user": str, "valence": (int, float), "arousal": (int, float)},
    "set_context": {"room": str, "adult_present": bool, "verbal_affirmation": bool},
    "request": {"user": str, "object": str},
    "tag_personal": {"actor": str, "object": str},
    "grant": {"actor": str, "object": str, "grantee": str},
}


def _check_fields(etype: str, fields: dict, where: str) -> None:
    for key, typ in _REQUIRED_FIELDS[etype].items():
        if key not in fields:
            raise ScenarioParseError(f"{where}: {etype} needs field {key!r}")
        if not isinstance(fields[key], typ):
            raise ScenarioParseError(f"{where}: field {key!r} has the wrong type")
    if etype == "request":
        expect = fields.get("expect")
        if expect is not None and expect not in (ALLOW, DENY):
            raise ScenarioParseError(f"{where}: expect must be 'allow' or 'deny'")
        extra = set(fields) - {"user", "object", "expect"}
    else:
        extra = set(fields) - set(_REQUIRED_FIELDS[etype])
    if extra:
        raise ScenarioParseError(f"{where}: unknown fields {sorted(extra)}")


def load_scenario(path: str | Path) -> ScenarioScript:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioParseError(f"cannot parse {path}: {exc}") from None
    return parse_scenario(data, fallback_name=Path(path).stem)


@dataclass
class Mismatch:
    request_id: str
    expected: str
    got: str


@dataclass
class RunResult:
    scenario: str
    traces: list[DecisionTrace] = field(default_factory=list)
    allowed: int = 0
    denied: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        lines = [
            f"scenario {self.scenario}: {self.allowed + self.denied} request(s), "
            f"{self.allowed} allowed, {self.denied} denied, "
            f"{len(self.mismatches)} expectation mismatch(es)"
        ]
        for m in self.mismatches:
            lines.append(f"  mismatch {m.request_id}: expected {m.expected}, got {m.got}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines)


def run_scenario(
    config: PolicyConfig, script: ScenarioScript, audit_all: bool = False
) -> RunResult:
    """Execute events in order on a simulated clock starting at 0."""
    engine = DecisionEngine(config, audit_all=audit_all)
    result = RunResult(scenario=script.name)
    emotions: dict[str, EmotionSample] = {}
    context = ContextSnapshot(
        room=DEFAULT_ROOM, adult_present=False, verbal_affirmation=False, timestamp=0
    )
    seq = 0
    for event in script.events:
        if event.type == "set_emotion":
            emotions[event.fields["user"]] = EmotionSample(
                float(event.fields["valence"]), float(event.fields["arousal"])
            )
        elif event.type == "set_context":
            context = ContextSnapshot(
                room=event.fields["room"],
                adult_present=event.fields["adult_present"],
                verbal_affirmation=event.fields["verbal_affirmation"],
                timestamp=event.t,
            )
        elif event.type == "tag_personal":
            try:
                engine.apply_tag(event.fields["actor"], event.fields["object"])
            except FetchguardError as exc:
                result.notes.append(f"t={event.t} tag_personal rejected: {exc}")
        elif event.type == "grant":
            try:
                engine.apply_grant(
                    event.fields["actor"], event.fields["object"], event.fields["grantee"]
                )
            except FetchguardError as exc:
                result.notes.append(f"t={event.t} grant rejected: {exc}")
        elif event.type == "request":
            user = event.fields["user"]
            request = FetchRequest(
                request_id=f"{script.name}:{seq:03d}",
                user_id=user,
                object_id=event.fields["object"],
                emotion=emotions.get(user, EmotionSample(0.0, 0.0)),
                context=context,
                now=event.t,
            )
            seq += 1
            decision, trace = engine.decide(request)
            result.traces.append(trace)
            if decision.verdict == ALLOW:
                result.allowed += 1
            else:
                result.denied += 1
            expect = event.fields.get("expect")
            if expect is not None and expect != decision.verdict:
                result.mismatches.append(
                    Mismatch(request_id=request.request_id, expected=expect, got=decision.verdict)
                )
    return result


def write_traces(traces: list[DecisionTrace], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(trace.to_json())
            fh.write("\n")


def read_traces(path: str | Path) -> list[DecisionTrace]:
    traces = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                traces.append(DecisionTrace.from_dict(json.loads(line)))
    return traces
