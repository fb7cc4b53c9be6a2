"""Compose the policies into one behaviour tree and decide fetch requests.

One engine instance serves one household. Each request is one tick of the
tree; the knowledge step ingests request data into the blackboard, the five
policy gates (eligibility, ordering, emotion, category/context, personal)
pass or record the deciding violation, and the whole walk is captured in a
trace that can be replayed bit-for-bit against the same configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .bt import (
    Action,
    Blackboard,
    Condition,
    FAILURE,
    Fallback,
    Node,
    NodeStatus,
    Repeat,
    SUCCESS,
    Sequence,
    TickListener,
    validate_tree,
)
from .config import PolicyConfig
from .emotion import EmotionSample, Zone, escalate, zone_of
from .errors import ConfigError, PermissionDeniedError, ReplayError
from .matrix import MatrixEntry, MatrixKey, category_checks, matrix_lookup
from .model import (
    AdminRole,
    ContextSnapshot,
    Instant,
    MIN_ELIGIBLE_AGE,
    ObjectSpec,
    Relationship,
    SafetyClass,
    UserGroup,
    UserProfile,
    classify_user_group,
)
from .ordering import CooldownState, Restriction, ordering_restrictions
from .privacy import PersonalRegistry

ALLOW = "allow"
DENY = "deny"

#: Policy stages in evaluation order; trace events follow this order.
STAGES = ("eligibility", "ordering", "emotion", "category_context", "personal")

_STAGE_BY_POLICY = {
    "eligibility": "eligibility",
    "ordering": "ordering",
    "emotion": "emotion",
    "category": "category_context",
    "context": "category_context",
    "personal": "personal",
}

#: Age assumed for unregistered requesters; only its being >= 5 matters,
#: since unknown relationships classify to U at any eligible age.
_ASSUMED_UNKNOWN_AGE = 100

_BOARD_SCHEMA = {
    "identity": UserProfile,
    "emotion": EmotionSample,
    "context": ContextSnapshot,
    "last_request": str,
    "cooldown_state": CooldownState,
    "now": int,
}


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class FetchRequest:
    request_id: str
    user_id: str
    object_id: str
    emotion: EmotionSample
    context: ContextSnapshot
    now: Instant

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "user_id": self.user_id,
            "object_id": self.object_id,
            "emotion": {"valence": self.emotion.valence, "arousal": self.emotion.arousal},
            "context": {
                "room": self.context.room,
                "adult_present": self.context.adult_present,
                "verbal_affirmation": self.context.verbal_affirmation,
                "timestamp": self.context.timestamp,
            },
            "now": self.now,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FetchRequest":
        return cls(
            request_id=data["request_id"],
            user_id=data["user_id"],
            object_id=data["object_id"],
            emotion=EmotionSample(data["emotion"]["valence"], data["emotion"]["arousal"]),
            context=ContextSnapshot(
                room=data["context"]["room"],
                adult_present=data["context"]["adult_present"],
                verbal_affirmation=data["context"]["verbal_affirmation"],
                timestamp=data["context"]["timestamp"],
            ),
            now=data["now"],
        )


@dataclass(frozen=True)
class Decision:
    verdict: str
    deciding_policy: str
    reason: str
    effective_zone: Zone
    allowed_groups_at_leaf: frozenset[UserGroup]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "deciding_policy": self.deciding_policy,
            "reason": self.reason,
            "effective_zone": self.effective_zone.as_str(),
            "allowed_groups_at_leaf": sorted(g.value for g in self.allowed_groups_at_leaf),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Decision":
        return cls(
            verdict=data["verdict"],
            deciding_policy=data["deciding_policy"],
            reason=data["reason"],
            effective_zone=Zone.from_str(data["effective_zone"]),
            allowed_groups_at_leaf=frozenset(UserGroup(g) for g in data["allowed_groups_at_leaf"]),
        )


@dataclass
class DecisionTrace:
    """Full audit record of one decision; replaying it against the same
    config fingerprint must reproduce the identical decision and events."""

    request_id: str
    config_fingerprint: str
    audit_all: bool
    request: dict
    pre_state: dict
    warnings: list[str]
    events: list[dict]
    decision: Decision

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "config_fingerprint": self.config_fingerprint,
            "audit_all": self.audit_all,
            "request": self.request,
            "pre_state": self.pre_state,
            "warnings": self.warnings,
            "events": self.events,
            "decision": self.decision.to_dict(),
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTrace":
        return cls(
            request_id=data["request_id"],
            config_fingerprint=data["config_fingerprint"],
            audit_all=data.get("audit_all", False),
            request=data["request"],
            pre_state=data["pre_state"],
            warnings=list(data.get("warnings", ())),
            events=list(data["events"]),
            decision=Decision.from_dict(data["decision"]),
        )


@dataclass
class _EvalState:
    request: FetchRequest
    profile: UserProfile | None = None
    known_user: bool = True
    obj: ObjectSpec | None = None
    group: UserGroup | None = None
    clamped_emotion: EmotionSample | None = None
    was_clamped: bool = False
    knowledge_mode: str = "ingest"
    base_zone: Zone | None = None
    effective_zone: Zone | None = None
    active: frozenset[SafetyClass] = frozenset()
    restriction: Restriction | None = None
    matrix_key: MatrixKey | None = None
    matrix_entry: MatrixEntry | None = None
    pending_violation: tuple[str, str] | None = None
    violation: tuple[str, str] | None = None
    warnings: list[str] = field(default_factory=list)
    stage_details: dict[str, dict] = field(default_factory=dict)


class _Recorder(TickListener):
    def __init__(self, engine: "DecisionEngine"):
        self.engine = engine
        self.entered: list[str] = []
        self.events: list[dict] = []

    def enter(self, node: Node) -> None:
        self.entered.append(node.name)

    def exit(self, node: Node, status: NodeStatus) -> None:
        self.events.append(self.engine._event_for(node.name, status))


class DecisionEngine:
    """Single-writer decision engine for one household.

    decide() calls are strictly serialized; distinct households get distinct
    engine instances and share nothing mutable.
    """

    def __init__(self, config: PolicyConfig, audit_all: bool = False):
        report = config.validate()
        if not report.ok:
            raise ConfigError("invalid policy configuration:\n" + report.render())
        self.config = config
        self.audit_all = audit_all
        self.fingerprint = config.fingerprint()
        self.tree = self._build_tree()
        validate_tree(self.tree)
        self._board = Blackboard(schema=_BOARD_SCHEMA)
        self._st: _EvalState | None = None
        self._primed = False
        self.cooldowns = CooldownState(scope=config.cooldown_scope)
        self.registry = PersonalRegistry()
        self.reset()

    # -- lifecycle ----------------------------------------------------------

    def reset(self) -> None:
        """Back to the configured initial state (fresh cool-downs, initial
        personal tags, empty blackboard)."""
        self.cooldowns = CooldownState(scope=self.config.cooldown_scope)
        registry = PersonalRegistry()
        for tag in self.config.personal_tags:
            registry.tag_personal(self.config.admin, tag.tagged_by, tag.object_id)
            for grantee in sorted(tag.grants):
                registry.grant_access(tag.tagged_by, tag.object_id, grantee)
        self.registry = registry
        self._board = Blackboard(schema=_BOARD_SCHEMA)
        self._primed = False

    def restore_state(self, pre_state: dict) -> None:
        self.cooldowns = CooldownState.restore(pre_state["cooldowns"])
        self.registry = PersonalRegistry.restore(pre_state["personal_registry"])
        self._board = Blackboard(schema=_BOARD_SCHEMA)
        # Whether a prior request already primed the blackboard is session
        # state: it decides ingest-vs-refresh, so replays must restore it.
        self._primed = bool(pre_state.get("board_primed", False))

    # -- registry operations (scenario events) -------------------------------

    def apply_tag(self, actor: str, object_id: str) -> None:
        if self.config.object_by_id(object_id) is None:
            raise ConfigError(f"cannot tag unknown object {object_id!r}")
        self.registry.tag_personal(self.config.admin, actor, object_id)

    def apply_grant(self, actor: str, object_id: str, grantee: str) -> None:
        user = self.config.user_by_id(grantee)
        if user is None:
            raise ConfigError(f"cannot grant to unregistered user {grantee!r}")
        if user.age_years < MIN_ELIGIBLE_AGE:
            raise PermissionDeniedError(f"grantee {grantee!r} is under the minimum age")
        self.registry.grant_access(actor, object_id, grantee)

    # -- tree construction ----------------------------------------------------

    def _build_tree(self) -> Node:
        gates = [
            ("eligibility_gate", "eligibility", self._eval_eligibility),
            ("ordering_check", "ordering", self._eval_ordering),
            ("emotion_check", "emotion", self._eval_emotion),
            ("category_context_check", "category_context", self._eval_category_context),
            ("personal_check", "personal", self._eval_personal),
        ]
        children: list[Node] = [
            Action("knowledge_check", self._do_knowledge),
            Action("blackboard_update", self._do_blackboard_update),
        ]
        for gate_name, stage, eval_fn in gates:
            children.append(
                Fallback(
                    gate_name,
                    [
                        Condition(f"{stage}_ok", self._stage_predicate(stage, eval_fn)),
                        Action(f"{stage}_violation", self._stage_violation()),
                    ],
                )
            )
        children.append(Action("accept", lambda board: SUCCESS))
        return Repeat("per_request", Sequence("decision_sequence", children))

    def _stage_predicate(self, stage: str, eval_fn):
        def predicate(view) -> bool:
            ok, details, violation = eval_fn(view)
            st = self._st
            st.stage_details[stage] = details
            if not ok:
                st.pending_violation = violation
            return ok

        return predicate

    def _stage_violation(self):
        def effect(board) -> NodeStatus:
            st = self._st
            if st.violation is None and st.pending_violation is not None:
                st.violation = st.pending_violation
            st.pending_violation = None
            return FAILURE

        return effect

    # -- leaf effects ----------------------------------------------------------

    def _do_knowledge(self, board: Blackboard) -> NodeStatus:
        st = self._st
        req = st.request
        # The three knowledge keys are always written together, so "the
        # blackboard already holds them" is exactly the primed flag.
        st.knowledge_mode = "refresh" if self._primed else "ingest"
        self._primed = True
        profile = self.config.user_by_id(req.user_id)
        if profile is None:
            st.known_user = False
            st.warnings.append(
                f"unknown user {req.user_id!r}: treated as unknown relationship"
            )
            profile = UserProfile(
                user_id=req.user_id,
                age_years=_ASSUMED_UNKNOWN_AGE,
                relationship=Relationship.UNKNOWN,
                allergies=frozenset(),
                admin_role=AdminRole.NONE,
            )
        else:
            st.known_user = True
        st.profile = profile
        st.obj = self.config.object_by_id(req.object_id)
        st.clamped_emotion, st.was_clamped = req.emotion.clamped()
        if st.was_clamped:
            st.warnings.append("emotion sample outside [-1,1]^2: clamped to the boundary")
        st.base_zone = zone_of(st.clamped_emotion, self.config.zone_table)
        board.write("identity", profile)
        board.write("emotion", st.clamped_emotion)
        board.write("context", req.context)
        return SUCCESS

    def _do_blackboard_update(self, board: Blackboard) -> NodeStatus:
        st = self._st
        board.write("now", st.request.now)
        board.write("cooldown_state", self.cooldowns)
        last = self.cooldowns.last_requested(st.request.user_id)
        if last is None:
            board.remove("last_request")
        else:
            board.write("last_request", last)
        return SUCCESS

    # -- stage evaluators --------------------------------------------------------
    # Each returns (ok, details-for-trace, violation-or-None) and reads its
    # canonical inputs from the blackboard.

    def _eval_eligibility(self, board):
        st = self._st
        profile: UserProfile = board.require("identity")
        details: dict = {
            "user_id": st.request.user_id,
            "known_user": st.known_user,
            "object_id": st.request.object_id,
            "known_object": st.obj is not None,
        }
        if st.obj is None:
            return False, details, ("eligibility", f"unknown object {st.request.object_id!r}")
        st.group = classify_user_group(profile, self.config.region)
        details["group"] = st.group.value
        if st.group is UserGroup.INELIGIBLE:
            return False, details, (
                "eligibility",
                f"requester is under the minimum age of {MIN_ELIGIBLE_AGE}",
            )
        return True, details, None

    def _eval_ordering(self, board):
        st = self._st
        state: CooldownState = board.require("cooldown_state")
        now: Instant = board.require("now")
        st.active = state.active_cooldowns(st.request.user_id, now)
        st.restriction = ordering_restrictions(st.active, st.obj)
        details = {
            "active_cooldowns": sorted(c.value for c in st.active),
            "last_request": state.last_requested(st.request.user_id),
            "vehicle_ban": st.restriction.vehicle_ban,
            "zone_escalation_steps": st.restriction.escalation_steps,
        }
        if st.restriction.vehicle_ban:
            return False, details, (
                "ordering",
                "vehicle-category objects are unavailable during a mind-altering cool-down",
            )
        return True, details, None

    def _eval_emotion(self, board):
        st = self._st
        sample: EmotionSample = board.require("emotion")
        base = zone_of(sample, self.config.zone_table)
        steps = st.restriction.escalation_steps if st.restriction else 0
        st.base_zone = base
        st.effective_zone = escalate(base, steps)
        st.matrix_key = MatrixKey(st.active, st.obj.safety_class, st.effective_zone)
        st.matrix_entry = matrix_lookup(self.config.matrix, st.matrix_key)
        details = {
            "valence": sample.valence,
            "arousal": sample.arousal,
            "clamped": st.was_clamped,
            "base_zone": base.as_str(),
            "escalation_steps": steps,
            "effective_zone": st.effective_zone.as_str(),
            "cooldown_profile": sorted(c.value for c in st.active),
            "request_class": st.obj.safety_class.value,
            "allowed_groups": sorted(g.value for g in st.matrix_entry.allowed_groups),
            "required_checks": sorted(st.matrix_entry.required_checks),
        }
        if st.group not in st.matrix_entry.allowed_groups:
            return False, details, (
                "emotion",
                f"group {st.group.value} may not receive a {st.obj.safety_class.value} "
                f"object in the {st.effective_zone.as_str()} zone",
            )
        return True, details, None

    def _eval_category_context(self, board):
        st = self._st
        context: ContextSnapshot = board.require("context")
        entry = st.matrix_entry
        details: dict = {
            "category": st.obj.category,
            "matrix_checks": sorted(entry.required_checks),
            "room": context.room,
            "adult_present": context.adult_present,
            "verbal_affirmation": context.verbal_affirmation,
        }
        for check in ("verbal_affirmation", "adult_present", "room_appropriate"):
            if check not in entry.required_checks:
                continue
            if check == "verbal_affirmation" and not context.verbal_affirmation:
                details["failed_check"] = check
                return False, details, ("context", "required check failed: verbal_affirmation")
            if check == "adult_present" and not context.adult_present:
                details["failed_check"] = check
                return False, details, ("context", "required check failed: adult_present")
            if check == "room_appropriate" and not self._room_appropriate(st.obj.category, context.room):
                details["failed_check"] = check
                return False, details, ("context", "required check failed: room_appropriate")
        result = category_checks(
            self.config.category_rules, st.obj, st.group, context, st.profile
        )
        if not result.passed:
            details["failed_check"] = result.failed_check
            details["failed_rule_category"] = result.failed_rule_category
            return False, details, (
                "category",
                f"category check failed: {result.failed_check}",
            )
        return True, details, None

    def _room_appropriate(self, category: str, room: str) -> bool:
        # The matrix-level room check defers to whatever rooms the category
        # rules declare; with no declared rooms it passes vacuously.
        for rule in self.config.category_rules:
            if rule.applies_to(category) and rule.appropriate_rooms is not None:
                if room not in rule.appropriate_rooms:
                    return False
        return True

    def _eval_personal(self, board):
        st = self._st
        ok = self.registry.personal_check(st.request.user_id, st.request.object_id)
        details = {
            "object_tagged": self.registry.is_tagged(st.request.object_id),
            "access": "ok" if ok else "denied",
        }
        if not ok:
            # Reason deliberately names no users: explanations must not leak
            # who tagged the object.
            return False, details, ("personal", "personal object, access not granted")
        return True, details, None

    _EVAL_BY_STAGE = {
        "eligibility": _eval_eligibility,
        "ordering": _eval_ordering,
        "emotion": _eval_emotion,
        "category_context": _eval_category_context,
        "personal": _eval_personal,
    }

    # -- trace events -------------------------------------------------------------

    def _event_for(self, node_name: str, status: NodeStatus) -> dict:
        st = self._st
        policy = self._policy_for_node(node_name)
        inputs: dict = {}
        if node_name == "knowledge_check":
            inputs = {
                "mode": st.knowledge_mode,
                "request": st.request.to_dict(),
                "warnings": list(st.warnings),
            }
        elif node_name == "blackboard_update":
            inputs = {
                "now": st.request.now,
                "last_request": self.cooldowns.last_requested(st.request.user_id),
            }
        elif node_name.endswith("_ok"):
            inputs = st.stage_details.get(node_name[: -len("_ok")], {})
        elif node_name.endswith("_violation") and st.violation is not None:
            inputs = {"policy": st.violation[0], "reason": st.violation[1]}
        return {
            "node": node_name,
            "policy": policy,
            "inputs": inputs,
            "outcome": status.value,
        }

    @staticmethod
    def _policy_for_node(node_name: str) -> str:
        if node_name in ("per_request", "decision_sequence"):
            return "structure"
        if node_name in ("knowledge_check", "blackboard_update"):
            return "knowledge"
        if node_name == "accept":
            return "decision"
        for stage in STAGES:
            if node_name.startswith(stage):
                return stage
        return "structure"

    # -- deciding --------------------------------------------------------------

    def decide(self, request: FetchRequest) -> tuple[Decision, DecisionTrace]:
        pre_state = {
            "cooldowns": self.cooldowns.snapshot(),
            "personal_registry": self.registry.snapshot(),
            "board_primed": self._primed,
        }
        st = _EvalState(request=request)
        self._st = st
        recorder = _Recorder(self)
        status = self.tree.tick(self._board, recorder)

        if status is SUCCESS:
            verdict, deciding, reason = ALLOW, "none", "no policy violation"
        else:
            verdict = DENY
            deciding, reason = st.violation or (
                "none",
                "decision tree failed without a recorded violation",
            )
        # Zone.GREEN is falsy (IntEnum 0), so explicit None checks here.
        if st.effective_zone is not None:
            effective_zone = st.effective_zone
        elif st.base_zone is not None:
            effective_zone = st.base_zone
        else:
            effective_zone = Zone.GREEN
        allowed = st.matrix_entry.allowed_groups if st.matrix_entry is not None else frozenset()
        decision = Decision(
            verdict=verdict,
            deciding_policy=deciding,
            reason=reason,
            effective_zone=effective_zone,
            allowed_groups_at_leaf=allowed,
        )

        events = list(recorder.events)
        if self.audit_all and verdict == DENY:
            events.extend(self._audit_events(deciding))

        # Cool-down bookkeeping happens after the verdict; unknown objects
        # have no safety class and leave the state untouched.
        if st.obj is not None:
            if verdict == ALLOW:
                self.cooldowns.on_granted(request.user_id, st.obj, request.now, self.config.durations)
            else:
                self.cooldowns.on_denied(request.user_id, st.obj, request.now, self.config.durations)
        else:
            st.warnings.append("cool-down state untouched: unknown object")

        trace = DecisionTrace(
            request_id=request.request_id,
            config_fingerprint=self.fingerprint,
            audit_all=self.audit_all,
            request=request.to_dict(),
            pre_state=pre_state,
            warnings=list(st.warnings),
            events=events,
            decision=decision,
        )
        self._st = None
        return decision, trace

    def _audit_events(self, deciding_policy: str) -> list[dict]:
        """In audit mode, evaluate the stages after the deciding one purely
        for the record; the verdict is already fixed."""
        deciding_stage = _STAGE_BY_POLICY.get(deciding_policy)
        if deciding_stage is None:
            return []
        start = STAGES.index(deciding_stage) + 1
        events = []
        for stage in STAGES[start:]:
            eval_fn = self._EVAL_BY_STAGE[stage]
            try:
                ok, details, _ = eval_fn(self, self._board.readonly())
                outcome = "success" if ok else "failure"
            except Exception:
                details = {"note": "not evaluable after the deciding violation"}
                outcome = "skipped"
            events.append(
                {
                    "node": f"{stage}_ok",
                    "policy": stage,
                    "inputs": details,
                    "outcome": outcome,
                    "audit": True,
                }
            )
        return events


def build_tree(config: PolicyConfig) -> Node:
    """Build (and validate) the decision tree for a config; ticking it is
    the engine's job, this exists for structural inspection and tests."""
    return DecisionEngine(config).tree


def replay(trace: DecisionTrace, config: PolicyConfig) -> Decision:
    """Re-decide a recorded request from its recorded pre-state.

    Refuses to run when the config fingerprint differs from the trace's;
    anything else would not be an audit."""
    if config.fingerprint() != trace.config_fingerprint:
        raise ReplayError(
            "config fingerprint does not match the trace; replay refused"
        )
    engine = DecisionEngine(config, audit_all=trace.audit_all)
    engine.restore_state(trace.pre_state)
    request = FetchRequest.from_dict(trace.request)
    decision, _ = engine.decide(request)
    return decision


@dataclass
class VerifyResult:
    ok: bool
    mismatches: list[str]
    decision: Decision | None


def verify_trace(trace: DecisionTrace, config: PolicyConfig) -> VerifyResult:
    """Replay and compare everything: final decision, event stream, warnings.

    Any tampering with the recorded snapshots shows up as a mismatch."""
    if config.fingerprint() != trace.config_fingerprint:
        return VerifyResult(False, ["config fingerprint does not match the trace"], None)
    engine = DecisionEngine(config, audit_all=trace.audit_all)
    engine.restore_state(trace.pre_state)
    request = FetchRequest.from_dict(trace.request)
    decision, fresh = engine.decide(request)
    mismatches = []
    if canonical_json(decision.to_dict()) != canonical_json(trace.decision.to_dict()):
        mismatches.append("final decision differs from the recorded decision")
    if fresh.events != trace.events:
        mismatches.append("event stream differs from the recorded events")
    if fresh.warnings != trace.warnings:
        mismatches.append("warnings differ from the recorded warnings")
    return VerifyResult(not mismatches, mismatches, decision)
