"""Per-user request memory and cool-down windows for flagged object classes.

Granting or denying a dangerous object arms a 30-minute window; a
mind-altering object arms a four-hour window. Denials reset the window for
the denied class. While a cool-down is active, same-class requests escalate
the effective emotion zone one step toward Red, and vehicles are flat-out
unavailable during a mind-altering cool-down.

All arithmetic is exact integer seconds on the injected clock.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .model import Instant, ObjectSpec, SafetyClass

DEFAULT_DANGEROUS_COOLDOWN_S = 30 * 60
DEFAULT_MIND_ALTERING_COOLDOWN_S = 4 * 60 * 60

VEHICLE_CATEGORY = "vehicle"

#: State key used when cool-downs are shared household-wide.
HOUSEHOLD_SCOPE_KEY = "__household__"

_FLAGGED = (SafetyClass.DANGEROUS, SafetyClass.MIND_ALTERING)


@dataclass(frozen=True)
class CooldownDurations:
    dangerous: int = DEFAULT_DANGEROUS_COOLDOWN_S
    mind_altering: int = DEFAULT_MIND_ALTERING_COOLDOWN_S

    def __post_init__(self):
        if self.dangerous <= 0 or self.mind_altering <= 0:
            raise ConfigError("cool-down durations must be strictly positive")

    def for_class(self, safety_class: SafetyClass) -> int:
        if safety_class is SafetyClass.DANGEROUS:
            return self.dangerous
        if safety_class is SafetyClass.MIND_ALTERING:
            return self.mind_altering
        raise ValueError("no cool-down duration for class 'neither'")


@dataclass
class _UserRecord:
    last_requested: str | None = None
    active: dict[SafetyClass, Instant] = field(default_factory=dict)


class CooldownState:
    """Tracks last requests and active cool-down expiries.

    Scope is per-user by default; with scope="household" every user shares
    one record. Mutations are serialized by the owning engine instance.
    """

    def __init__(self, scope: str = "user"):
        if scope not in ("user", "household"):
            raise ConfigError(f"cooldown scope must be 'user' or 'household', got {scope!r}")
        self.scope = scope
        self._records: dict[str, _UserRecord] = {}

    def _key(self, user_id: str) -> str:
        return HOUSEHOLD_SCOPE_KEY if self.scope == "household" else user_id

    def _record(self, user_id: str) -> _UserRecord:
        return self._records.setdefault(self._key(user_id), _UserRecord())

    def last_requested(self, user_id: str) -> str | None:
        rec = self._records.get(self._key(user_id))
        return rec.last_requested if rec else None

    def on_granted(
        self, user_id: str, obj: ObjectSpec, now: Instant, durations: CooldownDurations
    ) -> None:
        rec = self._record(user_id)
        rec.last_requested = obj.object_id
        if obj.safety_class in _FLAGGED:
            rec.active[obj.safety_class] = now + durations.for_class(obj.safety_class)

    def on_denied(
        self, user_id: str, obj: ObjectSpec, now: Instant, durations: CooldownDurations
    ) -> None:
        # Denial of a flagged object resets its window to a full duration
        # from now, whether or not one was already running.
        rec = self._record(user_id)
        rec.last_requested = obj.object_id
        if obj.safety_class in _FLAGGED:
            rec.active[obj.safety_class] = now + durations.for_class(obj.safety_class)

    def active_cooldowns(self, user_id: str, now: Instant) -> frozenset[SafetyClass]:
        """Classes whose window is still open (expiry > now); expired entries
        are pruned as a side effect."""
        rec = self._records.get(self._key(user_id))
        if rec is None:
            return frozenset()
        expired = [cls for cls, expiry in rec.active.items() if expiry <= now]
        for cls in expired:
            del rec.active[cls]
        return frozenset(rec.active)

    def expiry(self, user_id: str, safety_class: SafetyClass) -> Instant | None:
        rec = self._records.get(self._key(user_id))
        if rec is None:
            return None
        return rec.active.get(safety_class)

    def snapshot(self) -> dict:
        return {
            "scope": self.scope,
            "users": {
                uid: {
                    "last_requested": rec.last_requested,
                    "active": {cls.value: exp for cls, exp in sorted(rec.active.items(), key=lambda kv: kv[0].value)},
                }
                for uid, rec in sorted(self._records.items())
            },
        }

    @classmethod
    def restore(cls, snapshot: dict) -> "CooldownState":
        state = cls(scope=snapshot.get("scope", "user"))
        for uid, rec in snapshot.get("users", {}).items():
            record = _UserRecord(last_requested=rec.get("last_requested"))
            for cls_name, expiry in rec.get("active", {}).items():
                record.active[SafetyClass(cls_name)] = int(expiry)
            state._records[uid] = record
        return state


@dataclass(frozen=True)
class Restriction:
    """What an active cool-down does to the current request: an absolute
    vehicle ban, or a zone escalation consumed by the allow-matrix stage."""

    vehicle_ban: bool
    escalation_steps: int


def ordering_restrictions(active: frozenset[SafetyClass], request: ObjectSpec) -> Restriction:
    if SafetyClass.MIND_ALTERING in active and request.category == VEHICLE_CATEGORY:
        return Restriction(vehicle_ban=True, escalation_steps=0)
    steps = 1 if request.safety_class in active else 0
    return Restriction(vehicle_ban=False, escalation_steps=steps)
