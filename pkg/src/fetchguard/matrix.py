"""The allow-matrix and category-level context rules.

The matrix is total: one row for every (cool-down profile, requested safety
class, effective zone) triple, 4 x 3 x 4 = 48 rows. Each row lists the user
groups that may receive the object and the context checks they must clear.
The validator enforces the tightening laws: a worse zone never admits more
groups, and arming another cool-down never admits more groups.

The shipped default derives its cool-down rows from the base (no cool-down)
rows by escalating the zone once per active class that does NOT match the
request class; same-class tightening already happens upstream, where the
ordering stage escalates the effective zone before the lookup.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .emotion import Zone, escalate
from .errors import ConfigError
from .model import (
    CHILD_TIER,
    ContextSnapshot,
    ObjectSpec,
    Report,
    SafetyClass,
    UserGroup,
    UserProfile,
)

MATRIX_CHECKS = ("verbal_affirmation", "adult_present", "room_appropriate")
CATEGORY_CHECKS = ("allergy_screen", "adult_present_for_child_tier", "verbal_affirmation")

ALL_PROFILES: tuple[frozenset[SafetyClass], ...] = (
    frozenset(),
    frozenset({SafetyClass.DANGEROUS}),
    frozenset({SafetyClass.MIND_ALTERING}),
    frozenset({SafetyClass.DANGEROUS, SafetyClass.MIND_ALTERING}),
)
ALL_CLASSES = (SafetyClass.DANGEROUS, SafetyClass.MIND_ALTERING, SafetyClass.NEITHER)
ALL_ZONES = (Zone.GREEN, Zone.YELLOW, Zone.ORANGE, Zone.RED)

ALL_GROUPS = frozenset(g for g in UserGroup if g is not UserGroup.INELIGIBLE)


@dataclass(frozen=True)
class MatrixKey:
    cooldown_profile: frozenset[SafetyClass]
    request_class: SafetyClass
    zone: Zone

    def __post_init__(self):
        object.__setattr__(self, "cooldown_profile", frozenset(self.cooldown_profile))


@dataclass(frozen=True)
class MatrixEntry:
    allowed_groups: frozenset[UserGroup]
    required_checks: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "allowed_groups", frozenset(self.allowed_groups))
        object.__setattr__(self, "required_checks", frozenset(self.required_checks))
        unknown = self.required_checks - set(MATRIX_CHECKS)
        if unknown:
            raise ConfigError(f"unknown matrix checks: {sorted(unknown)}")


Matrix = dict[MatrixKey, MatrixEntry]


@dataclass(frozen=True)
class CategoryRule:
    """Extra context demands attached to an object category ('*' = all)."""

    category: str
    extra_checks: frozenset[str] = frozenset()
    appropriate_rooms: frozenset[str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "extra_checks", frozenset(self.extra_checks))
        if self.appropriate_rooms is not None:
            object.__setattr__(self, "appropriate_rooms", frozenset(self.appropriate_rooms))
        unknown = self.extra_checks - set(CATEGORY_CHECKS)
        if unknown:
            raise ConfigError(f"unknown category checks: {sorted(unknown)}")

    def applies_to(self, category: str) -> bool:
        return self.category == "*" or self.category == category


def _base_entries() -> dict[tuple[SafetyClass, Zone], MatrixEntry]:
    g = UserGroup
    adult_all = frozenset({g.HA, g.FAA, g.FRA})
    return {
        (SafetyClass.NEITHER, Zone.GREEN): MatrixEntry(ALL_GROUPS),
        (SafetyClass.NEITHER, Zone.YELLOW): MatrixEntry(
            frozenset({g.HA, g.HT, g.HC, g.FAA, g.FAT, g.FAC})
        ),
        (SafetyClass.NEITHER, Zone.ORANGE): MatrixEntry(
            frozenset({g.HA, g.HT, g.FAA}), frozenset({"verbal_affirmation"})
        ),
        (SafetyClass.NEITHER, Zone.RED): MatrixEntry(
            frozenset({g.HA}), frozenset({"verbal_affirmation"})
        ),
        (SafetyClass.DANGEROUS, Zone.GREEN): MatrixEntry(adult_all),
        (SafetyClass.DANGEROUS, Zone.YELLOW): MatrixEntry(
            frozenset({g.HA, g.FAA}), frozenset({"verbal_affirmation"})
        ),
        (SafetyClass.DANGEROUS, Zone.ORANGE): MatrixEntry(
            frozenset({g.HA}), frozenset({"verbal_affirmation", "room_appropriate"})
        ),
        (SafetyClass.DANGEROUS, Zone.RED): MatrixEntry(frozenset()),
        (SafetyClass.MIND_ALTERING, Zone.GREEN): MatrixEntry(frozenset({g.HA, g.FAA})),
        (SafetyClass.MIND_ALTERING, Zone.YELLOW): MatrixEntry(
            frozenset({g.HA, g.FAA}), frozenset({"verbal_affirmation"})
        ),
        (SafetyClass.MIND_ALTERING, Zone.ORANGE): MatrixEntry(frozenset()),
        (SafetyClass.MIND_ALTERING, Zone.RED): MatrixEntry(frozenset()),
    }


def default_matrix() -> Matrix:
    """All 48 rows. Cool-down rows reuse the base row at a zone escalated
    once per active class different from the requested class."""
    base = _base_entries()
    matrix: Matrix = {}
    for profile in ALL_PROFILES:
        for cls in ALL_CLASSES:
            cross = len(profile - {cls})
            for zone in ALL_ZONES:
                key = MatrixKey(profile, cls, zone)
                matrix[key] = base[(cls, escalate(zone, cross))]
    return matrix


def matrix_lookup(matrix: Matrix, key: MatrixKey) -> MatrixEntry:
    try:
        return matrix[key]
    except KeyError:
        profile = ",".join(sorted(c.value for c in key.cooldown_profile)) or "none"
        raise ConfigError(
            f"matrix has no row for cooldown={profile} class={key.request_class.value} "
            f"zone={key.zone.as_str()}"
        ) from None


def validate_matrix(matrix: Matrix, severity_order: Sequence[Zone] = ALL_ZONES) -> Report:
    """Totality, zone monotonicity, cool-down monotonicity, no Ineligible,
    and no checks on dead (empty-group) rows."""
    report = Report()
    order = list(severity_order)

    for profile in ALL_PROFILES:
        for cls in ALL_CLASSES:
            for zone in ALL_ZONES:
                if MatrixKey(profile, cls, zone) not in matrix:
                    pname = ",".join(sorted(c.value for c in profile)) or "none"
                    report.add(
                        "missing-key",
                        f"no row for cooldown={pname} class={cls.value} zone={zone.as_str()}",
                    )
    if not report.ok:
        return report

    for key, entry in matrix.items():
        if UserGroup.INELIGIBLE in entry.allowed_groups:
            report.add("ineligible-group", f"row {_key_str(key)} admits the ineligible group")
        if not entry.allowed_groups and entry.required_checks:
            report.add("dead-branch-checks", f"row {_key_str(key)} has checks but no groups")

    for profile in ALL_PROFILES:
        for cls in ALL_CLASSES:
            for i, better in enumerate(order):
                for worse in order[i + 1 :]:
                    got_worse = matrix[MatrixKey(profile, cls, worse)].allowed_groups
                    got_better = matrix[MatrixKey(profile, cls, better)].allowed_groups
                    if not got_worse <= got_better:
                        report.add(
                            "zone-monotonicity",
                            f"{cls.value}/{_profile_str(profile)}: zone {worse.as_str()} admits "
                            f"groups that {better.as_str()} does not",
                        )

    for profile in ALL_PROFILES:
        for extra in (SafetyClass.DANGEROUS, SafetyClass.MIND_ALTERING):
            if extra in profile:
                continue
            bigger = profile | {extra}
            for cls in ALL_CLASSES:
                for zone in ALL_ZONES:
                    with_extra = matrix[MatrixKey(bigger, cls, zone)].allowed_groups
                    without = matrix[MatrixKey(profile, cls, zone)].allowed_groups
                    if not with_extra <= without:
                        report.add(
                            "cooldown-monotonicity",
                            f"adding {extra.value} cool-down enlarges "
                            f"{cls.value}/{zone.as_str()} from profile {_profile_str(profile)}",
                        )
    return report


def _profile_str(profile: frozenset[SafetyClass]) -> str:
    return "{" + ",".join(sorted(c.value for c in profile)) + "}"


def _key_str(key: MatrixKey) -> str:
    return (
        f"(cooldown={_profile_str(key.cooldown_profile)}, class={key.request_class.value}, "
        f"zone={key.zone.as_str()})"
    )


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    failed_check: str | None = None
    failed_rule_category: str | None = None


def category_checks(
    rules: Iterable[CategoryRule],
    obj: ObjectSpec,
    requester_group: UserGroup,
    context: ContextSnapshot,
    requester: UserProfile,
) -> CheckResult:
    """Run every rule that applies to the object's category; the first
    failing check decides. No applicable rules means a vacuous pass."""
    for rule in rules:
        if not rule.applies_to(obj.category):
            continue
        if "allergy_screen" in rule.extra_checks:
            hits = obj.allergen_tags & requester.allergies
            if hits:
                return CheckResult(False, "allergy_screen", rule.category)
        if "adult_present_for_child_tier" in rule.extra_checks:
            if requester_group in CHILD_TIER and not context.adult_present:
                return CheckResult(False, "adult_present_for_child_tier", rule.category)
        if "verbal_affirmation" in rule.extra_checks:
            if not context.verbal_affirmation:
                return CheckResult(False, "verbal_affirmation", rule.category)
        if rule.appropriate_rooms is not None and context.room not in rule.appropriate_rooms:
            return CheckResult(False, "room_appropriate", rule.category)
    return CheckResult(True)
