"""Core vocabulary: users, groups, objects, safety classes, context snapshots.

All types are immutable value objects. Instants are integer seconds on the
injected scenario clock; no wall-clock time enters this package.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import ConfigError

Instant = int

MIN_ELIGIBLE_AGE = 5
CHILD_MAX_AGE = 12
TEEN_MIN_AGE = 13
MIN_ADULT_THRESHOLD = 14


class Relationship(enum.Enum):
    HOUSEHOLD = "household"
    FAMILY = "family"
    FRIEND = "friend"
    UNKNOWN = "unknown"


class AdminRole(enum.Enum):
    OWNER = "owner"
    DESIGNATOR = "designator"
    MEMBER = "member"
    NONE = "none"


class SafetyClass(enum.Enum):
    DANGEROUS = "dangerous"
    MIND_ALTERING = "mind_altering"
    NEITHER = "neither"


class UserGroup(enum.Enum):
    HA = "HA"
    HT = "HT"
    HC = "HC"
    FAA = "FAA"
    FAT = "FAT"
    FAC = "FAC"
    FRA = "FRA"
    FRT = "FRT"
    FRC = "FRC"
    U = "U"
    INELIGIBLE = "ineligible"


ADULT_TIER = frozenset({UserGroup.HA, UserGroup.FAA, UserGroup.FRA})
TEEN_TIER = frozenset({UserGroup.HT, UserGroup.FAT, UserGroup.FRT})
CHILD_TIER = frozenset({UserGroup.HC, UserGroup.FAC, UserGroup.FRC})

_GROUP_BY_REL_TIER = {
    (Relationship.HOUSEHOLD, "adult"): UserGroup.HA,
    (Relationship.HOUSEHOLD, "teen"): UserGroup.HT,
    (Relationship.HOUSEHOLD, "child"): UserGroup.HC,
    (Relationship.FAMILY, "adult"): UserGroup.FAA,
    (Relationship.FAMILY, "teen"): UserGroup.FAT,
    (Relationship.FAMILY, "child"): UserGroup.FAC,
    (Relationship.FRIEND, "adult"): UserGroup.FRA,
    (Relationship.FRIEND, "teen"): UserGroup.FRT,
    (Relationship.FRIEND, "child"): UserGroup.FRC,
}


@dataclass(frozen=True)
class Region:
    """Regional age rule. The adult threshold is 19 or 21 in the shipped
    defaults; anything below 14 is rejected outright."""

    name: str
    adult_age_threshold: int

    def __post_init__(self):
        if self.adult_age_threshold < MIN_ADULT_THRESHOLD:
            raise ConfigError(
                f"region {self.name!r}: adult_age_threshold must be >= "
                f"{MIN_ADULT_THRESHOLD}, got {self.adult_age_threshold}"
            )


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    age_years: int
    relationship: Relationship
    allergies: frozenset[str] = frozenset()
    admin_role: AdminRole = AdminRole.NONE

    def __post_init__(self):
        if self.age_years < 0:
            raise ConfigError(f"user {self.user_id!r}: negative age")
        if self.relationship is Relationship.UNKNOWN and self.admin_role is not AdminRole.NONE:
            raise ConfigError(
                f"user {self.user_id!r}: unknown relationship cannot hold an admin role"
            )
        object.__setattr__(self, "allergies", frozenset(self.allergies))


@dataclass(frozen=True)
class ObjectSpec:
    object_id: str
    display_name: str
    safety_class: SafetyClass
    category: str
    allergen_tags: frozenset[str] = frozenset()
    personal_owner: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "allergen_tags", frozenset(self.allergen_tags))


@dataclass(frozen=True)
class ContextSnapshot:
    """What the sensors said last: room, adult presence, and whether the user
    verbally affirmed the intended use."""

    room: str
    adult_present: bool
    verbal_affirmation: bool
    timestamp: Instant = 0


def classify_user_group(profile: UserProfile, region: Region) -> UserGroup:
    """Derive the access group from age and relationship.

    Under-5s are ineligible no matter what; unknown relationships collapse
    to U for every age >= 5. The teen tier runs from 13 up to (but not
    including) the regional adult threshold.
    """
    if profile.age_years < MIN_ELIGIBLE_AGE:
        return UserGroup.INELIGIBLE
    if profile.relationship is Relationship.UNKNOWN:
        return UserGroup.U
    if profile.age_years <= CHILD_MAX_AGE:
        tier = "child"
    elif profile.age_years < region.adult_age_threshold:
        tier = "teen"
    else:
        tier = "adult"
    return _GROUP_BY_REL_TIER[(profile.relationship, tier)]


@dataclass(frozen=True)
class Finding:
    """One validation problem; a clean report is an empty list of these."""

    code: str
    message: str


@dataclass
class Report:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, code: str, message: str) -> None:
        self.findings.append(Finding(code, message))

    def extend(self, other: "Report") -> None:
        self.findings.extend(other.findings)

    def codes(self) -> set[str]:
        return {f.code for f in self.findings}

    def render(self) -> str:
        return "\n".join(f"[{f.code}] {f.message}" for f in self.findings)


def validate_object_catalog(catalog: list[ObjectSpec], users: list[UserProfile]) -> Report:
    """Report duplicate object ids, dangling personal owners, empty categories."""
    report = Report()
    user_ids = {u.user_id for u in users}
    seen: set[str] = set()
    for obj in catalog:
        if obj.object_id in seen:
            report.add("duplicate-object-id", f"object id {obj.object_id!r} appears twice")
        seen.add(obj.object_id)
        if not obj.category:
            report.add("empty-category", f"object {obj.object_id!r} has an empty category")
        if obj.personal_owner is not None and obj.personal_owner not in user_ids:
            report.add(
                "dangling-personal-owner",
                f"object {obj.object_id!r} names unregistered owner {obj.personal_owner!r}",
            )
    return report
