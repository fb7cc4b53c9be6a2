"""PolicyConfig: the entire tunable surface, its JSON form and its validators.

The file format is plain JSON. The fingerprint is the SHA-256 of the
canonicalized content (sorted keys, no whitespace), so formatting changes do
not break trace replay but any semantic edit does.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .emotion import Zone, ZoneRect, ZoneTable, default_zone_table, validate_zone_table
from .errors import ConfigError
from .matrix import (
    CategoryRule,
    Matrix,
    MatrixEntry,
    MatrixKey,
    default_matrix,
    validate_matrix,
)
from .model import (
    AdminRole,
    MIN_ELIGIBLE_AGE,
    ObjectSpec,
    Region,
    Relationship,
    Report,
    SafetyClass,
    UserGroup,
    UserProfile,
    validate_object_catalog,
)
from .ordering import CooldownDurations
from .privacy import AdminHierarchy


@dataclass(frozen=True)
class InitialTag:
    object_id: str
    tagged_by: str
    grants: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "grants", frozenset(self.grants))


@dataclass
class PolicyConfig:
    region: Region
    durations: CooldownDurations
    cooldown_scope: str
    zone_table: ZoneTable
    matrix: Matrix
    category_rules: list[CategoryRule]
    objects: list[ObjectSpec]
    users: list[UserProfile]
    admin: AdminHierarchy
    personal_tags: list[InitialTag] = field(default_factory=list)

    _validation_cache: Report | None = field(default=None, repr=False, compare=False)

    def object_by_id(self, object_id: str) -> ObjectSpec | None:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        return None

    def user_by_id(self, user_id: str) -> UserProfile | None:
        for user in self.users:
            if user.user_id == user_id:
                return user
        return None

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "region": {"name": self.region.name, "adult_age_threshold": self.region.adult_age_threshold},
            "durations": {
                "dangerous_s": self.durations.dangerous,
                "mind_altering_s": self.durations.mind_altering,
            },
            "cooldown_scope": self.cooldown_scope,
            "zone_table": [
                {
                    "zone": r.zone.as_str(),
                    "v_lo": r.v_lo,
                    "v_hi": r.v_hi,
                    "a_lo": r.a_lo,
                    "a_hi": r.a_hi,
                }
                for r in self.zone_table.rects
            ],
            "matrix": [
                {
                    "cooldown": sorted(c.value for c in key.cooldown_profile),
                    "request_class": key.request_class.value,
                    "zone": key.zone.as_str(),
                    "allowed_groups": sorted(g.value for g in entry.allowed_groups),
                    "required_checks": sorted(entry.required_checks),
                }
                for key, entry in sorted(
                    self.matrix.items(),
                    key=lambda kv: (
                        sorted(c.value for c in kv[0].cooldown_profile),
                        kv[0].request_class.value,
                        int(kv[0].zone),
                    ),
                )
            ],
            "category_rules": [
                {
                    "category": r.category,
                    "extra_checks": sorted(r.extra_checks),
                    "appropriate_rooms": sorted(r.appropriate_rooms)
                    if r.appropriate_rooms is not None
                    else None,
                }
                for r in self.category_rules
            ],
            "objects": [
                {
                    "object_id": o.object_id,
                    "display_name": o.display_name,
                    "safety_class": o.safety_class.value,
                    "category": o.category,
                    "allergen_tags": sorted(o.allergen_tags),
                    "personal_owner": o.personal_owner,
                }
                for o in self.objects
            ],
            "users": [
                {
                    "user_id": u.user_id,
                    "age_years": u.age_years,
                    "relationship": u.relationship.value,
                    "allergies": sorted(u.allergies),
                    "admin_role": u.admin_role.value,
                }
                for u in self.users
            ],
            "admin": {"owner": self.admin.owner, "designators": sorted(self.admin.designators)},
            "personal_tags": [
                {"object_id": t.object_id, "tagged_by": t.tagged_by, "grants": sorted(t.grants)}
                for t in self.personal_tags
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolicyConfig":
        try:
            return cls._from_dict(data)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed policy config: {exc}") from exc

    @classmethod
    def _from_dict(cls, data: dict) -> "PolicyConfig":
        region = Region(
            name=str(data["region"]["name"]),
            adult_age_threshold=int(data["region"]["adult_age_threshold"]),
        )
        durations = CooldownDurations(
            dangerous=int(data["durations"]["dangerous_s"]),
            mind_altering=int(data["durations"]["mind_altering_s"]),
        )
        scope = data.get("cooldown_scope", "user")
        rects = tuple(
            ZoneRect(
                zone=Zone.from_str(r["zone"]),
                v_lo=float(r["v_lo"]),
                v_hi=float(r["v_hi"]),
                a_lo=float(r["a_lo"]),
                a_hi=float(r["a_hi"]),
            )
            for r in data["zone_table"]
        )
        matrix: Matrix = {}
        for row in data["matrix"]:
            key = MatrixKey(
                cooldown_profile=frozenset(SafetyClass(c) for c in row["cooldown"]),
                request_class=SafetyClass(row["request_class"]),
                zone=Zone.from_str(row["zone"]),
            )
            if key in matrix:
                raise ConfigError(f"duplicate matrix row: {row}")
            matrix[key] = MatrixEntry(
                allowed_groups=frozenset(UserGroup(g) for g in row["allowed_groups"]),
                required_checks=frozenset(row["required_checks"]),
            )
        rules = [
            CategoryRule(
                category=str(r["category"]),
                extra_checks=frozenset(r.get("extra_checks", ())),
                appropriate_rooms=frozenset(r["appropriate_rooms"])
                if r.get("appropriate_rooms") is not None
                else None,
            )
            for r in data.get("category_rules", ())
        ]
        objects = [
            ObjectSpec(
                object_id=str(o["object_id"]),
                display_name=str(o.get("display_name", o["object_id"])),
                safety_class=SafetyClass(o["safety_class"]),
                category=str(o["category"]),
                allergen_tags=frozenset(o.get("allergen_tags", ())),
                personal_owner=o.get("personal_owner"),
            )
            for o in data["objects"]
        ]
        users = [
            UserProfile(
                user_id=str(u["user_id"]),
                age_years=int(u["age_years"]),
                relationship=Relationship(u["relationship"]),
                allergies=frozenset(u.get("allergies", ())),
                admin_role=AdminRole(u.get("admin_role", "none")),
            )
            for u in data["users"]
        ]
        admin = AdminHierarchy(
            owner=str(data["admin"]["owner"]),
            designators=frozenset(data["admin"].get("designators", ())),
        )
        tags = [
            InitialTag(
                object_id=str(t["object_id"]),
                tagged_by=str(t["tagged_by"]),
                grants=frozenset(t.get("grants", ())),
            )
            for t in data.get("personal_tags", ())
        ]
        return cls(
            region=region,
            durations=durations,
            cooldown_scope=scope,
            zone_table=ZoneTable(rects=rects),
            matrix=matrix,
            category_rules=rules,
            objects=objects,
            users=users,
            admin=admin,
            personal_tags=tags,
        )

    @classmethod
    def load(cls, path: str | Path) -> "PolicyConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"cannot parse {path}: {exc}") from exc
        return cls.from_dict(data)

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    # -- validation --------------------------------------------------------

    def validate(self) -> Report:
        """All validators, memoized per instance (the config is immutable in
        spirit; mutate-and-revalidate callers should build a fresh one)."""
        if self._validation_cache is not None:
            return self._validation_cache
        report = Report()
        report.extend(validate_zone_table(self.zone_table))
        report.extend(validate_matrix(self.matrix))
        report.extend(validate_object_catalog(self.objects, self.users))
        report.extend(self._validate_roster())
        report.extend(self._validate_rules())
        report.extend(self._validate_admin_and_tags())
        if self.cooldown_scope not in ("user", "household"):
            report.add("bad-scope", f"cooldown_scope must be 'user' or 'household', got {self.cooldown_scope!r}")
        self._validation_cache = report
        return report

    def _validate_roster(self) -> Report:
        report = Report()
        seen: set[str] = set()
        for user in self.users:
            if user.user_id in seen:
                report.add("duplicate-user-id", f"user id {user.user_id!r} appears twice")
            seen.add(user.user_id)
        return report

    def _validate_rules(self) -> Report:
        report = Report()
        categories = {o.category for o in self.objects}
        for rule in self.category_rules:
            if rule.category != "*" and rule.category not in categories:
                report.add(
                    "unknown-rule-category",
                    f"category rule {rule.category!r} matches no object in the catalog",
                )
        return report

    def _validate_admin_and_tags(self) -> Report:
        report = Report()
        users = {u.user_id: u for u in self.users}
        if self.admin.owner not in users:
            report.add("unknown-owner", f"admin owner {self.admin.owner!r} is not registered")
        for d in self.admin.designators:
            u = users.get(d)
            if u is None:
                report.add("unknown-designator", f"designator {d!r} is not registered")
            elif u.relationship is not Relationship.HOUSEHOLD:
                report.add(
                    "non-household-designator",
                    f"designator {d!r} is not a household user",
                )
        object_ids = {o.object_id for o in self.objects}
        designators = self.admin.all_designators()
        for tag in self.personal_tags:
            if tag.object_id not in object_ids:
                report.add("unknown-tagged-object", f"tagged object {tag.object_id!r} not in catalog")
            if tag.tagged_by not in designators:
                report.add(
                    "tagger-not-designator",
                    f"{tag.tagged_by!r} tagged {tag.object_id!r} but is not a designator",
                )
            for grantee in tag.grants:
                u = users.get(grantee)
                if u is None:
                    report.add("unknown-grantee", f"grantee {grantee!r} is not registered")
                elif u.age_years < MIN_ELIGIBLE_AGE:
                    report.add(
                        "ineligible-grantee",
                        f"grantee {grantee!r} is under the minimum age",
                    )
        return report


def default_config() -> PolicyConfig:
    """The shipped household: a small catalog and roster exercising every
    policy surface, with the default zone table and allow-matrix."""
    users = [
        UserProfile("alice", 34, Relationship.HOUSEHOLD, frozenset(), AdminRole.OWNER),
        UserProfile("bob", 15, Relationship.HOUSEHOLD, frozenset(), AdminRole.MEMBER),
        UserProfile("carol", 8, Relationship.HOUSEHOLD, frozenset({"peanut"}), AdminRole.MEMBER),
        UserProfile("dave", 4, Relationship.HOUSEHOLD, frozenset(), AdminRole.MEMBER),
        UserProfile("erin", 40, Relationship.FAMILY, frozenset(), AdminRole.NONE),
        UserProfile("grace", 30, Relationship.FRIEND, frozenset(), AdminRole.NONE),
        UserProfile("henry", 62, Relationship.HOUSEHOLD, frozenset(), AdminRole.DESIGNATOR),
    ]
    objects = [
        ObjectSpec("knife", "Chef's knife", SafetyClass.DANGEROUS, "kitchen"),
        ObjectSpec("sleeping_pills", "Sleeping pills", SafetyClass.MIND_ALTERING, "medicine"),
        ObjectSpec("cough_syrup", "Cough syrup", SafetyClass.MIND_ALTERING, "medicine"),
        ObjectSpec("car_keys", "Car keys", SafetyClass.NEITHER, "vehicle"),
        ObjectSpec("towel", "Bath towel", SafetyClass.NEITHER, "bathroom"),
        ObjectSpec("toy_block", "Toy block", SafetyClass.NEITHER, "toy"),
        ObjectSpec(
            "peanut_butter",
            "Peanut butter jar",
            SafetyClass.NEITHER,
            "food",
            frozenset({"peanut"}),
        ),
        ObjectSpec("safety_scissors", "Safety scissors", SafetyClass.NEITHER, "craft"),
        ObjectSpec("diary", "Diary", SafetyClass.NEITHER, "stationery", personal_owner="alice"),
    ]
    rules = [
        CategoryRule("medicine", frozenset({"allergy_screen", "verbal_affirmation"})),
        CategoryRule("food", frozenset({"allergy_screen"})),
        CategoryRule("craft", frozenset({"adult_present_for_child_tier"})),
        CategoryRule("kitchen", frozenset(), frozenset({"kitchen"})),
        CategoryRule("vehicle", frozenset({"verbal_affirmation"})),
    ]
    return PolicyConfig(
        region=Region("canada", 19),
        durations=CooldownDurations(),
        cooldown_scope="user",
        zone_table=default_zone_table(),
        matrix=default_matrix(),
        category_rules=rules,
        objects=objects,
        users=users,
        admin=AdminHierarchy(owner="alice", designators=frozenset({"alice", "henry"})),
        personal_tags=[InitialTag("diary", "alice")],
    )
