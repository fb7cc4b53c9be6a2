"""Hierarchical admin settings and the personal-object registry.

The policy owner picks who may tag objects personal (the designators). A
tagged object is fetchable only by its tagger and by users the tagger has
explicitly granted. The owner holds no fetch backdoor: privacy outranks
administrative convenience.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PermissionDeniedError, TagConflictError


@dataclass(frozen=True)
class AdminHierarchy:
    owner: str
    designators: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "designators", frozenset(self.designators))

    def all_designators(self) -> frozenset[str]:
        # The owner can always tag, whether or not listed explicitly.
        return self.designators | {self.owner}

    def is_designator(self, user_id: str) -> bool:
        return user_id in self.all_designators()


@dataclass
class PersonalTag:
    tagged_by: str
    grants: set[str] = field(default_factory=set)


class PersonalRegistry:
    """Map of object_id -> (tagger, granted users). First tag wins; only the
    tagger may grant, re-tag or untag."""

    def __init__(self):
        self._tags: dict[str, PersonalTag] = {}

    def tag_personal(self, hierarchy: AdminHierarchy, actor: str, object_id: str) -> None:
        if not hierarchy.is_designator(actor):
            raise PermissionDeniedError(
                f"{actor!r} is not a designator and may not tag objects personal"
            )
        existing = self._tags.get(object_id)
        if existing is not None and existing.tagged_by != actor:
            raise TagConflictError(
                f"object {object_id!r} is already tagged personal by another user"
            )
        # Re-tagging by the same designator resets the grant list.
        self._tags[object_id] = PersonalTag(tagged_by=actor)

    def untag(self, actor: str, object_id: str) -> None:
        existing = self._tags.get(object_id)
        if existing is None:
            return
        if existing.tagged_by != actor:
            raise PermissionDeniedError(f"only the tagger may untag {object_id!r}")
        del self._tags[object_id]

    def grant_access(self, actor: str, object_id: str, grantee: str) -> None:
        existing = self._tags.get(object_id)
        if existing is None or existing.tagged_by != actor:
            raise PermissionDeniedError(
                f"only the user who tagged {object_id!r} may grant access to it"
            )
        existing.grants.add(grantee)

    def personal_check(self, requester: str, object_id: str) -> bool:
        """True iff the object is untagged, tagged by the requester, or the
        requester holds a grant."""
        tag = self._tags.get(object_id)
        if tag is None:
            return True
        return requester == tag.tagged_by or requester in tag.grants

    def is_tagged(self, object_id: str) -> bool:
        return object_id in self._tags

    def tagger_of(self, object_id: str) -> str | None:
        tag = self._tags.get(object_id)
        return tag.tagged_by if tag else None

    def snapshot(self) -> dict:
        return {
            obj: {"tagged_by": tag.tagged_by, "grants": sorted(tag.grants)}
            for obj, tag in sorted(self._tags.items())
        }

    @classmethod
    def restore(cls, snapshot: dict) -> "PersonalRegistry":
        reg = cls()
        for obj, tag in snapshot.items():
            reg._tags[obj] = PersonalTag(tagged_by=tag["tagged_by"], grants=set(tag.get("grants", ())))
        return reg
