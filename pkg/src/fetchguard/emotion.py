"""Valence/arousal samples and the priority-ordered rectangle zone table.

A zone table is an ordered list of closed rectangles over [-1,1]^2; the first
rectangle containing a sample wins, so earlier entries shadow later ones. The
shipped default puts Red on the negative/high-arousal corner (extreme anger),
Orange on the negative/low-arousal corner (extreme sadness), Green on the
whole non-negative-valence half, and Yellow on the remaining negative band.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import EvaluationError
from .model import Report

SWEEP_RESOLUTION = 0.01


class Zone(enum.IntEnum):
    """Severity bands, totally ordered: Green < Yellow < Orange < Red."""

    GREEN = 0
    YELLOW = 1
    ORANGE = 2
    RED = 3

    def as_str(self) -> str:
        return self.name.lower()

    @classmethod
    def from_str(cls, s: str) -> "Zone":
        try:
            return cls[s.upper()]
        except KeyError:
            raise ValueError(f"unknown zone {s!r}") from None


def escalate(zone: Zone, steps: int) -> Zone:
    """Move a zone `steps` toward Red, saturating at Red."""
    return Zone(min(int(Zone.RED), int(zone) + max(0, steps)))


@dataclass(frozen=True)
class EmotionSample:
    valence: float
    arousal: float

    def clamped(self) -> tuple["EmotionSample", bool]:
        """Pull the sample into [-1,1]^2.

        Non-finite coordinates clamp to the most cautious corner (valence -1,
        arousal +1): out-of-range sensor data must never crash or soften a
        decision. Returns (sample, whether anything changed).
        """
        v = -1.0 if math.isnan(self.valence) else min(1.0, max(-1.0, self.valence))
        a = 1.0 if math.isnan(self.arousal) else min(1.0, max(-1.0, self.arousal))
        changed = not (v == self.valence and a == self.arousal)
        return EmotionSample(v, a), changed


@dataclass(frozen=True)
class ZoneRect:
    zone: Zone
    v_lo: float
    v_hi: float
    a_lo: float
    a_hi: float

    def contains(self, v: float, a: float) -> bool:
        return self.v_lo <= v <= self.v_hi and self.a_lo <= a <= self.a_hi


@dataclass(frozen=True)
class ZoneTable:
    rects: tuple[ZoneRect, ...]


def default_zone_table() -> ZoneTable:
    # Listed in priority order; Green before Yellow keeps every interval
    # closed while still giving Green all of v >= 0.
    return ZoneTable(
        rects=(
            ZoneRect(Zone.RED, -1.0, -0.5, 0.5, 1.0),
            ZoneRect(Zone.ORANGE, -1.0, -0.5, -1.0, -0.5),
            ZoneRect(Zone.GREEN, 0.0, 1.0, -1.0, 1.0),
            ZoneRect(Zone.YELLOW, -1.0, 0.0, -1.0, 1.0),
        )
    )


def zone_of(sample: EmotionSample, table: ZoneTable) -> Zone:
    """First-match lookup. Raises EvaluationError on a coverage hole."""
    for rect in table.rects:
        if rect.contains(sample.valence, sample.arousal):
            return rect.zone
    raise EvaluationError(
        f"no zone covers point (v={sample.valence}, a={sample.arousal})"
    )


def validate_zone_table(table: ZoneTable) -> Report:
    """Sweep [-1,1]^2 at 0.01 resolution; report the first uncovered point.

    Also flags inverted or out-of-bounds intervals.
    """
    report = Report()
    for i, rect in enumerate(table.rects):
        if rect.v_lo > rect.v_hi or rect.a_lo > rect.a_hi:
            report.add("inverted-interval", f"rect #{i} ({rect.zone.as_str()}): lo > hi")
        if not (-1.0 <= rect.v_lo and rect.v_hi <= 1.0 and -1.0 <= rect.a_lo and rect.a_hi <= 1.0):
            report.add("out-of-bounds", f"rect #{i} ({rect.zone.as_str()}): exceeds [-1,1]")
    if not report.ok:
        return report

    steps = round(2.0 / SWEEP_RESOLUTION)
    for iv in range(steps + 1):
        v = -1.0 + iv * SWEEP_RESOLUTION
        for ia in range(steps + 1):
            a = -1.0 + ia * SWEEP_RESOLUTION
            if not any(r.contains(v, a) for r in table.rects):
                report.add("uncovered-point", f"no zone covers (v={v:.2f}, a={a:.2f})")
                return report
    return report
