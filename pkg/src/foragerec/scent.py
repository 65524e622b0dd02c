"""Information scent from preference frequencies.

User actions on cues accumulate in an append-only log.  Per-cue frequencies
map onto a 1-10 scale proportionally to the strongest cue in scope (the whole
log under global scope, each category's own maximum under per-category scope),
and reports list the top cues per category in frequency order.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .catalog import ImageItem

ACTIONS = ("select", "hover", "click_image")
DEFAULT_COUNTED_ACTIONS = frozenset({"select"})
SCALE_MIN, SCALE_MAX = 1, 10

AGGREGATIONS = ("mean", "max", "sum")


@dataclass(frozen=True)
class PreferenceEvent:
    user: str
    session: str
    cue_label: str
    category: str | None = None
    timestamp: int = 0
    action: str = "select"

    def __post_init__(self):
        if not self.cue_label:
            raise ValueError("cue_label must be nonempty")
        if self.action not in ACTIONS:
            raise ValueError(f"action must be one of {ACTIONS}, got {self.action!r}")


@dataclass(frozen=True)
class ScentScore:
    cue_label: str
    raw_frequency: int
    scaled: int


@dataclass
class CategoryScents:
    """Ranked rows for one category; ``empty`` flags a category with no events."""

    category: str
    rows: list[tuple[str, ScentScore]] = field(default_factory=list)
    empty: bool = False


@dataclass
class ScentReport:
    scope: str
    categories: list[CategoryScents] = field(default_factory=list)


class PreferenceLog:
    """Append-only event sequence; iteration order is insertion order."""

    def __init__(self, events: Iterable[PreferenceEvent] = ()):
        self.events: list[PreferenceEvent] = []
        self._last_ts: dict[str, int] = {}
        for event in events:
            self.record(event)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[PreferenceEvent]:
        return iter(self.events)

    def record(self, event: PreferenceEvent) -> "PreferenceLog":
        last = self._last_ts.get(event.session)
        if last is not None and event.timestamp < last:
            raise ValueError(
                f"timestamp regression in session {event.session!r}: "
                f"{event.timestamp} < {last}"
            )
        self.events.append(event)
        self._last_ts[event.session] = event.timestamp
        return self

    def to_jsonl(self, stream: IO[str]) -> None:
        for event in self.events:
            stream.write(
                json.dumps(
                    {
                        "user": event.user,
                        "session": event.session,
                        "cue_label": event.cue_label,
                        "category": event.category,
                        "timestamp": event.timestamp,
                        "action": event.action,
                    }
                )
            )
            stream.write("\n")

    @classmethod
    def from_jsonl(cls, stream: IO[str]) -> "PreferenceLog":
        log = cls()
        for line in stream:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            log.record(
                PreferenceEvent(
                    user=raw["user"],
                    session=raw["session"],
                    cue_label=raw["cue_label"],
                    category=raw.get("category"),
                    timestamp=int(raw.get("timestamp", 0)),
                    action=raw.get("action", "select"),
                )
            )
        return log


def record_preference(log: PreferenceLog, event: PreferenceEvent) -> PreferenceLog:
    """Append one event; prior events are never touched."""
    return log.record(event)


def frequencies(
    log: PreferenceLog,
    *,
    category: str | None = None,
    user: str | None = None,
    counted_actions: frozenset[str] = DEFAULT_COUNTED_ACTIONS,
) -> dict[str, int]:
    """Exact per-cue counts of matching events with a counted action."""
    counts: Counter[str] = Counter()
    for event in log:
        if event.action not in counted_actions:
            continue
        if category is not None and event.category != category:
            continue
        if user is not None and event.user != user:
            continue
        counts[event.cue_label] += 1
    return dict(counts)


def scale_scent(freqs: dict[str, int], scope_max: int) -> dict[str, ScentScore]:
    """Map counts onto the 1-10 scale: clamp(round(10 * f / scope_max), 1, 10)."""
    if not freqs:
        raise ValueError("cannot scale an empty frequency map")
    observed_max = max(freqs.values())
    if scope_max < observed_max:
        raise ValueError(
            f"scope_max {scope_max} is below the observed maximum {observed_max}"
        )
    scores = {}
    for cue, freq in freqs.items():
        scaled = int(math.floor(10.0 * freq / scope_max + 0.5))
        scores[cue] = ScentScore(cue, freq, min(SCALE_MAX, max(SCALE_MIN, scaled)))
    return scores


def scent_report(
    log: PreferenceLog,
    categories: list[str],
    top_n: int,
    scope: str = "global",
) -> ScentReport:
    """Top cues per category with scent scores, ordered by frequency.

    Global scope scales every category against the strongest cue anywhere in
    the requested categories; per-category scope uses each category's own
    maximum.  Categories without counted events come back empty and flagged.
    """
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    if scope not in ("global", "per_category"):
        raise ValueError(f"scope must be 'global' or 'per_category', got {scope!r}")
    per_category = {c: frequencies(log, category=c) for c in categories}
    global_max = max(
        (max(freqs.values()) for freqs in per_category.values() if freqs), default=0
    )
    report = ScentReport(scope=scope)
    for category in categories:
        freqs = per_category[category]
        if not freqs:
            report.categories.append(CategoryScents(category, empty=True))
            continue
        scope_max = global_max if scope == "global" else max(freqs.values())
        scores = scale_scent(freqs, scope_max)
        ranked = sorted(freqs.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
        report.categories.append(
            CategoryScents(category, rows=[(cue, scores[cue]) for cue, _ in ranked])
        )
    return report


def scent_of_image(
    item: ImageItem,
    scores: dict[str, ScentScore],
    aggregation: str = "mean",
) -> float:
    """Aggregate the scent of an item's cues; unscored cues contribute 0.

    The default is the mean over all of the item's cues, which keeps the value
    in [0, 10] and guarantees that scoring an additional carried cue never
    lowers the result.  ``max`` and ``sum`` are available behind the flag.
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
    if not item.cues:
        return 0.0
    values = [
        float(scores[cue.label].scaled) if cue.label in scores else 0.0
        for cue in item.cues
    ]
    if aggregation == "mean":
        return sum(values) / len(values)
    if aggregation == "max":
        return max(values)
    return sum(values)


def report_to_dict(report: ScentReport) -> dict:
    """JSON-ready form of a report; ordering mirrors the report itself."""
    return {
        "scope": report.scope,
        "categories": [
            {
                "name": cat.category,
                "empty": cat.empty,
                "rows": [
                    {
                        "rank": i + 1,
                        "preference": label,
                        "frequency": score.raw_frequency,
                        "scent": score.scaled,
                    }
                    for i, (label, score) in enumerate(cat.rows)
                ],
            }
            for cat in report.categories
        ],
    }


def format_report_table(report: ScentReport) -> str:
    """Aligned plain-text table: one rank column, then preference/IS per category.

    Categories lacking events render dashes and are flagged under the table.
    """
    n_rows = max((len(cat.rows) for cat in report.categories), default=0)
    headers = ["Food Categories"]
    for cat in report.categories:
        headers.extend([cat.category, "IS"])
    grid: list[list[str]] = [headers]
    for i in range(n_rows):
        row = [f"R_{i + 1}"]
        for cat in report.categories:
            if i < len(cat.rows):
                label, score = cat.rows[i]
                row.extend([label, str(score.scaled)])
            else:
                row.extend(["-", "-"])
        grid.append(row)

    widths = [max(len(row[c]) for row in grid) for c in range(len(headers))]
    lines = []
    for r, row in enumerate(grid):
        cells = []
        for c, cell in enumerate(row):
            if c == 0 or c % 2 == 1:
                cells.append(cell.ljust(widths[c]))
            else:
                cells.append(cell.rjust(widths[c]))
        lines.append(" | ".join(cells).rstrip())
        if r == 0:
            lines.append("-+-".join("-" * w for w in widths))
    for cat in report.categories:
        if cat.empty:
            lines.append(f"(no counted events for category {cat.category!r})")
    return "\n".join(lines)
