"""Interactive foraging sessions over the catalog.

A session's current patch is its result page: a ranked list of items.  Every
preference selection widens the pool with embedding neighbors of the cued
items, re-ranks the pool with a blend of similarity and image scent, and
updates the session's diet (cues and items consumed) and access cost (steps,
retrievals, elapsed time).  Sessions record a transcript that replays to a
byte-identical state.
"""

from __future__ import annotations

import json
import uuid
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .catalog import Board, ImageItem
from .features import Cue, color_assignments, tokenize
from .index import VectorIndex, similar_items
from .scent import PreferenceEvent, PreferenceLog, ScentScore, scent_of_image


@dataclass
class Diet:
    """What the session has consumed so far; only ever grows."""

    consumed_cues: Counter = field(default_factory=Counter)
    viewed_items: set[str] = field(default_factory=set)


@dataclass
class AccessCost:
    steps: int = 0
    retrievals: int = 0
    elapsed_ms: int = 0


@dataclass
class ImagePatch:
    """One rectangular region of an image raster with its own color cues."""

    parent: str
    index: int  # 1..rows*cols, row-major
    region: tuple[int, int, int, int]  # x, y, w, h in pixels
    patch_cues: list[Cue] = field(default_factory=list)


@dataclass
class ForagingSession:
    id: str
    user: str
    query: str
    k: int
    alpha: float
    current_patch: list[tuple[str, float]] = field(default_factory=list)
    history: list[tuple[str, int]] = field(default_factory=list)
    diet: Diet = field(default_factory=Diet)
    cost: AccessCost = field(default_factory=AccessCost)
    log: PreferenceLog = field(default_factory=PreferenceLog)
    no_matches: bool = False
    warning: str | None = None
    start_timestamp: int = 0
    last_timestamp: int = 0
    transcript: list[dict] = field(default_factory=list)

    @property
    def phase(self) -> str:
        return "recommended" if any(a.startswith("select") for a, _ in self.history[1:]) else "results"


def _next_timestamp(session: ForagingSession, timestamp: int | None) -> int:
    if timestamp is None:
        return session.last_timestamp + 1
    if timestamp < session.last_timestamp:
        raise ValueError(
            f"timestamp regression: {timestamp} < {session.last_timestamp}"
        )
    return timestamp


def query_matches(items: Iterable[ImageItem], query: str) -> list[tuple[str, float]]:
    """Items matching the query by exact token hits on cue labels or title.

    The score is the fraction of distinct query tokens present; ordering is
    match count descending, then id ascending.
    """
    tokens = set(tokenize(query))
    if not tokens:
        return []
    scored = []
    for item in items:
        haystack = item.cue_labels() | set(tokenize(item.title))
        hits = len(tokens & haystack)
        if hits:
            scored.append((item.id, hits / len(tokens)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored


def start_session(
    user: str,
    query: str,
    index: VectorIndex,
    catalog: Board,
    k: int = 10,
    alpha: float = 0.7,
    *,
    log: PreferenceLog | None = None,
    session_id: str | None = None,
    timestamp: int | None = None,
) -> ForagingSession:
    """Open a session on the top-k query matches; costs start at one step and
    one retrieval.  An unmatched query yields an empty patch with a flag, not
    an error."""
    if not query:
        raise ValueError("query must be nonempty")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ts = 0 if timestamp is None else timestamp
    session = ForagingSession(
        id=session_id or uuid.uuid4().hex[:12],
        user=user,
        query=query,
        k=k,
        alpha=alpha,
        log=log if log is not None else PreferenceLog(),
        start_timestamp=ts,
        last_timestamp=ts,
    )
    patch = query_matches(catalog.items, query)[:k]
    session.current_patch = patch
    session.no_matches = not patch
    session.diet.viewed_items.update(item_id for item_id, _ in patch)
    session.cost.steps = 1
    session.cost.retrievals = 1
    session.history.append(("start", ts))
    session.transcript.append(
        {
            "action": "start",
            "session": session.id,
            "user": user,
            "query": query,
            "k": k,
            "alpha": alpha,
            "timestamp": ts,
            "patch": [[item_id, score] for item_id, score in patch],
        }
    )
    return session


def rank_results(
    candidates: list[tuple[str, float]],
    items: Mapping[str, ImageItem],
    scent_scores: dict[str, ScentScore],
    alpha: float,
    aggregation: str = "mean",
) -> list[tuple[str, float]]:
    """Blend similarity and image scent into one combined score.

    combined = alpha * (sim + 1) / 2 + (1 - alpha) * image_scent / 10, both
    terms normalized to [0, 1].  Sort is combined descending, then similarity
    descending, then id ascending.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    ranked = []
    for item_id, sim in candidates:
        item = items.get(item_id)
        image_scent = scent_of_image(item, scent_scores, aggregation) if item else 0.0
        combined = alpha * (sim + 1.0) / 2.0 + (1.0 - alpha) * image_scent / 10.0
        ranked.append((item_id, combined, sim))
    ranked.sort(key=lambda entry: (-entry[1], -entry[2], entry[0]))
    return [(item_id, combined) for item_id, combined, _ in ranked]


def _cue_category(catalog: Board, cue_label: str) -> str | None:
    # Category of an emitted event: the most common board among carriers,
    # ties to the lexicographically smallest name.
    boards = Counter(
        item.board for item in catalog.items if cue_label in item.cue_labels()
    )
    if not boards:
        return None
    return sorted(boards.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def apply_preference(
    session: ForagingSession,
    cue_label: str,
    index: VectorIndex,
    catalog: Board,
    scent_scores: dict[str, ScentScore],
    k: int | None = None,
    *,
    timestamp: int | None = None,
) -> ForagingSession:
    """Re-retrieve around a selected cue and re-rank into a new patch.

    The candidate pool is the union of neighbors of every current-patch item
    carrying the cue and of all items carrying the cue directly (the direct
    carriers enter at similarity 1.0; duplicates keep the higher value).
    Selecting a cue no item carries is a warned no-op: the patch stays, only
    the step counter moves.
    """
    if not cue_label:
        raise ValueError("cue_label must be nonempty")
    k = session.k if k is None else k
    ts = _next_timestamp(session, timestamp)
    items = catalog.items_by_id()

    carriers = [item for item in catalog.items if cue_label in item.cue_labels()]
    if not carriers:
        session.cost.steps += 1
        session.warning = f"no catalog item carries cue {cue_label!r}"
        session.history.append((f"select:{cue_label}", ts))
        session.last_timestamp = ts
        session.cost.elapsed_ms = ts - session.start_timestamp
        session.transcript.append(
            {
                "action": "select",
                "cue": cue_label,
                "timestamp": ts,
                "patch": [[item_id, score] for item_id, score in session.current_patch],
                "warning": session.warning,
            }
        )
        return session

    pool: dict[str, float] = {}
    for item_id, _ in session.current_patch:
        item = items.get(item_id)
        if item is None or cue_label not in item.cue_labels():
            continue
        if item.indexable and item_id in index.ids:
            for neighbor_id, sim in similar_items(index, item_id, k):
                if sim > pool.get(neighbor_id, -2.0):
                    pool[neighbor_id] = sim
    for item in carriers:
        pool[item.id] = 1.0

    new_patch = rank_results(sorted(pool.items()), items, scent_scores, session.alpha)[:k]
    session.current_patch = new_patch
    session.diet.consumed_cues[cue_label] += 1
    session.diet.viewed_items.update(item_id for item_id, _ in new_patch)
    session.cost.steps += 1
    session.cost.retrievals += 1
    session.warning = None
    session.history.append((f"select:{cue_label}", ts))
    session.last_timestamp = ts
    session.cost.elapsed_ms = ts - session.start_timestamp
    session.log.record(
        PreferenceEvent(
            user=session.user,
            session=session.id,
            cue_label=cue_label,
            category=_cue_category(catalog, cue_label),
            timestamp=ts,
            action="select",
        )
    )
    session.transcript.append(
        {
            "action": "select",
            "cue": cue_label,
            "timestamp": ts,
            "patch": [[item_id, score] for item_id, score in new_patch],
            "warning": None,
        }
    )
    return session


def decompose_patches(
    item: ImageItem,
    rows: int = 3,
    cols: int = 3,
    *,
    color_k: int = 5,
    seed: int = 0,
) -> list[ImagePatch]:
    """Tile the raster into rows x cols rectangles, last row/col absorbing the
    remainder, each carrying color cues for its own region."""
    if item.pixels is None:
        raise ValueError(f"item {item.id!r} has no pixels to decompose")
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    height, width = item.pixels.shape[0], item.pixels.shape[1]
    base_h, base_w = height // rows, width // cols
    if base_h == 0 or base_w == 0:
        raise ValueError(f"raster {width}x{height} too small for a {rows}x{cols} grid")

    patches = []
    for r in range(rows):
        y = r * base_h
        h = height - y if r == rows - 1 else base_h
        for c in range(cols):
            x = c * base_w
            w = width - x if c == cols - 1 else base_w
            region = item.pixels[y : y + h, x : x + w]
            cues = [
                Cue(a.palette_label, "color", a.proportion)
                for a in color_assignments(region, k=color_k, seed=seed)
            ]
            patches.append(
                ImagePatch(
                    parent=item.id,
                    index=r * cols + c + 1,
                    region=(x, y, w, h),
                    patch_cues=cues,
                )
            )
    return patches


def session_metrics(session: ForagingSession) -> tuple[dict, AccessCost]:
    """Diet summary counts plus the current access cost."""
    summary = {
        "distinct_cues": len(session.diet.consumed_cues),
        "total_consumed": sum(session.diet.consumed_cues.values()),
        "items_viewed": len(session.diet.viewed_items),
    }
    return summary, session.cost


def export_transcript(session: ForagingSession) -> str:
    """One JSON line per action, including the patch each action produced."""
    return "\n".join(json.dumps(entry) for entry in session.transcript) + "\n"


def replay_transcript(
    transcript: str,
    index: VectorIndex,
    catalog: Board,
    scent_scores: dict[str, ScentScore],
    *,
    log: PreferenceLog | None = None,
) -> ForagingSession:
    """Re-execute a recorded action sequence against the same catalog.

    The replayed session recomputes every patch; exporting it again yields the
    original transcript byte for byte when the catalog and scores match.
    """
    lines = [line for line in transcript.splitlines() if line.strip()]
    if not lines:
        raise ValueError("transcript is empty")
    head = json.loads(lines[0])
    if head.get("action") != "start":
        raise ValueError("transcript must begin with a start action")
    session = start_session(
        head["user"],
        head["query"],
        index,
        catalog,
        k=head["k"],
        alpha=head["alpha"],
        log=log,
        session_id=head["session"],
        timestamp=head["timestamp"],
    )
    for line in lines[1:]:
        entry = json.loads(line)
        if entry.get("action") != "select":
            raise ValueError(f"unknown transcript action {entry.get('action')!r}")
        apply_preference(
            session,
            entry["cue"],
            index,
            catalog,
            scent_scores,
            timestamp=entry["timestamp"],
        )
    return session
