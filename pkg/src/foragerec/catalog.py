"""Board ingestion, catalog validation, and deterministic dataset splitting.

A board is a named collection of images loaded from a JSON file.  Embeddings
may be inline (one float list per item) or supplied through a binary sidecar
file (magic ``EMB1``, u32 count, u32 dim, then count*dim little-endian f32,
item order matching the JSON).  Items without an embedding are kept but
flagged non-indexable.
"""

from __future__ import annotations

import json
import math
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, BinaryIO

import numpy as np

if TYPE_CHECKING:
    from .features import Cue

EMBEDDING_MAGIC = b"EMB1"


class BoardFormatError(ValueError):
    """Board file could not be parsed.  ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class Violation:
    """One catalog invariant breach; ``item_id`` is None for board-level rules."""

    item_id: str | None
    rule: str
    message: str

    def __str__(self) -> str:
        where = self.item_id if self.item_id is not None else "<board>"
        return f"[{self.rule}] {where}: {self.message}"


class CatalogValidationError(ValueError):
    """Loaded board violates catalog invariants."""

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length real vector; dim is derived from the value tuple."""

    values: tuple[float, ...]

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        if not self.values:
            raise ValueError("embedding must have at least one component")

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(eq=False)
class ImageItem:
    """One catalog image with metadata, optional pixels, and assembled cues.

    ``pixels`` is an (H, W, 3) uint8 array when present.  ``cues`` stays empty
    until the features module fills it.
    """

    id: str
    board: str = ""
    title: str = ""
    description: str = ""
    content_labels: list[tuple[str, float]] = field(default_factory=list)
    pixels: np.ndarray | None = None
    embedding: EmbeddingVector | None = None
    image_file: str | None = None
    cues: list["Cue"] = field(default_factory=list)

    @property
    def indexable(self) -> bool:
        return self.embedding is not None

    def cue_labels(self) -> set[str]:
        return {c.label for c in self.cues}


@dataclass(eq=False)
class Board:
    name: str
    items: list[ImageItem] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.items)

    def items_by_id(self) -> dict[str, ImageItem]:
        return {item.id: item for item in self.items}


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    train_fraction: float


def _round_half_up(x: float) -> int:
    # round() is banker's; splits and scent scaling both use half-up.
    return int(math.floor(x + 0.5))


def validate_catalog(board: Board) -> list[Violation]:
    """Check every catalog invariant; returns violations instead of raising."""
    violations: list[Violation] = []
    if not board.name:
        violations.append(Violation(None, "board.name", "board name is empty"))
    seen: set[str] = set()
    for item in board.items:
        if not item.id:
            violations.append(Violation(item.id, "id.nonempty", "item id is empty"))
            continue
        if item.id in seen:
            violations.append(
                Violation(item.id, "id.unique", f"duplicate item id {item.id!r}")
            )
        seen.add(item.id)
        for label, confidence in item.content_labels:
            if not 0.0 <= confidence <= 1.0:
                violations.append(
                    Violation(
                        item.id,
                        "confidence.range",
                        f"label {label!r} confidence {confidence} outside [0, 1]",
                    )
                )
        if item.embedding is not None:
            if not item.embedding.is_finite():
                violations.append(
                    Violation(
                        item.id, "embedding.finite", "embedding has non-finite values"
                    )
                )
            elif item.embedding.norm == 0.0:
                violations.append(
                    Violation(item.id, "embedding.nonzero", "embedding norm is zero")
                )
        if item.pixels is not None:
            px = item.pixels
            if not (
                isinstance(px, np.ndarray)
                and px.ndim == 3
                and px.shape[2] == 3
                and px.dtype == np.uint8
            ):
                violations.append(
                    Violation(
                        item.id, "pixels.shape", "pixels must be an (H, W, 3) u8 raster"
                    )
                )
    return violations


def _parse_item(raw: dict, board_name: str) -> ImageItem:
    labels = [
        (str(entry["label"]), float(entry["confidence"]))
        for entry in raw.get("content_labels", [])
    ]
    embedding = None
    if raw.get("embedding") is not None:
        embedding = EmbeddingVector(raw["embedding"])
    return ImageItem(
        id=str(raw.get("id", "")),
        board=board_name,
        title=str(raw.get("title", "")),
        description=str(raw.get("description", "")),
        content_labels=labels,
        embedding=embedding,
        image_file=raw.get("image_file"),
    )


def load_board(
    source,
    *,
    embedding_sidecar=None,
    images_root: str | Path | None = None,
) -> Board:
    """Load and validate a board from JSON bytes, a path, or a binary stream.

    ``embedding_sidecar`` (path or stream) supplies embeddings for all items in
    file order and takes precedence over inline vectors.  When ``images_root``
    is given, items with an existing ``image_file`` get their pixels loaded.

    Raises BoardFormatError on malformed JSON (with byte offset) and
    CatalogValidationError when any catalog invariant fails.
    """
    data = _read_bytes(source)
    try:
        raw = json.loads(data.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise BoardFormatError(
            f"malformed board JSON at byte {exc.pos}: {exc.msg}", offset=exc.pos
        ) from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("items"), list):
        raise BoardFormatError("board JSON must be an object with an 'items' list")

    name = str(raw.get("name", ""))
    items = [_parse_item(entry, name) for entry in raw["items"]]

    if embedding_sidecar is not None:
        vectors = read_embedding_sidecar(embedding_sidecar)
        if len(vectors) != len(items):
            raise CatalogValidationError(
                [
                    Violation(
                        None,
                        "sidecar.count",
                        f"sidecar holds {len(vectors)} vectors for {len(items)} items",
                    )
                ]
            )
        for item, vector in zip(items, vectors):
            item.embedding = vector

    board = Board(name=name, items=items)
    violations = validate_catalog(board)
    if violations:
        raise CatalogValidationError(violations)

    if images_root is not None:
        root = Path(images_root)
        for item in items:
            if item.image_file:
                path = root / item.image_file
                if path.exists():
                    item.pixels = load_image_pixels(path)
    return board


def load_image_pixels(path: str | Path) -> np.ndarray:
    """Read an image file as an (H, W, 3) uint8 RGB raster."""
    from PIL import Image

    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def serialize_board(board: Board) -> str:
    """Serialize to the documented board JSON; inverse of load_board."""
    payload = {
        "name": board.name,
        "items": [
            {
                "id": item.id,
                "title": item.title,
                "description": item.description,
                "content_labels": [
                    {"label": label, "confidence": confidence}
                    for label, confidence in item.content_labels
                ],
                "embedding": list(item.embedding.values) if item.embedding else None,
                **({"image_file": item.image_file} if item.image_file else {}),
            }
            for item in board.items
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=False)


def read_embedding_sidecar(source) -> list[EmbeddingVector]:
    """Parse the EMB1 binary sidecar into embedding vectors."""
    data = _read_bytes(source)
    if len(data) < 12 or data[:4] != EMBEDDING_MAGIC:
        raise BoardFormatError("embedding sidecar missing EMB1 magic", offset=0)
    count, dim = struct.unpack_from("<II", data, 4)
    expected = 12 + 4 * count * dim
    if len(data) != expected:
        raise BoardFormatError(
            f"embedding sidecar truncated: expected {expected} bytes, got {len(data)}",
            offset=len(data),
        )
    floats = struct.unpack_from(f"<{count * dim}f", data, 12)
    return [
        EmbeddingVector(floats[i * dim : (i + 1) * dim]) for i in range(count)
    ]


def write_embedding_sidecar(vectors: list[EmbeddingVector], stream: BinaryIO) -> None:
    if not vectors:
        raise ValueError("cannot write an empty sidecar")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise ValueError("sidecar vectors must share one dimension")
    stream.write(EMBEDDING_MAGIC)
    stream.write(struct.pack("<II", len(vectors), dim))
    for vector in vectors:
        stream.write(struct.pack(f"<{dim}f", *vector.values))


def split_dataset(
    board: Board,
    train_fraction: float,
    seed: int,
    *,
    per_category: bool = False,
) -> DatasetSplit:
    """Seeded uniform shuffle then prefix split into train/test id lists.

    |train| = round(train_fraction * N), half-up.  With ``per_category`` the
    split is applied within each item's board group instead of globally.
    """
    if not board.items:
        raise ValueError("cannot split an empty board")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")

    rng = random.Random(seed)
    if per_category:
        groups: dict[str, list[str]] = {}
        for item in board.items:
            groups.setdefault(item.board, []).append(item.id)
        train: list[str] = []
        test: list[str] = []
        for category in sorted(groups):
            ids = groups[category]
            rng.shuffle(ids)
            n_train = _round_half_up(train_fraction * len(ids))
            train.extend(ids[:n_train])
            test.extend(ids[n_train:])
    else:
        ids = [item.id for item in board.items]
        rng.shuffle(ids)
        n_train = _round_half_up(train_fraction * len(ids))
        train, test = ids[:n_train], ids[n_train:]
    return DatasetSplit(
        train=tuple(train), test=tuple(test), seed=seed, train_fraction=train_fraction
    )


def _read_bytes(source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()
