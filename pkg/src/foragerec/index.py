"""Exact cosine k-nearest-neighbor search over image embedding vectors.

The catalog scale makes a full scan both fast and an oracle for any future
approximate structure, so the index is a plain matrix of unit-normalized
vectors.  It is immutable after build; concurrent queries are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .catalog import EmbeddingVector, ImageItem


@dataclass(frozen=True)
class VectorIndex:
    dim: int
    ids: tuple[str, ...]
    matrix: np.ndarray  # (n, dim), unit rows, float64

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def entries(self) -> list[tuple[str, np.ndarray]]:
        return [(item_id, self.matrix[i]) for i, item_id in enumerate(self.ids)]

    def vector_of(self, item_id: str) -> np.ndarray:
        try:
            return self.matrix[self.ids.index(item_id)]
        except ValueError:
            raise KeyError(f"item {item_id!r} not in index") from None


def _as_vector(value) -> np.ndarray:
    if isinstance(value, EmbeddingVector):
        return value.as_array()
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a one-dimensional vector")
    return arr


def build_index(items: Iterable[ImageItem]) -> VectorIndex:
    """Index every indexable item in input order, storing normalized copies."""
    ids: list[str] = []
    rows: list[np.ndarray] = []
    dim: int | None = None
    for item in items:
        if not item.indexable:
            continue
        vector = item.embedding.as_array()
        if dim is None:
            dim = vector.size
        elif vector.size != dim:
            raise ValueError(
                f"item {item.id!r} has embedding dim {vector.size}, index dim is {dim}"
            )
        norm = np.linalg.norm(vector)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError(f"item {item.id!r} has a zero or non-finite embedding")
        ids.append(item.id)
        rows.append(vector / norm)
    if dim is None:
        raise ValueError("no indexable items")
    seen: set[str] = set()
    for item_id in ids:
        if item_id in seen:
            raise ValueError(f"duplicate item id {item_id!r}")
        seen.add(item_id)
    matrix = np.vstack(rows)
    matrix.setflags(write=False)
    return VectorIndex(dim=dim, ids=tuple(ids), matrix=matrix)


def cosine(a, b) -> float:
    """dot(a, b) / (|a||b|), clamped into [-1, 1] against rounding."""
    va, vb = _as_vector(a), _as_vector(b)
    if va.size != vb.size:
        raise ValueError(f"dimension mismatch: {va.size} vs {vb.size}")
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero vectors")
    value = float(np.dot(va, vb) / (na * nb))
    return max(-1.0, min(1.0, value))


def knn(
    index: VectorIndex,
    query,
    k: int,
    exclude: str | None = None,
) -> list[tuple[str, float]]:
    """Top-min(k, n) entries by similarity descending, ties by id ascending."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q = _as_vector(query)
    if q.size != index.dim:
        raise ValueError(f"query dim {q.size} does not match index dim {index.dim}")
    norm = np.linalg.norm(q)
    if norm == 0.0:
        raise ValueError("query vector has zero norm")
    sims = index.matrix @ (q / norm)
    np.clip(sims, -1.0, 1.0, out=sims)
    ranked = sorted(
        (
            (item_id, float(sim))
            for item_id, sim in zip(index.ids, sims)
            if item_id != exclude
        ),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]


def similar_items(index: VectorIndex, item_id: str, k: int) -> list[tuple[str, float]]:
    """Neighbors of a stored item, excluding the item itself."""
    return knn(index, index.vector_of(item_id), k, exclude=item_id)
