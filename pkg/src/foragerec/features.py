"""Cue extraction from image pixels and text.

Three feature channels feed the cue list of an item: dominant colors from
k-means clustering mapped onto the 16 basic HTML color names, cleaned keyword
counts from title and description, and precomputed content labels.  A small
multinomial Naive Bayes categorizer tags documents with a board category.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .catalog import ImageItem

# HTML 4.01 basic colors; listed order breaks nearest-color ties.
PALETTE: tuple[tuple[str, tuple[int, int, int]], ...] = (
    ("black", (0, 0, 0)),
    ("silver", (192, 192, 192)),
    ("gray", (128, 128, 128)),
    ("white", (255, 255, 255)),
    ("maroon", (128, 0, 0)),
    ("red", (255, 0, 0)),
    ("purple", (128, 0, 128)),
    ("fuchsia", (255, 0, 255)),
    ("green", (0, 128, 0)),
    ("lime", (0, 255, 0)),
    ("olive", (128, 128, 0)),
    ("yellow", (255, 255, 0)),
    ("navy", (0, 0, 128)),
    ("blue", (0, 0, 255)),
    ("teal", (0, 128, 128)),
    ("aqua", (0, 255, 255)),
)

CUE_SOURCES = ("content", "color", "keyword", "user")

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class Cue:
    """A selectable visual bookmark attached to an image."""

    label: str
    source: str
    weight: float

    def __post_init__(self):
        if not self.label:
            raise ValueError("cue label must be nonempty")
        if not self.source:
            raise ValueError("cue source must be nonempty")
        if not math.isfinite(self.weight) or self.weight < 0:
            raise ValueError(f"cue weight must be finite and >= 0, got {self.weight}")


@dataclass(frozen=True)
class ColorAssignment:
    palette_label: str
    proportion: float


@dataclass
class KeywordProfile:
    """Cleaned token counts for one document."""

    counts: dict[str, int] = field(default_factory=dict)

    def total(self) -> int:
        return sum(self.counts.values())

    def merged(self, other: "KeywordProfile") -> "KeywordProfile":
        merged = Counter(self.counts)
        merged.update(other.counts)
        return KeywordProfile(dict(merged))


@dataclass
class NaiveBayesModel:
    categories: list[str]
    log_priors: dict[str, float]
    log_likelihoods: dict[str, dict[str, float]]
    log_unknown: dict[str, float]
    vocabulary: frozenset[str]
    smoothing: float


def nearest_palette_label(rgb) -> str:
    """Label of the Euclidean-nearest basic color; ties go to earlier entries."""
    r, g, b = rgb
    for component in (r, g, b):
        if not 0 <= component <= 255:
            raise ValueError(f"RGB components must be in [0, 255], got {rgb}")
    best_label = PALETTE[0][0]
    best_dist = math.inf
    for label, (pr, pg, pb) in PALETTE:
        dist = (r - pr) ** 2 + (g - pg) ** 2 + (b - pb) ** 2
        if dist < best_dist:
            best_label = label
            best_dist = dist
    return best_label


def _as_pixel_matrix(pixels) -> np.ndarray:
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 3:
        arr = arr.reshape(-1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
        raise ValueError("pixels must be a nonempty raster of RGB triples")
    return arr


def kmeans_colors(
    pixels,
    k: int = 5,
    seed: int = 0,
    max_iters: int = 50,
) -> list[tuple[tuple[float, float, float], float]]:
    """Cluster pixel colors; returns (centroid, proportion) by falling share.

    Initialization is seeded farthest-point over the distinct colors (first
    centroid random, each next the color farthest from the chosen set), so the
    result is deterministic given the seed.  Lloyd iterations run until the
    assignment stabilizes or ``max_iters`` is hit; empty clusters are dropped.
    On a stable assignment the output is a fixed point: every pixel sits with
    its nearest centroid and each centroid is the mean of its pixels.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    points = _as_pixel_matrix(pixels)
    distinct = np.unique(points, axis=0)
    k_eff = min(k, len(distinct))

    rng = np.random.default_rng(seed)
    first = int(rng.integers(len(distinct)))
    chosen = [first]
    min_dist = ((distinct - distinct[first]) ** 2).sum(axis=1)
    while len(chosen) < k_eff:
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        min_dist = np.minimum(min_dist, ((distinct - distinct[nxt]) ** 2).sum(axis=1))
    centroids = distinct[chosen].copy()

    assignment = None
    for _ in range(max_iters):
        dists = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = dists.argmin(axis=1)
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        present = np.unique(new_assignment)
        centroids = np.stack(
            [points[new_assignment == label].mean(axis=0) for label in present]
        )
        # relabel into 0..len(present)-1 so iterations stay comparable
        assignment = np.searchsorted(present, new_assignment)

    counts = np.bincount(assignment, minlength=len(centroids))
    total = int(counts.sum())
    results = [
        ((float(c[0]), float(c[1]), float(c[2])), int(n) / total)
        for c, n in zip(centroids, counts)
    ]
    results.sort(key=lambda entry: (-entry[1], entry[0]))
    return results


def color_assignments(
    pixels, k: int = 5, seed: int = 0, max_iters: int = 50
) -> list[ColorAssignment]:
    """Palette shares of an image: cluster, name each centroid, sum per name."""
    shares: dict[str, float] = {}
    for centroid, proportion in kmeans_colors(pixels, k=k, seed=seed, max_iters=max_iters):
        label = nearest_palette_label(centroid)
        shares[label] = shares.get(label, 0.0) + proportion
    ordered = sorted(shares.items(), key=lambda kv: (-kv[1], kv[0]))
    return [ColorAssignment(label, proportion) for label, proportion in ordered]


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on non-alphanumeric runs (underscore separates)."""
    return _TOKEN_RE.findall(text.lower())


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """One token per line, UTF-8; defaults to the shipped English list."""
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = (
            resources.files("foragerec").joinpath("data/stopwords.txt").read_text("utf-8")
        )
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def extract_keywords(
    title: str,
    description: str,
    stopwords: frozenset[str] | None = None,
) -> KeywordProfile:
    """Exact cleaned keyword counts over title plus description.

    Cleaning: lowercase, split on non-alphanumeric runs, drop stopwords and
    tokens shorter than two characters.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    counts: Counter[str] = Counter()
    for token in tokenize(f"{title} {description}"):
        if len(token) < 2 or token in stopwords:
            continue
        counts[token] += 1
    return KeywordProfile(dict(counts))


def train_naive_bayes(
    docs: list[tuple[KeywordProfile, str]],
    smoothing: float = 1.0,
) -> NaiveBayesModel:
    """Multinomial Naive Bayes with Laplace-style smoothing.

    log_prior(c) = log(n_c / n); log_likelihood(t|c) = log((count(t,c) + a) /
    (total(c) + a * |V|)).  Tokens outside the vocabulary get the smoothed
    zero-count likelihood of each category.
    """
    if smoothing <= 0:
        raise ValueError(f"smoothing must be positive, got {smoothing}")
    if not docs:
        raise ValueError("training corpus is empty")
    categories = sorted({category for _, category in docs})
    if len(categories) < 2:
        raise ValueError("training needs at least two categories")

    doc_counts = Counter(category for _, category in docs)
    token_counts: dict[str, Counter[str]] = {c: Counter() for c in categories}
    vocabulary: set[str] = set()
    for profile, category in docs:
        token_counts[category].update(profile.counts)
        vocabulary.update(profile.counts)

    n_docs = len(docs)
    vocab_size = len(vocabulary)
    log_priors = {c: math.log(doc_counts[c] / n_docs) for c in categories}
    log_likelihoods: dict[str, dict[str, float]] = {}
    log_unknown: dict[str, float] = {}
    for category in categories:
        total = sum(token_counts[category].values())
        denom = total + smoothing * vocab_size
        log_likelihoods[category] = {
            token: math.log((token_counts[category][token] + smoothing) / denom)
            for token in vocabulary
        }
        log_unknown[category] = math.log(smoothing / denom)
    return NaiveBayesModel(
        categories=categories,
        log_priors=log_priors,
        log_likelihoods=log_likelihoods,
        log_unknown=log_unknown,
        vocabulary=frozenset(vocabulary),
        smoothing=smoothing,
    )


def classify(
    model: NaiveBayesModel, doc: KeywordProfile
) -> tuple[str, dict[str, float]]:
    """Most probable category and the normalized posterior map.

    Ties break by category name order; posteriors sum to 1 within 1e-9.
    """
    log_posts = {}
    for category in model.categories:
        score = model.log_priors[category]
        likelihoods = model.log_likelihoods[category]
        for token, count in doc.counts.items():
            score += count * likelihoods.get(token, model.log_unknown[category])
        log_posts[category] = score
    peak = max(log_posts.values())
    unnormalized = {c: math.exp(lp - peak) for c, lp in log_posts.items()}
    total = sum(unnormalized.values())
    posteriors = {c: value / total for c, value in unnormalized.items()}
    winner = sorted(model.categories, key=lambda c: (-log_posts[c], c))[0]
    return winner, posteriors


def assemble_cues(
    item: ImageItem,
    top_colors: int = 3,
    top_keywords: int = 5,
    *,
    stopwords: frozenset[str] | None = None,
    color_k: int = 5,
    seed: int = 0,
) -> list[Cue]:
    """Merge content labels, dominant palette colors, and top keywords.

    Duplicate (label, source) pairs keep the maximum weight; the output is
    sorted by weight descending, then label, then source.  Items without
    pixels produce no color cues.
    """
    candidates: list[Cue] = [
        Cue(label.lower(), "content", confidence)
        for label, confidence in item.content_labels
    ]
    if item.pixels is not None:
        for assignment in color_assignments(item.pixels, k=color_k, seed=seed)[:top_colors]:
            candidates.append(Cue(assignment.palette_label, "color", assignment.proportion))
    profile = extract_keywords(item.title, item.description, stopwords)
    if profile.counts:
        ranked = sorted(profile.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        max_count = ranked[0][1]
        for token, count in ranked[:top_keywords]:
            candidates.append(Cue(token, "keyword", count / max_count))

    best: dict[tuple[str, str], Cue] = {}
    for cue in candidates:
        key = (cue.label, cue.source)
        if key not in best or cue.weight > best[key].weight:
            best[key] = cue
    return sorted(best.values(), key=lambda c: (-c.weight, c.label, c.source))
