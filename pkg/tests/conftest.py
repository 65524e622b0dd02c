import json
from pathlib import Path

import pytest

from foragerec.catalog import Board, load_board
from foragerec.features import assemble_cues, load_stopwords

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def stopwords():
    return load_stopwords()


@pytest.fixture()
def fixture_catalog(stopwords) -> Board:
    """The six food items from both fixture boards, cues assembled."""
    items = []
    for name in ("spaghetti_bolognese.json", "zoodles.json"):
        board = load_board(FIXTURES / "boards" / name)
        items.extend(board.items)
    for item in items:
        item.cues = assemble_cues(item, stopwords=stopwords)
    return Board(name="catalog", items=items)


def make_board_json(n: int, dim: int = 4, name: str = "synthetic") -> bytes:
    """A well-formed n-item board with distinct nonzero embeddings."""
    items = []
    for i in range(n):
        vector = [0.0] * dim
        vector[i % dim] = 1.0 + (i % 7) * 0.25
        items.append(
            {
                "id": f"item-{i:04d}",
                "title": f"synthetic item {i}",
                "description": "",
                "content_labels": [],
                "embedding": vector,
            }
        )
    return json.dumps({"name": name, "items": items}).encode("utf-8")
