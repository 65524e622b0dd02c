#!/usr/bin/env python3
"""Regenerate the shipped fixtures: two small food boards and a preference
log whose per-category frequencies are the documented reference pattern."""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

ZOODLES_ITEMS = [
    {
        "id": "z1",
        "title": "Easy zucchini zoodles",
        "description": "Light zucchini noodles with garlic",
        "content_labels": [
            {"label": "zoodles", "confidence": 0.92},
            {"label": "zucchini", "confidence": 0.71},
        ],
        "embedding": [0.95, 0.05, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0],
    },
    {
        "id": "z2",
        "title": "Zoodles with pesto pasta twist",
        "description": "Quick weeknight zoodles bowl",
        "content_labels": [
            {"label": "zoodles", "confidence": 0.88},
            {"label": "pasta", "confidence": 0.55},
        ],
        "embedding": [0.9, 0.1, 0.05, 0.0, 0.0, 0.05, 0.0, 0.0],
    },
    {
        "id": "z3",
        "title": "Chicken zoodles stir fry",
        "description": "High protein chicken zoodles",
        "content_labels": [
            {"label": "zoodles", "confidence": 0.81},
            {"label": "chicken", "confidence": 0.62},
        ],
        "embedding": [0.85, 0.05, 0.1, 0.05, 0.0, 0.0, 0.05, 0.0],
    },
]

BOLOGNESE_ITEMS = [
    {
        "id": "b1",
        "title": "Classic spaghetti bolognese",
        "description": "Slow cooked bolognese sauce",
        "content_labels": [
            {"label": "bolognese", "confidence": 0.94},
            {"label": "spaghetti", "confidence": 0.77},
        ],
        "embedding": [0.05, 0.95, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0],
    },
    {
        "id": "b2",
        "title": "Easy bolognese sauce",
        "description": "Rich tomato bolognese for pasta",
        "content_labels": [
            {"label": "bolognese", "confidence": 0.89},
            {"label": "sauce", "confidence": 0.64},
        ],
        "embedding": [0.1, 0.9, 0.05, 0.0, 0.05, 0.0, 0.0, 0.0],
    },
    {
        "id": "b3",
        "title": "Weeknight spaghetti bolognese",
        "description": "Family spaghetti bolognese recipe",
        "content_labels": [
            {"label": "bolognese", "confidence": 0.83},
            {"label": "spaghetti", "confidence": 0.6},
        ],
        "embedding": [0.05, 0.85, 0.1, 0.0, 0.0, 0.05, 0.0, 0.05],
    },
]

# Two-cue items for badge demos: with exactly two scored cues the image
# scent is the plain average of their scaled values.
BADGE_ITEMS = [
    {
        "id": "d1",
        "title": "",
        "description": "",
        "content_labels": [
            {"label": "tiramisu", "confidence": 0.9},
            {"label": "mascarpone", "confidence": 0.8},
        ],
        "embedding": [0.0, 0.05, 0.9, 0.1, 0.0, 0.0, 0.0, 0.05],
    },
    {
        "id": "d2",
        "title": "",
        "description": "",
        "content_labels": [{"label": "tiramisu", "confidence": 0.85}],
        "embedding": [0.05, 0.0, 0.85, 0.15, 0.05, 0.0, 0.0, 0.0],
    },
]

# Per-category cue frequencies behind the reference scent pattern.
REFERENCE_FREQUENCIES = {
    "Spaghetti Bolognese": [
        ("bolognese", 50),
        ("spaghetti", 35),
        ("recipe", 30),
        ("sauce", 30),
        ("easy", 15),
    ],
    "Zoodles": [
        ("zoodles", 45),
        ("zucchini", 40),
        ("easy", 30),
        ("pasta", 25),
        ("chicken", 25),
    ],
}


def write_boards():
    boards_dir = FIXTURES / "boards"
    boards_dir.mkdir(parents=True, exist_ok=True)
    for name, items, filename in [
        ("Zoodles", ZOODLES_ITEMS, "zoodles.json"),
        ("Spaghetti Bolognese", BOLOGNESE_ITEMS, "spaghetti_bolognese.json"),
        ("Badge Demo", BADGE_ITEMS, "badge_demo.json"),
    ]:
        path = boards_dir / filename
        path.write_text(
            json.dumps({"name": name, "items": items}, indent=2) + "\n",
            encoding="utf-8",
        )
        print(f"wrote {path}")


def write_preference_log():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    path = FIXTURES / "study_preferences.jsonl"
    timestamp = 0
    with path.open("w", encoding="utf-8") as handle:
        for category, freqs in REFERENCE_FREQUENCIES.items():
            session = "study-" + category.lower().replace(" ", "-")
            for cue, count in freqs:
                for _ in range(count):
                    handle.write(
                        json.dumps(
                            {
                                "user": "study",
                                "session": session,
                                "cue_label": cue,
                                "category": category,
                                "timestamp": timestamp,
                                "action": "select",
                            }
                        )
                        + "\n"
                    )
                    timestamp += 1
    print(f"wrote {path} ({timestamp} events)")


def write_service_config():
    config = {
        "listen": "127.0.0.1:8765",
        "boards": [
            str(Path("fixtures/boards/spaghetti_bolognese.json")),
            str(Path("fixtures/boards/zoodles.json")),
            str(Path("fixtures/boards/badge_demo.json")),
        ],
        "alpha": 0.7,
        "k": 10,
        "scent_scope": "global",
        "seed": 0,
    }
    path = FIXTURES / "service_config.json"
    path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")


if __name__ == "__main__":
    write_boards()
    write_preference_log()
    write_service_config()
