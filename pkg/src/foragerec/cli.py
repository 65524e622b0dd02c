"""Command-line frontend: ingest, split, eval-scent, knn-check, serve.

Every subcommand is a pure function of its files, flags, and seed, so
repeated runs produce identical output.  ``serve`` reads its configuration
from --config or the FORAGE_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import catalog as cat
from . import scent
from .index import build_index, knn
from .catalog import EmbeddingVector, ImageItem


def _cmd_ingest(args) -> int:
    try:
        board = cat.load_board(
            args.board,
            embedding_sidecar=args.embeddings,
        )
    except OSError as exc:
        print(f"cannot read board: {exc}", file=sys.stderr)
        return 1
    except cat.BoardFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except cat.CatalogValidationError as exc:
        print(f"invalid board: {len(exc.violations)} violation(s)", file=sys.stderr)
        for violation in exc.violations:
            print(f"  {violation}", file=sys.stderr)
        return 1
    indexable = sum(1 for item in board.items if item.indexable)
    print(f"board {board.name!r}: {len(board)} items, {indexable} indexable, 0 violations")
    return 0


def _cmd_split(args) -> int:
    try:
        board = cat.load_board(args.board)
        split = cat.split_dataset(
            board, args.fraction, args.seed, per_category=args.per_category
        )
    except (OSError, cat.BoardFormatError, cat.CatalogValidationError, ValueError) as exc:
        print(f"split failed: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_path = out_dir / "train_ids.txt"
    test_path = out_dir / "test_ids.txt"
    train_path.write_text("\n".join(split.train) + "\n", encoding="utf-8")
    test_path.write_text("\n".join(split.test) + "\n", encoding="utf-8")
    print(f"train: {len(split.train)} ids -> {train_path}")
    print(f"test: {len(split.test)} ids -> {test_path}")
    return 0


def _cmd_eval_scent(args) -> int:
    log_path = Path(args.log)
    if not log_path.exists():
        print(f"no such log: {log_path}", file=sys.stderr)
        return 1
    with log_path.open(encoding="utf-8") as handle:
        log = scent.PreferenceLog.from_jsonl(handle)
    categories = args.category or sorted(
        {e.category for e in log if e.category is not None}
    )
    if not categories:
        print("log has no categorized events", file=sys.stderr)
        return 1
    report = scent.scent_report(log, list(categories), args.top, args.scope)
    if args.format == "json":
        print(json.dumps(scent.report_to_dict(report), indent=2))
    else:
        print(scent.format_report_table(report))
    return 0


def _pure_python_knn_oracle(
    vectors: list[list[float]], ids: list[str], query: list[float], k: int
) -> list[str]:
    # Deliberately library-free reference ranking.
    def norm(v):
        return math.sqrt(sum(x * x for x in v))

    qn = norm(query)
    scored = []
    for item_id, vector in zip(ids, vectors):
        dot = sum(a * b for a, b in zip(vector, query))
        scored.append((item_id, dot / (norm(vector) * qn)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [item_id for item_id, _ in scored[:k]]


def _cmd_knn_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    vectors = rng.normal(size=(args.n, args.dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    ids = [f"v{i:04d}" for i in range(args.n)]
    items = [
        ImageItem(id=item_id, embedding=EmbeddingVector(row))
        for item_id, row in zip(ids, vectors.tolist())
    ]
    index = build_index(items)

    ks = args.k or [1, 5, 20]
    matched = 0
    mismatches = []
    for qi in range(args.n):
        query = vectors[qi].tolist()
        ok = True
        for k in ks:
            got = [item_id for item_id, _ in knn(index, query, k)]
            want = _pure_python_knn_oracle(vectors.tolist(), ids, query, k)
            if got != want:
                ok = False
                mismatches.append((ids[qi], k, got, want))
        if ok:
            matched += 1
    if matched == args.n:
        print(f"OK: {matched}/{args.n} rankings match oracle")
        return 0
    print(f"FAIL: {matched}/{args.n} rankings match oracle", file=sys.stderr)
    for item_id, k, got, want in mismatches[:5]:
        print(f"  query {item_id} k={k}: got {got[:3]}... want {want[:3]}...", file=sys.stderr)
    return 1


def _cmd_serve(args) -> int:
    from .service import CONFIG_ENV_VAR, ServiceConfig, serve

    if args.config:
        config = ServiceConfig.from_file(args.config)
    elif os.environ.get(CONFIG_ENV_VAR):
        config = ServiceConfig.from_env()
    else:
        config = ServiceConfig()
    if args.listen:
        config.listen = args.listen
    if args.board:
        config.boards = list(args.board)
    if not config.boards:
        print("no boards configured; use --board or a config file", file=sys.stderr)
        return 1
    try:
        serve(config)
    except cat.CatalogValidationError as exc:
        print(f"startup failed: invalid board", file=sys.stderr)
        for violation in exc.violations:
            print(f"  {violation}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foragerec",
        description="Content-based image recommendation engine with foraging sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="load and validate a board file")
    p_ingest.add_argument("board", help="path to a board JSON file")
    p_ingest.add_argument("--embeddings", help="path to an EMB1 sidecar file")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_split = sub.add_parser("split", help="deterministic train/test id split")
    p_split.add_argument("board", help="path to a board JSON file")
    p_split.add_argument("--fraction", type=float, default=0.67)
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--out-dir", default=".")
    p_split.add_argument(
        "--per-category", action="store_true", help="split within each board group"
    )
    p_split.set_defaults(func=_cmd_split)

    p_scent = sub.add_parser("eval-scent", help="scent report from a preference log")
    p_scent.add_argument("--log", required=True, help="JSON-lines preference log")
    p_scent.add_argument("--scope", choices=("global", "per_category"), default="global")
    p_scent.add_argument("--top", type=int, default=5)
    p_scent.add_argument(
        "--category", action="append", help="restrict to a category (repeatable)"
    )
    p_scent.add_argument("--format", choices=("table", "json"), default="table")
    p_scent.set_defaults(func=_cmd_eval_scent)

    p_knn = sub.add_parser("knn-check", help="compare knn against a brute-force oracle")
    p_knn.add_argument("--n", type=int, default=200)
    p_knn.add_argument("--dim", type=int, default=64)
    p_knn.add_argument("--seed", type=int, default=7)
    p_knn.add_argument("--k", type=int, action="append", help="k values (repeatable)")
    p_knn.set_defaults(func=_cmd_knn_check)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", help="path to a JSON config file")
    p_serve.add_argument("--listen", help="host:port to bind")
    p_serve.add_argument("--board", action="append", help="board file (repeatable)")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
