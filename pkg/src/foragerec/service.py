"""HTTP service binding the engine together.

Boards load once at startup and the catalog and index stay immutable from
then on; POST /boards only validates candidate files.  Sessions live in
memory, one lock per session id, so concurrent requests on distinct sessions
never contend.  Scent scores used for ranking are recomputed per request from
the service-wide preference log.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import catalog as cat
from . import forage, scent
from .features import assemble_cues, load_stopwords
from .index import VectorIndex, build_index, similar_items

CONFIG_ENV_VAR = "FORAGE_CONFIG"


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8765"
    boards: list[str] = field(default_factory=list)
    alpha: float = 0.7
    k: int = 10
    scent_scope: str = "global"
    seed: int = 0
    stopwords: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.scent_scope not in ("global", "per_category"):
            raise ValueError(f"unknown scent scope {self.scent_scope!r}")

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**raw)

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        path = os.environ.get(CONFIG_ENV_VAR)
        if not path:
            raise ValueError(f"{CONFIG_ENV_VAR} is not set")
        return cls.from_file(path)


class SessionCreate(BaseModel):
    user: str
    query: str
    k: int | None = None
    alpha: float | None = None


class PreferenceBody(BaseModel):
    cue_label: str


class EngineState:
    """Catalog, index, and session registry for one service instance."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        stopwords = load_stopwords(config.stopwords) if config.stopwords else load_stopwords()
        items: list[cat.ImageItem] = []
        self.boards: list[cat.Board] = []
        for board_path in config.boards:
            board = cat.load_board(board_path)
            self.boards.append(board)
            items.extend(board.items)
        self.catalog = cat.Board(name="catalog", items=items)
        duplicates = cat.validate_catalog(self.catalog)
        if duplicates:
            raise cat.CatalogValidationError(duplicates)
        for item in items:
            item.cues = assemble_cues(item, stopwords=stopwords, seed=config.seed)
        self.items = self.catalog.items_by_id()
        self.index: VectorIndex | None = (
            build_index(items) if any(i.indexable for i in items) else None
        )
        self.log = scent.PreferenceLog()
        self.sessions: dict[str, forage.ForagingSession] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._clock_origin = time.monotonic()

    def now_ms(self) -> int:
        return int((time.monotonic() - self._clock_origin) * 1000)

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._session_locks:
                self._session_locks[session_id] = threading.Lock()
            return self._session_locks[session_id]

    def ranking_scores(self) -> dict[str, scent.ScentScore]:
        freqs = scent.frequencies(self.log)
        if not freqs:
            return {}
        return scent.scale_scent(freqs, max(freqs.values()))

    def log_categories(self) -> list[str]:
        return sorted(
            {e.category for e in self.log if e.category is not None}
        )


def _session_view(state: EngineState, session: forage.ForagingSession) -> dict:
    scores = state.ranking_scores()
    patch_cards = []
    for item_id, score in session.current_patch:
        if item_id in state.items:
            patch_cards.append(_item_card(state, item_id, score=score, scores=scores))
        else:
            patch_cards.append({"item_id": item_id, "score": score})
    summary, cost = forage.session_metrics(session)
    return {
        "id": session.id,
        "user": session.user,
        "query": session.query,
        "phase": session.phase,
        "patch": patch_cards,
        "diet": {
            "consumed_cues": dict(sorted(session.diet.consumed_cues.items())),
            "viewed_items": sorted(session.diet.viewed_items),
            **summary,
        },
        "cost": {
            "steps": cost.steps,
            "retrievals": cost.retrievals,
            "elapsed_ms": cost.elapsed_ms,
        },
        "no_matches": session.no_matches,
        "warning": session.warning,
    }


def _item_card(
    state: EngineState,
    item_id: str,
    score: float | None = None,
    scores: dict[str, scent.ScentScore] | None = None,
) -> dict:
    item = state.items[item_id]
    scores = scores if scores is not None else state.ranking_scores()
    image_scent = scent.scent_of_image(item, scores) if scores else None
    card = {
        "item_id": item.id,
        "board": item.board,
        "title": item.title,
        "cues": [
            {"label": c.label, "source": c.source, "weight": c.weight} for c in item.cues
        ],
        "image_scent": image_scent,
    }
    if score is not None:
        card["score"] = score
    return card


def create_app(config: ServiceConfig) -> FastAPI:
    state = EngineState(config)
    app = FastAPI(title="foragerec")
    app.state.engine = state
    # the browser client may be served from any origin; the API is open anyway
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "items": len(state.catalog.items),
            "dim": state.index.dim if state.index else 0,
        }

    @app.post("/boards")
    async def validate_board(file: UploadFile):
        data = await file.read()
        try:
            board = cat.load_board(data)
        except cat.BoardFormatError as exc:
            return {
                "valid": False,
                "name": None,
                "items": 0,
                "violations": [
                    {"item_id": None, "rule": "parse", "message": str(exc)}
                ],
            }
        except cat.CatalogValidationError as exc:
            return {
                "valid": False,
                "name": None,
                "items": 0,
                "violations": [
                    {"item_id": v.item_id, "rule": v.rule, "message": v.message}
                    for v in exc.violations
                ],
            }
        return {"valid": True, "name": board.name, "items": len(board), "violations": []}

    @app.get("/search")
    def search(q: str, k: int | None = None):
        k = k if k is not None else config.k
        if k < 1:
            raise HTTPException(status_code=422, detail="k must be >= 1")
        matches = forage.query_matches(state.catalog.items, q)[:k]
        return {
            "query": q,
            "results": [_item_card(state, item_id, score=score) for item_id, score in matches],
        }

    @app.get("/items/{item_id}")
    def get_item(item_id: str):
        if item_id not in state.items:
            raise HTTPException(status_code=404, detail=f"unknown item {item_id!r}")
        item = state.items[item_id]
        card = _item_card(state, item_id)
        card["description"] = item.description
        card["indexable"] = item.indexable
        return card

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate):
        if state.index is None:
            raise HTTPException(status_code=503, detail="index is empty")
        session_id = uuid.uuid4().hex[:12]
        session = forage.start_session(
            body.user,
            body.query,
            state.index,
            state.catalog,
            k=body.k or config.k,
            alpha=config.alpha if body.alpha is None else body.alpha,
            log=state.log,
            session_id=session_id,
            timestamp=state.now_ms(),
        )
        with state._registry_lock:
            state.sessions[session.id] = session
        return _session_view(state, session)

    def _get_session(session_id: str) -> forage.ForagingSession:
        session = state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_view(state, _get_session(session_id))

    @app.post("/sessions/{session_id}/preferences")
    def select_preference(session_id: str, body: PreferenceBody):
        if not body.cue_label:
            raise HTTPException(status_code=422, detail="cue_label must be nonempty")
        session = _get_session(session_id)
        with state.session_lock(session_id):
            forage.apply_preference(
                session,
                body.cue_label,
                state.index,
                state.catalog,
                state.ranking_scores(),
                timestamp=max(state.now_ms(), session.last_timestamp),
            )
        return _session_view(state, session)

    @app.get("/sessions/{session_id}/recommendations")
    def recommendations(session_id: str, k: int | None = None):
        session = _get_session(session_id)
        k = k if k is not None else session.k
        if k < 1:
            raise HTTPException(status_code=422, detail="k must be >= 1")
        patch_ids = {item_id for item_id, _ in session.current_patch}
        pool: dict[str, float] = {}
        for item_id in sorted(patch_ids):
            item = state.items.get(item_id)
            if item is None or not item.indexable or item_id not in state.index.ids:
                continue
            for neighbor_id, sim in similar_items(state.index, item_id, k):
                if neighbor_id not in patch_ids and sim > pool.get(neighbor_id, -2.0):
                    pool[neighbor_id] = sim
        scores = state.ranking_scores()
        ranked = forage.rank_results(
            sorted(pool.items()), state.items, scores, session.alpha
        )[:k]
        return {
            "session": session.id,
            "results": [
                _item_card(state, item_id, score=score, scores=scores)
                for item_id, score in ranked
            ],
        }

    @app.get("/scent-report")
    def scent_report_endpoint(scope: str | None = None, top: int = 5):
        scope = scope or config.scent_scope
        if scope not in ("global", "per_category"):
            raise HTTPException(status_code=422, detail=f"unknown scope {scope!r}")
        if top < 1:
            raise HTTPException(status_code=422, detail="top must be >= 1")
        categories = state.log_categories()
        report = scent.scent_report(state.log, categories, top, scope)
        payload = scent.report_to_dict(report)
        payload["flags"] = (
            ["no preference events recorded"] if not categories else
            [f"category {c.category!r} has no counted events" for c in report.categories if c.empty]
        )
        return payload

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
