"""HTTP API over a trained model and its graph, for the dashboard.

All endpoints are pure reads of an immutable ApiSession; identical requests
produce identical bodies. Errors use a {code, message} JSON envelope and each
request emits one structured log line with route, latency, and status.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import explain, recommend
from .checkpoint import load_model
from .data import load_reviews, synonym_lexicon
from .embedding import EmbeddingModel
from .graph import KnowledgeGraph, RelationType, load_graph

log = logging.getLogger("aspectkg.service")

RATING_BUCKETS = ("1", "2", "3", "4", "5")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(code: str, message: str) -> ApiError:
    return ApiError(404, code, message)


@dataclass
class ApiSession:
    """Immutable bundle of everything a request handler may read."""

    model: EmbeddingModel
    graph: KnowledgeGraph
    reviews: dict[tuple[str, str], str] = field(default_factory=dict)
    synonyms: dict[str, str] = field(default_factory=dict)
    projection_seed: int = 0
    port: int = 8080


def load_session(
    model_path: str,
    graph_path: str,
    reviews_path: Optional[str] = None,
    synonyms_path: Optional[str] = None,
    port: int = 8080,
    projection_seed: int = 0,
) -> ApiSession:
    model = load_model(model_path)
    graph = load_graph(graph_path)
    reviews = load_reviews(reviews_path) if reviews_path else {}
    synonyms = synonym_lexicon(synonyms_path) if synonyms_path else {}
    return ApiSession(model, graph, reviews, synonyms, projection_seed, port)


def _user_ordinal(session: ApiSession, key: str) -> int:
    ordinal = session.graph.users.get(key)
    if ordinal is None:
        raise _not_found("unknown_user", f"no such user: {key}")
    return ordinal


def _item_ordinal(session: ApiSession, key: str) -> int:
    ordinal = session.graph.items.get(key)
    if ordinal is None:
        raise _not_found("unknown_item", f"no such item: {key}")
    return ordinal


def _split_users(raw: Optional[str]) -> Optional[list[str]]:
    if raw is None:
        return None
    out = [part for part in raw.split(",") if part]
    return out


def _aspect_histograms(
    session: ApiSession, users: list[str], item_ordinal: Optional[int]
) -> dict[str, dict[str, int]]:
    """Like/Dislike counts per aspect over the given users, optionally
    restricted to aspects of one item. Unknown user keys contribute nothing."""
    graph = session.graph
    allowed = graph.aspects_of_item(item_ordinal) if item_ordinal is not None else None
    liked: dict[str, int] = {}
    disliked: dict[str, int] = {}
    for key in users:
        u = graph.users.get(key)
        if u is None:
            continue
        for rel, aspect_ord in graph.opinion_edges_of_user(u):
            if allowed is not None and aspect_ord not in allowed:
                continue
            aspect = graph.aspects.node_at(aspect_ord).key
            if rel is RelationType.LIKE:
                liked[aspect] = liked.get(aspect, 0) + 1
            elif rel is RelationType.DISLIKE:
                disliked[aspect] = disliked.get(aspect, 0) + 1
    return {"liked": liked, "disliked": disliked}


def _opinions_for_review(
    session: ApiSession, user_ordinal: int, item_ordinal: int
) -> list[tuple[str, RelationType]]:
    """The user's opinion edges restricted to aspects of the item; the graph
    does not retain the originating item of a user->aspect edge, so this is
    the item-scoped reconstruction."""
    graph = session.graph
    item_aspects = graph.aspects_of_item(item_ordinal)
    out = []
    for rel, aspect_ord in graph.opinion_edges_of_user(user_ordinal):
        if aspect_ord in item_aspects:
            out.append((graph.aspects.node_at(aspect_ord).key, rel))
    return out


def create_app(session: ApiSession) -> FastAPI:
    app = FastAPI(title="aspectkg", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "bad_request", "message": str(exc)}
        )

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        millis = (time.perf_counter() - start) * 1000.0
        log.info(
            json.dumps(
                {
                    "route": request.url.path,
                    "millis": round(millis, 3),
                    "status": response.status_code,
                }
            )
        )
        return response

    @app.get("/users/{key}/recommendations")
    def recommendations(key: str, n: int = 10, excludeSeen: bool = True):
        ordinal = _user_ordinal(session, key)
        subject = session.graph.users.node_at(ordinal)
        ranked = recommend.recommend_top_n(
            session.model, session.graph, subject, n, exclude_seen=excludeSeen
        )
        return [
            {"item": node.key, "score": score, "rank": rank}
            for rank, (node, score) in enumerate(ranked.entries, start=1)
        ]

    @app.get("/items/{key}/raters")
    def raters(key: str, subject: Optional[str] = None):
        ordinal = _item_ordinal(session, key)
        rater_ords = session.graph.rater_ordinals(ordinal)
        users = [session.graph.users.node_at(o) for o in rater_ords]
        if len(users) >= 2:
            projection = explain.project_users_2d(
                session.model, users, seed=session.projection_seed
            )
            coords = projection.coords
        elif len(users) == 1:
            coords = {users[0].key: (0.0, 0.0)}
        else:
            coords = {}
        return [
            {
                "user": u.key,
                "x": coords[u.key][0],
                "y": coords[u.key][1],
                "isSubject": u.key == subject,
            }
            for u in users
        ]

    @app.get("/aspects/distribution")
    def aspect_distribution(item: str, users: str = Query(...)):
        ordinal = _item_ordinal(session, item)
        selected = _split_users(users)
        if not selected:
            raise ApiError(400, "empty_user_list", "users query parameter is empty")
        return _aspect_histograms(session, selected, ordinal)

    @app.get("/users/{key}/aspect-profile")
    def aspect_profile(key: str):
        _user_ordinal(session, key)
        return _aspect_histograms(session, [key], None)

    @app.get("/items/{key}/reviews")
    def reviews(
        key: str,
        users: Optional[str] = None,
        page: int = 0,
        pageSize: int = 1,
    ):
        item_ord = _item_ordinal(session, key)
        if pageSize < 1:
            raise ApiError(400, "bad_request", "pageSize must be at least 1")
        selected = _split_users(users)
        graph = session.graph
        entries = []
        for user_ord in graph.rater_ordinals(item_ord):
            user_key = graph.users.node_at(user_ord).key
            if selected is not None and user_key not in selected:
                continue
            text = session.reviews.get((user_key, key))
            if text is None:
                continue
            entries.append((user_ord, user_key, text))
        entries.sort(key=lambda e: e[0])

        page_count = math.ceil(len(entries) / pageSize)
        if page < 0 or (page_count == 0 and page != 0) or (page_count > 0 and page >= page_count):
            raise ApiError(416, "page_out_of_range", f"page {page} of {page_count}")
        window = entries[page * pageSize : (page + 1) * pageSize]
        out = []
        for user_ord, user_key, text in window:
            opinions = _opinions_for_review(session, user_ord, item_ord)
            highlighted = explain.highlight_aspects(text, opinions, session.synonyms)
            out.append({"user": user_key, **highlighted.to_dict()})
        return {
            "page": page,
            "pageSize": pageSize,
            "pageCount": page_count,
            "reviews": out,
        }

    @app.get("/items/{key}/rating-distribution")
    def rating_distribution(key: str, users: Optional[str] = None):
        item_ord = _item_ordinal(session, key)
        selected = _split_users(users)
        graph = session.graph
        histogram = {bucket: 0 for bucket in RATING_BUCKETS}
        for user_ord, value in graph.ratings_of_item(item_ord):
            user_key = graph.users.node_at(user_ord).key
            if selected is not None and user_key not in selected:
                continue
            bucket = str(int(math.floor(value)))
            if bucket in histogram:
                histogram[bucket] += 1
        return histogram

    return app


def run_server(session: ApiSession) -> None:
    import uvicorn

    uvicorn.run(create_app(session), host="127.0.0.1", port=session.port, log_level="warning")
