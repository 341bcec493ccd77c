"""HTTP query surface over a loaded snapshot.

Every GET is a pure serialization of the corresponding library call; the
only mutating route is POST /admin/reload, which swaps the snapshot
reference atomically. Error bodies are JSON {code, message}.
"""

import csv
import io
import json
import os
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .errors import QueryError, TagRankError
from .ranking import RankingOptions, rank_hashtags, trend_histogram, trending
from .snapshot import ModelSnapshot

DEFAULT_CONFIG = {
    "port": 8040,
    "host": "127.0.0.1",
    "snapshot": None,
    "top_n_default": 20,
    "search_n_default": 20,
    "rerank_weights": None,   # None -> RankingOptions default
    "timestamps_sample": 10,
}

_ENV_PREFIX = "TAGRANK_"


def load_service_config(path: Optional[str] = None) -> dict:
    """Defaults <- config file <- TAGRANK_* environment overrides."""
    cfg = dict(DEFAULT_CONFIG)
    if path:
        with open(path, encoding="utf-8") as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in ("port", "top_n_default", "search_n_default"):
        env = os.environ.get(_ENV_PREFIX + key.upper())
        if env is not None:
            cfg[key] = int(env)
    for key in ("host", "snapshot"):
        env = os.environ.get(_ENV_PREFIX + key.upper())
        if env is not None:
            cfg[key] = env
    return cfg


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _int_param(raw: Optional[str], name: str,
               default: Optional[int] = None) -> Optional[int]:
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ApiError(400, "bad_parameter", f"'{name}' must be an integer")


def scored_row(row) -> dict:
    return {
        "hashtag": row.hashtag,
        "similarity": row.similarity,
        "rerank_score": row.rerank_score,
        "post_count": row.post_count,
        "index_ref": row.index_ref,
        "search_volume": None,  # no data source at desk scale
    }


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["hashtag", "similarity", "rerank_score", "post_count"])
    for row in rows:
        writer.writerow([row.hashtag, row.similarity, row.rerank_score,
                         row.post_count])
    return buf.getvalue()


class ServiceState:
    def __init__(self, config: dict):
        self.config = config
        self.snapshot: Optional[ModelSnapshot] = None
        self.snapshot_path: Optional[str] = config.get("snapshot")

    def load(self, path: Optional[str] = None) -> ModelSnapshot:
        if path:
            self.snapshot_path = path
        if not self.snapshot_path:
            raise ApiError(503, "snapshot_unavailable", "no snapshot configured")
        fresh = ModelSnapshot.load(self.snapshot_path)
        self.snapshot = fresh  # single reference assignment: atomic swap
        return fresh

    def require(self) -> ModelSnapshot:
        if self.snapshot is None:
            raise ApiError(503, "snapshot_unavailable", "snapshot not loaded")
        return self.snapshot


def topn_rows(snap: ModelSnapshot, config: dict, category: Optional[str],
              n_raw: Optional[str], min_raw: Optional[str],
              max_raw: Optional[str]):
    """Shared /topn + /export.csv parameter handling and ranking call."""
    if not category:
        raise ApiError(400, "missing_parameter", "'category' is required")
    n = _int_param(n_raw, "n", default=config["top_n_default"])
    if n < 0:
        raise ApiError(400, "bad_parameter", "'n' must be >= 0")
    min_posts = _int_param(min_raw, "min_posts")
    max_posts = _int_param(max_raw, "max_posts")
    cat_ord = snap.category_ordinal_by_id(category)
    if cat_ord is None:
        raise ApiError(404, "unknown_category", f"no category with id {category!r}")
    opts = make_options(config, n, min_posts, max_posts)
    return rank_hashtags(snap.categories[cat_ord].name, opts, snap)


def make_options(config: dict, n: int, min_posts=None, max_posts=None,
                 trend_window=None) -> RankingOptions:
    kwargs = {}
    if config.get("rerank_weights") is not None:
        kwargs["rerank_weights"] = tuple(config["rerank_weights"])
    try:
        return RankingOptions(top_n=n, min_post_count=min_posts,
                              max_post_count=max_posts,
                              trend_window=trend_window, **kwargs)
    except ValueError as exc:
        raise ApiError(400, "bad_parameter", str(exc))


def create_app(snapshot_path: Optional[str] = None,
               config: Optional[dict] = None) -> FastAPI:
    state = ServiceState(config or dict(DEFAULT_CONFIG))
    app = FastAPI(title="tagrank", docs_url=None, redoc_url=None)
    app.state.service = state
    # the dashboard is served as static files from another origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["GET", "POST"])

    if snapshot_path:
        state.load(snapshot_path)
    elif state.snapshot_path:
        state.load()

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(TagRankError)
    async def _lib_error(_req: Request, exc: TagRankError):
        status = 400 if isinstance(exc, QueryError) else 500
        return JSONResponse(status_code=status,
                            content={"code": type(exc).__name__,
                                     "message": str(exc)})

    @app.get("/categories")
    def categories():
        return state.require().category_tree()

    @app.get("/stats")
    def stats():
        snap = state.require()
        return {
            "digest": str(snap.digest),
            "built_at": snap.built_at,
            "dim": snap.dim,
            "node_counts": {k.name.lower(): v for k, v in snap.kind_counts.items()},
            "record_count": len(snap.index.records),
            "category_count": len(snap.categories),
        }

    @app.get("/topn")
    def topn(category: Optional[str] = None, n: Optional[str] = None,
             min_posts: Optional[str] = None, max_posts: Optional[str] = None):
        snap = state.require()
        rows = topn_rows(snap, state.config, category, n, min_posts, max_posts)
        return [scored_row(r) for r in rows]

    @app.get("/search")
    def search(q: Optional[str] = None, n: Optional[str] = None):
        snap = state.require()
        if not q or not q.strip():
            raise ApiError(400, "missing_parameter", "'q' must be non-empty")
        count = _int_param(n, "n", default=state.config["search_n_default"])
        if count < 0:
            raise ApiError(400, "bad_parameter", "'n' must be >= 0")
        opts = make_options(state.config, count)
        try:
            rows = rank_hashtags(q, opts, snap, fallback_to_all=False)
        except QueryError as exc:
            raise ApiError(400, "bad_query", str(exc))
        sample = state.config["timestamps_sample"]
        panels = []
        for row in rows:
            rec = snap.index.records[row.index_ref]
            panels.append({
                "hashtag": row.hashtag,
                "score": row.rerank_score,
                "similarity": row.similarity,
                "index_id": row.index_ref,
                "post_count": row.post_count,
                "timestamps": rec.timestamps[-sample:],
            })
        return panels

    @app.get("/trending")
    def trending_endpoint(request: Request):
        snap = state.require()
        params = request.query_params
        tag = params.get("tag")
        if not tag:
            raise ApiError(400, "missing_parameter", "'tag' is required")
        start = _int_param(params.get("from"), "from")
        end = _int_param(params.get("to"), "to")
        if start is None or end is None:
            raise ApiError(400, "missing_parameter", "'from' and 'to' are required")
        if start >= end:
            raise ApiError(400, "bad_parameter", "'from' must precede 'to'")
        rec = snap.record_by_text(tag)
        if rec is None and not tag.startswith("#"):
            rec = snap.record_by_text("#" + tag)
        if rec is None:
            raise ApiError(404, "unknown_tag", f"no hashtag {tag!r}")
        window = (start, end)
        return {
            "tag": rec.text,
            "from": start,
            "to": end,
            "trend": trending(rec.timestamps, window),
            "buckets": trend_histogram(rec.timestamps, window),
        }

    @app.get("/export.csv")
    def export_csv(category: Optional[str] = None, n: Optional[str] = None,
                   min_posts: Optional[str] = None, max_posts: Optional[str] = None):
        snap = state.require()
        rows = topn_rows(snap, state.config, category, n, min_posts, max_posts)
        body = rows_to_csv(rows)
        filename = f"hashtags_{category}_{snap.built_at}.csv"
        return Response(content=body, media_type="text/csv; charset=utf-8",
                        headers={"Content-Disposition":
                                 f'attachment; filename="{filename}"'})

    @app.post("/admin/reload")
    async def reload(request: Request):
        body = await request.body()
        path = None
        if body:
            try:
                payload = json.loads(body)
            except json.JSONDecodeError:
                raise ApiError(400, "bad_request", "body must be JSON")
            path = payload.get("snapshot")
        snap = state.load(path)
        return {"digest": str(snap.digest), "built_at": snap.built_at,
                "records": len(snap.index.records)}

    return app
