"""The interactive backbone: run registry with live refresh, a
content-addressed result cache, a worker queue for heavy plugins, and the
HTTP/JSON API.

Cache keys embed the content hashes of every run a result depends on, so a
reloaded run can never serve a stale result; refresh events merely evict
superseded entries opportunistically.  Jobs pin the run snapshot they were
submitted with, and identical concurrent submissions coalesce to one job.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from . import ingest
from .model import Group, GroupError, Run, RunLike, ValidationError, costs_at_budget, merge_group, validate_config
from .plugins import PLUGINS, InputError, Plugin, PluginContext, compute_envelope, canonical_inputs

logger = logging.getLogger(__name__)

__all__ = [
    "ServiceError",
    "RunRegistry",
    "ResultCache",
    "JobQueue",
    "JobRecord",
    "cache_key",
    "create_app",
]

DEFAULT_JOB_TIMEOUT_S = 300.0


class ServiceError(Exception):
    def __init__(self, status_code: int, detail: str) -> None:
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


def _iso(ts: float | None) -> str | None:
    if ts is None:
        return None
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# Result cache
# ---------------------------------------------------------------------------


def cache_key(plugin: str, targets: list[tuple[str, str]], inputs: dict) -> str:
    """Digest of (plugin, referenced run ids + content hashes, canonical inputs)."""
    payload = json.dumps(
        {"plugin": plugin, "targets": targets, "inputs": inputs},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResultCache:
    """Thread-safe envelope cache keyed by content-addressed digests."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._data: dict[str, dict] = {}
        self._by_run: dict[str, set[str]] = {}

    def get(self, key: str) -> dict | None:
        with self._lock:
            return self._data.get(key)

    def put(self, key: str, envelope: dict, run_ids: list[str]) -> None:
        with self._lock:
            self._data[key] = envelope
            for rid in run_ids:
                self._by_run.setdefault(rid, set()).add(key)

    def evict_run(self, run_id: str) -> int:
        """Opportunistically drop entries that referenced a reloaded run."""
        with self._lock:
            keys = self._by_run.pop(run_id, set())
            for key in keys:
                self._data.pop(key, None)
            return len(keys)

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)


# ---------------------------------------------------------------------------
# Job queue
# ---------------------------------------------------------------------------


@dataclass
class JobRecord:
    job_id: str
    plugin: str
    target: str
    inputs: dict
    run_hash: str
    state: str = "queued"  # queued -> running -> done | failed
    result: dict | None = None
    error: str | None = None
    created_at: float = field(default_factory=time.time)
    started_at: float | None = None
    finished_at: float | None = None
    cache_key: str = ""  # internal: lets a timeout clear the coalescing slot

    def snapshot(self) -> dict:
        return {
            "job_id": self.job_id,
            "plugin": self.plugin,
            "target": self.target,
            "inputs": self.inputs,
            "run_hash": self.run_hash,
            "state": self.state,
            "result": self.result,
            "error": self.error,
            "created_at": _iso(self.created_at),
            "started_at": _iso(self.started_at),
            "finished_at": _iso(self.finished_at),
        }


class JobQueue:
    """Worker pool with per-key coalescing and a running-time timeout."""

    def __init__(self, workers: int | None = None, timeout_s: float = DEFAULT_JOB_TIMEOUT_S) -> None:
        if workers is None:
            workers = max(1, (os.cpu_count() or 2) - 1)
        self.timeout_s = timeout_s
        self._executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="optboard-job")
        self._lock = threading.Lock()
        self._jobs: dict[str, JobRecord] = {}
        self._inflight: dict[str, str] = {}  # cache key -> job id

    def submit(
        self,
        key: str,
        record: JobRecord,
        fn: Callable[[], dict],
        on_done: Callable[[str, dict], None],
    ) -> str:
        """Enqueue unless an identical job is already in flight."""
        with self._lock:
            existing = self._inflight.get(key)
            if existing is not None:
                return existing
            record.cache_key = key
            self._jobs[record.job_id] = record
            self._inflight[key] = record.job_id

        def work() -> None:
            with self._lock:
                if record.state != "queued":  # timed out or superseded while queued
                    self._inflight.pop(key, None)
                    return
                record.state = "running"
                record.started_at = time.time()
            try:
                envelope = fn()
            except Exception as exc:  # fault isolation: the worker never dies
                logger.exception("job %s failed", record.job_id)
                with self._lock:
                    if record.state == "running":
                        record.state = "failed"
                        record.error = str(exc)
                        record.finished_at = time.time()
                    self._inflight.pop(key, None)
                return
            with self._lock:
                if record.state == "running":
                    record.state = "done"
                    record.result = envelope
                    record.finished_at = time.time()
                self._inflight.pop(key, None)
            if record.state == "done":
                on_done(key, envelope)

        self._executor.submit(work)
        return record.job_id

    def poll(self, job_id: str) -> JobRecord:
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                raise ServiceError(404, f"unknown job {job_id!r}")
            if (
                record.state == "running"
                and record.started_at is not None
                and time.time() - record.started_at > self.timeout_s
            ):
                record.state = "failed"
                record.error = "timeout"
                record.finished_at = time.time()
                self._inflight.pop(record.cache_key, None)
            return record

    def shutdown(self) -> None:
        self._executor.shutdown(wait=False, cancel_futures=True)


# ---------------------------------------------------------------------------
# Run registry
# ---------------------------------------------------------------------------


class RunRegistry:
    """Holds the live run table, watched sources, groups, and the cache."""

    def __init__(self, groups_file: Path | None = None) -> None:
        self._lock = threading.RLock()
        self._runs: dict[str, Run] = {}
        self._sources: dict[str, ingest.RunSource] = {}
        self._last_refresh: dict[str, float] = {}
        self._groups: dict[str, Group] = {}
        self._groups_file = groups_file
        self.cache = ResultCache()
        if groups_file is not None and groups_file.is_file():
            try:
                raw = json.loads(groups_file.read_text(encoding="utf-8"))
                for name, run_ids in raw.items():
                    self._groups[name] = Group(name=name, run_ids=tuple(run_ids))
            except (json.JSONDecodeError, OSError, ValueError) as exc:
                logger.warning("could not load group registry %s: %s", groups_file, exc)

    # -- registration ------------------------------------------------------

    def add_run(self, run: Run) -> None:
        """Register an in-memory run (no source directory)."""
        with self._lock:
            self._runs[run.id] = run
            self._last_refresh[run.id] = time.time()

    def add_source(self, path: Path) -> str:
        """Detect, load, and watch one run directory; returns the run id."""
        fmt = ingest.detect_format(path)
        source = ingest.RunSource(path=Path(path), format_name=fmt)
        result = ingest.refresh(source)
        if result.kind != "reloaded":
            raise ingest.IngestError(result.error or f"cannot load {path}")
        with self._lock:
            self._runs[result.run.id] = result.run
            self._sources[result.run.id] = source
            self._last_refresh[result.run.id] = time.time()
        return result.run.id

    def scan_directory(self, runs_dir: Path) -> list[str]:
        """Register every loadable subdirectory; bad ones are skipped with a warning."""
        added = []
        for child in sorted(p for p in Path(runs_dir).iterdir() if p.is_dir()):
            try:
                added.append(self.add_source(child))
            except ingest.IngestError as exc:
                logger.warning("skipping %s: %s", child, exc)
        return added

    # -- refresh -----------------------------------------------------------

    def refresh_once(self) -> list[str]:
        """Poll every source; returns ids of runs that were reloaded."""
        reloaded = []
        with self._lock:
            sources = list(self._sources.items())
        for run_id, source in sources:
            result = ingest.refresh(source)
            now = time.time()
            with self._lock:
                self._last_refresh[run_id] = now
                if result.kind == "reloaded":
                    self._runs[result.run.id] = result.run
                    reloaded.append(run_id)
            if result.kind == "reloaded":
                evicted = self.cache.evict_run(run_id)
                logger.info("reloaded %s (evicted %d cache entries)", run_id, evicted)
            elif result.kind == "failed":
                logger.warning("refresh failed for %s: %s", run_id, result.error)
        return reloaded

    # -- groups ------------------------------------------------------------

    def _persist_groups(self) -> None:
        if self._groups_file is None:
            return
        payload = {name: list(g.run_ids) for name, g in sorted(self._groups.items())}
        self._groups_file.parent.mkdir(parents=True, exist_ok=True)
        self._groups_file.write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    def create_group(self, name: str, run_ids: list[str]) -> Group:
        if not name:
            raise ServiceError(400, "name: group name must be nonempty")
        with self._lock:
            if name in self._runs:
                raise ServiceError(400, f"name: {name!r} collides with a run id")
            missing = [rid for rid in run_ids if rid not in self._runs]
            if missing:
                raise ServiceError(404, f"unknown run id {missing[0]!r}")
            group = Group(name=name, run_ids=tuple(run_ids))
            merge_group(group, [self._runs[rid] for rid in run_ids])  # surfaces mismatches
            self._groups[name] = group
            self._persist_groups()
            return group

    def delete_group(self, name: str) -> None:
        with self._lock:
            if name not in self._groups:
                raise ServiceError(404, f"unknown group {name!r}")
            del self._groups[name]
            self._persist_groups()

    # -- queries -----------------------------------------------------------

    def get_run(self, run_id: str) -> Run:
        with self._lock:
            run = self._runs.get(run_id)
        if run is None:
            raise ServiceError(404, f"unknown run {run_id!r}")
        return run

    def resolve(self, target: str) -> RunLike:
        """A run by id, or a group merged into a run view."""
        with self._lock:
            if target in self._runs:
                return self._runs[target]
            group = self._groups.get(target)
            if group is not None:
                members = []
                for rid in group.run_ids:
                    if rid not in self._runs:
                        raise ServiceError(404, f"group {target!r}: member {rid!r} not loaded")
                    members.append(self._runs[rid])
                try:
                    return merge_group(group, members)
                except GroupError as exc:
                    raise ServiceError(400, str(exc)) from exc
        raise ServiceError(404, f"unknown run or group {target!r}")

    def dependency_run_ids(self, target: str) -> list[str]:
        with self._lock:
            if target in self._runs:
                return [target]
            if target in self._groups:
                return list(self._groups[target].run_ids)
        raise ServiceError(404, f"unknown run or group {target!r}")

    def list_runs(self) -> list[dict]:
        with self._lock:
            items = sorted(self._runs.items())
            return [
                {
                    "id": run_id,
                    "meta": dict(run.meta),
                    "budgets": list(run.budgets),
                    "objectives": [
                        {
                            "name": o.name,
                            "direction": o.direction.value,
                            "lower": o.lower,
                            "upper": o.upper,
                        }
                        for o in run.objectives
                    ],
                    "hash": run.content_hash,
                    "last_refresh": _iso(self._last_refresh.get(run_id)),
                }
                for run_id, run in items
            ]

    def list_groups(self) -> list[dict]:
        with self._lock:
            return [
                {"name": g.name, "run_ids": list(g.run_ids)}
                for _, g in sorted(self._groups.items())
            ]


# ---------------------------------------------------------------------------
# Submission orchestration
# ---------------------------------------------------------------------------


class PluginService:
    """Binds the registry, cache, and queue into the submit/poll protocol."""

    def __init__(self, registry: RunRegistry, queue: JobQueue) -> None:
        self.registry = registry
        self.queue = queue

    def _plugin(self, name: str) -> Plugin:
        plugin = PLUGINS.get(name)
        if plugin is None:
            raise ServiceError(404, f"unknown plugin {name!r}; valid plugins: {sorted(PLUGINS)}")
        return plugin

    def submit(self, plugin_name: str, target: str, inputs: dict) -> dict:
        plugin = self._plugin(plugin_name)
        view = self.registry.resolve(target)
        pinned: dict[str, RunLike] = {target: view}

        def resolve(other: str) -> RunLike:
            if other not in pinned:
                pinned[other] = self.registry.resolve(other)
            return pinned[other]

        ctx = PluginContext(resolve=resolve)
        try:
            canonical = canonical_inputs(plugin, view, inputs, ctx)
        except InputError as exc:
            raise ServiceError(400, str(exc)) from exc

        targets = [(target, view.content_hash)]
        for other in canonical.get("compare", []):
            targets.append((other, resolve(other).content_hash))
        key = cache_key(plugin_name, targets, canonical)

        cached = self.registry.cache.get(key)
        if cached is not None:
            return {"cached": cached}

        run_ids = []
        for tid, _ in targets:
            run_ids.extend(self.registry.dependency_run_ids(tid))
        if plugin.fast:
            try:
                envelope = compute_envelope(plugin, view, canonical, ctx)
            except (InputError, ValidationError) as exc:
                raise ServiceError(400, str(exc)) from exc
            self.registry.cache.put(key, envelope, run_ids)
            return {"cached": envelope}

        record = JobRecord(
            job_id=uuid.uuid4().hex,
            plugin=plugin_name,
            target=target,
            inputs=canonical,
            run_hash=view.content_hash,
        )
        job_id = self.queue.submit(
            key,
            record,
            fn=lambda: compute_envelope(plugin, view, canonical, ctx),
            on_done=lambda k, envelope: self.registry.cache.put(k, envelope, run_ids),
        )
        return {"job_id": job_id}

    def poll(self, job_id: str) -> dict:
        return self.queue.poll(job_id).snapshot()


# ---------------------------------------------------------------------------
# HTTP app
# ---------------------------------------------------------------------------

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>optboard</title></head>
<body><h1>optboard API</h1>
<p>No dashboard assets found. The JSON API is live under <code>/api</code>.</p>
</body></html>
"""


def create_app(
    registry: RunRegistry,
    queue: JobQueue | None = None,
    poll_interval_s: float = 10.0,
    assets_dir: Path | None = None,
) -> FastAPI:
    queue = queue or JobQueue()
    service = PluginService(registry, queue)
    stop_event = threading.Event()

    def poll_loop() -> None:
        while not stop_event.wait(poll_interval_s):
            try:
                registry.refresh_once()
            except Exception:
                logger.exception("refresh loop iteration failed")

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        thread = threading.Thread(target=poll_loop, name="optboard-refresh", daemon=True)
        thread.start()
        try:
            yield
        finally:
            stop_event.set()
            thread.join(timeout=5.0)
            queue.shutdown()

    app = FastAPI(title="optboard", lifespan=lifespan)

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    @app.get("/api/runs")
    def list_runs() -> list[dict]:
        return registry.list_runs()

    @app.get("/api/groups")
    def list_groups() -> list[dict]:
        return registry.list_groups()

    @app.post("/api/groups")
    def create_group(body: dict) -> dict:
        name = body.get("name")
        run_ids = body.get("run_ids")
        if not isinstance(name, str):
            raise ServiceError(400, "name: must be a string")
        if not isinstance(run_ids, list) or not all(isinstance(r, str) for r in run_ids):
            raise ServiceError(400, "run_ids: must be a list of run ids")
        try:
            group = registry.create_group(name, run_ids)
        except GroupError as exc:
            raise ServiceError(400, str(exc)) from exc
        return {"name": group.name, "run_ids": list(group.run_ids)}

    @app.delete("/api/groups/{name}")
    def delete_group(name: str) -> dict:
        registry.delete_group(name)
        return {"deleted": name}

    @app.get("/api/runs/{run_id}/config/{config_id}")
    def config_detail(run_id: str, config_id: int) -> dict:
        run = registry.get_run(run_id)
        if not 0 <= config_id < len(run.configs):
            raise ServiceError(404, f"unknown config {config_id} in run {run_id!r}")
        config = run.configs[config_id]
        per_budget = []
        for budget in run.budgets:
            row: dict[str, Any] = {"budget": budget, "costs": {}}
            for objective in run.objectives:
                costs = costs_at_budget(run, objective, budget, mode="exact")
                row["costs"][objective.name] = costs.get(config_id)
            per_budget.append(row)
        return {
            "run_id": run_id,
            "config_id": config_id,
            "origin": {"run_id": run_id, "meta": dict(run.meta)},
            "values": dict(config.values),
            "active": sorted(validate_config(config, run.space)),
            "per_budget_costs": per_budget,
            "native_line": ingest.config_line(config_id, config),
        }

    @app.post("/api/plugins/{plugin}/submit")
    def submit(plugin: str, body: dict) -> dict:
        target = body.get("target")
        if not isinstance(target, str):
            raise ServiceError(400, "target: must be a run or group id")
        inputs = body.get("inputs") or {}
        if not isinstance(inputs, dict):
            raise ServiceError(400, "inputs: must be an object")
        return service.submit(plugin, target, inputs)

    @app.get("/api/jobs/{job_id}")
    def poll_job(job_id: str) -> dict:
        return service.poll(job_id)

    if assets_dir is not None and Path(assets_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(assets_dir), html=True), name="dashboard")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return _PLACEHOLDER_PAGE

    return app
