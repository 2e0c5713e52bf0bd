"""Service: cache correctness, job lifecycle, coalescing, groups, HTTP API."""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from optboard import plugins as plugin_mod
from optboard.ingest import parse_config_line, write_native
from optboard.model import Status
from optboard.plugins import PLUGINS, Plugin
from optboard.service import (
    JobQueue,
    JobRecord,
    RunRegistry,
    ServiceError,
    PluginService,
    cache_key,
    create_app,
)

from conftest import build_run, make_fixture_run


@pytest.fixture
def registry(tmp_path):
    reg = RunRegistry(groups_file=tmp_path / ".groups.json")
    reg.add_run(make_fixture_run(run_id="alpha", seed=1))
    reg.add_run(make_fixture_run(run_id="beta", seed=2))
    return reg


@pytest.fixture
def service(registry):
    svc = PluginService(registry, JobQueue(workers=2, timeout_s=30))
    yield svc
    svc.queue.shutdown()


def _wait_done(service: PluginService, job_id: str, timeout: float = 10.0) -> dict:
    deadline = time.time() + timeout
    while time.time() < deadline:
        snap = service.poll(job_id)
        if snap["state"] in ("done", "failed"):
            return snap
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} did not finish")


@pytest.fixture
def fake_plugin():
    """A slow fake plugin that blocks until released; unregisters on teardown."""
    release = threading.Event()
    started = threading.Event()

    def compute(view, inputs, ctx):
        started.set()
        if not release.wait(timeout=30):
            raise TimeoutError("never released")
        return {"answer": 42}, []

    plugin = Plugin(
        name="blocker",
        fast=False,
        validate=lambda view, inputs, ctx: {"tag": inputs.get("tag", "t")},
        compute=compute,
    )
    PLUGINS[plugin.name] = plugin
    try:
        yield plugin, release, started
    finally:
        release.set()
        PLUGINS.pop(plugin.name, None)


# -- cache and staleness --------------------------------------------------------


def test_second_identical_request_hits_cache(service):
    first = service.submit("overview", "alpha", {})
    assert "cached" in first  # fast plugin: synchronous
    second = service.submit("overview", "alpha", {})
    assert second["cached"] is first["cached"]


def test_cached_equals_forced_recompute(service, registry):
    envelope = service.submit("overview", "alpha", {})["cached"]
    view = registry.resolve("alpha")
    plugin = PLUGINS["overview"]
    canonical = plugin_mod.canonical_inputs(plugin, view, {})
    recomputed = plugin_mod.compute_envelope(plugin, view, canonical)
    dumps = lambda e: json.dumps(e, sort_keys=True)
    assert dumps(envelope) == dumps(recomputed)


def test_hash_change_triggers_recompute(service, registry):
    first = service.submit("overview", "alpha", {})["cached"]
    run = registry.get_run("alpha")
    appended = build_run(
        run_id="alpha",
        space=run.space,
        objectives=run.objectives,
        budgets=run.budgets,
        configs=list(run.configs),
        trials=[(0, 11.11, (0.5, 1.0), Status.SUCCESS)],
    )
    registry.add_run(appended)  # new content hash
    second = service.submit("overview", "alpha", {})["cached"]
    assert second is not first
    assert second["data"]["total_trials"] == 1


def test_unknown_plugin_404_lists_names(service):
    with pytest.raises(ServiceError) as err:
        service.submit("nonsense", "alpha", {})
    assert err.value.status_code == 404
    assert "overview" in err.value.detail


def test_unknown_target_404(service):
    with pytest.raises(ServiceError) as err:
        service.submit("overview", "ghost", {})
    assert err.value.status_code == 404


def test_invalid_inputs_400_names_field(service):
    with pytest.raises(ServiceError) as err:
        service.submit("overview", "alpha", {"budget": 47.0})
    assert err.value.status_code == 400
    assert "budget" in err.value.detail


# -- job queue --------------------------------------------------------------------


def test_slow_plugin_goes_through_queue(service):
    out = service.submit("importance", "alpha", {"n_trees": 2, "seed": 0})
    assert "job_id" in out
    snap = _wait_done(service, out["job_id"])
    assert snap["state"] == "done"
    assert snap["result"]["plugin"] == "importance"
    # done result is now cached: identical submit returns it synchronously
    again = service.submit("importance", "alpha", {"n_trees": 2, "seed": 0})
    assert again["cached"] == snap["result"]


def test_concurrent_identical_submissions_coalesce(service, fake_plugin):
    plugin, release, started = fake_plugin
    first = service.submit("blocker", "alpha", {})
    second = service.submit("blocker", "alpha", {})
    assert first == second  # same job id while in flight
    release.set()
    snap = _wait_done(service, first["job_id"])
    assert snap["state"] == "done"


def test_worker_exception_fails_job_and_stays_healthy(service):
    boom = Plugin(
        name="boom",
        fast=False,
        validate=lambda view, inputs, ctx: {},
        compute=lambda view, inputs, ctx: (_ for _ in ()).throw(RuntimeError("kapow")),
    )
    PLUGINS[boom.name] = boom
    try:
        out = service.submit("boom", "alpha", {})
        snap = _wait_done(service, out["job_id"])
        assert snap["state"] == "failed"
        assert "kapow" in snap["error"]
        # queue still serves other work
        ok = service.submit("overview", "alpha", {})
        assert "cached" in ok
    finally:
        PLUGINS.pop("boom", None)


def test_queue_liveness_single_worker(registry):
    service = PluginService(registry, JobQueue(workers=1, timeout_s=30))
    gate = threading.Event()
    calls = []

    def compute(view, inputs, ctx):
        gate.wait(timeout=5)
        calls.append(inputs["k"])
        return {"k": inputs["k"]}, []

    slowpoke = Plugin(
        name="slowpoke",
        fast=False,
        validate=lambda view, inputs, ctx: {"k": inputs["k"]},
        compute=compute,
    )
    PLUGINS[slowpoke.name] = slowpoke
    try:
        jobs = [service.submit("slowpoke", "alpha", {"k": i})["job_id"] for i in range(5)]
        gate.set()
        states = {_wait_done(service, j)["state"] for j in jobs}
        assert states == {"done"}
        assert sorted(calls) == [0, 1, 2, 3, 4]
    finally:
        PLUGINS.pop("slowpoke", None)
        service.queue.shutdown()


def test_job_timeout_marks_failed(registry, fake_plugin):
    plugin, release, started = fake_plugin
    service = PluginService(registry, JobQueue(workers=1, timeout_s=0.1))
    try:
        out = service.submit("blocker", "alpha", {})
        assert started.wait(timeout=5)
        time.sleep(0.15)
        snap = service.poll(out["job_id"])
        assert snap["state"] == "failed"
        assert snap["error"] == "timeout"
        release.set()
    finally:
        service.queue.shutdown()


def test_poll_unknown_job_404(service):
    with pytest.raises(ServiceError) as err:
        service.poll("nope")
    assert err.value.status_code == 404


def test_job_state_transitions(service, fake_plugin):
    plugin, release, started = fake_plugin
    out = service.submit("blocker", "alpha", {})
    assert started.wait(timeout=5)
    snap = service.poll(out["job_id"])
    assert snap["state"] == "running"
    assert snap["result"] is None
    release.set()
    done = _wait_done(service, out["job_id"])
    assert done["state"] == "done"
    assert done["result"]["data"] == {"answer": 42}


# -- groups ------------------------------------------------------------------------


def test_group_create_resolve_delete(registry):
    registry.create_group("pair", ["alpha", "beta"])
    view = registry.resolve("pair")
    a, b = registry.get_run("alpha"), registry.get_run("beta")
    assert len(view.trials) == len(a.trials) + len(b.trials)
    assert registry.list_groups() == [{"name": "pair", "run_ids": ["alpha", "beta"]}]
    registry.delete_group("pair")
    with pytest.raises(ServiceError):
        registry.resolve("pair")


def test_group_persists_across_restart(registry, tmp_path):
    registry.create_group("keep", ["alpha"])
    reborn = RunRegistry(groups_file=tmp_path / ".groups.json")
    reborn.add_run(make_fixture_run(run_id="alpha", seed=1))
    assert reborn.list_groups() == [{"name": "keep", "run_ids": ["alpha"]}]


def test_group_unknown_member_404(registry):
    with pytest.raises(ServiceError) as err:
        registry.create_group("bad", ["alpha", "ghost"])
    assert err.value.status_code == 404


def test_group_mismatch_surfaces_merge_error(registry):
    mono = build_run(run_id="mono", trials=[(0, 11.11, (0.1,), Status.SUCCESS)])
    registry.add_run(mono)
    with pytest.raises((ServiceError, Exception)) as err:
        registry.create_group("bad", ["alpha", "mono"])
    assert "objective mismatch" in str(err.value)


def test_group_submission_uses_merged_view(service, registry):
    registry.create_group("both", ["alpha", "beta"])
    envelope = service.submit("overview", "both", {})["cached"]
    total = (
        len(registry.get_run("alpha").trials) + len(registry.get_run("beta").trials)
    )
    assert envelope["data"]["total_trials"] == total
    assert envelope["target"] == "both"


def test_pareto_compare_keys_include_all_sources(service, registry):
    out = service.submit("pareto", "alpha", {"compare": ["beta"]})
    envelope = out["cached"]
    assert [s["id"] for s in envelope["data"]["sources"]] == ["alpha", "beta"]


# -- HTTP API ------------------------------------------------------------------------


@pytest.fixture
def client(tmp_path):
    runs_dir = tmp_path / "runs"
    runs_dir.mkdir()
    write_native(make_fixture_run(run_id="web", seed=3), runs_dir / "web")
    registry = RunRegistry(groups_file=runs_dir / ".groups.json")
    registry.scan_directory(runs_dir)
    app = create_app(registry, queue=JobQueue(workers=2), poll_interval_s=60.0)
    with TestClient(app) as c:
        yield c


def test_api_list_runs(client):
    runs = client.get("/api/runs").json()
    assert len(runs) == 1
    run = runs[0]
    assert run["id"] == "web"
    assert run["budgets"] == [11.11, 33.33, 100.0]
    assert {o["name"] for o in run["objectives"]} == {"cost", "time"}
    assert run["hash"]
    assert run["last_refresh"]


def test_api_group_roundtrip(client):
    created = client.post("/api/groups", json={"name": "g1", "run_ids": ["web"]})
    assert created.status_code == 200
    assert client.get("/api/groups").json() == [{"name": "g1", "run_ids": ["web"]}]
    assert client.delete("/api/groups/g1").json() == {"deleted": "g1"}
    assert client.get("/api/groups").json() == []
    assert client.delete("/api/groups/g1").status_code == 404


def test_api_group_unknown_member(client):
    resp = client.post("/api/groups", json={"name": "g2", "run_ids": ["ghost"]})
    assert resp.status_code == 404


def test_api_submit_and_poll(client):
    out = client.post(
        "/api/plugins/importance/submit",
        json={"target": "web", "inputs": {"n_trees": 2}},
    ).json()
    assert "job_id" in out
    deadline = time.time() + 15
    while time.time() < deadline:
        snap = client.get(f"/api/jobs/{out['job_id']}").json()
        if snap["state"] in ("done", "failed"):
            break
        time.sleep(0.05)
    assert snap["state"] == "done"
    assert snap["result"]["plugin"] == "importance"


def test_api_submit_fast_plugin_cached(client):
    out = client.post("/api/plugins/overview/submit", json={"target": "web"}).json()
    assert "cached" in out
    assert "report" in out["cached"]["data"]


def test_api_submit_errors(client):
    assert client.post("/api/plugins/nope/submit", json={"target": "web"}).status_code == 404
    assert client.post("/api/plugins/overview/submit", json={"target": "nope"}).status_code == 404
    bad = client.post(
        "/api/plugins/overview/submit", json={"target": "web", "inputs": {"budget": 3.0}}
    )
    assert bad.status_code == 400
    assert "budget" in bad.json()["detail"]


def test_api_config_detail_and_native_roundtrip(client):
    detail = client.get("/api/runs/web/config/0").json()
    assert detail["run_id"] == "web"
    assert detail["config_id"] == 0
    assert detail["values"]
    assert detail["per_budget_costs"][0]["budget"] == 11.11
    cid, config = parse_config_line(detail["native_line"])
    assert cid == 0
    assert dict(config.values) == detail["values"]


def test_api_config_detail_404(client):
    assert client.get("/api/runs/web/config/99999").status_code == 404
    assert client.get("/api/runs/ghost/config/0").status_code == 404


def test_api_placeholder_index(client):
    resp = client.get("/")
    assert resp.status_code == 200
    assert "optboard" in resp.text


def test_api_serves_built_dashboard_assets(tmp_path):
    assets = tmp_path / "dist"
    assets.mkdir()
    (assets / "index.html").write_text("<html><body id='dash'>dash</body></html>")
    (assets / "app.js").write_text("console.log('dash');")
    registry = RunRegistry()
    registry.add_run(make_fixture_run(run_id="assets-run"))
    app = create_app(
        registry, queue=JobQueue(workers=1), poll_interval_s=60.0, assets_dir=assets
    )
    with TestClient(app) as client:
        assert "dash" in client.get("/").text
        assert "console" in client.get("/app.js").text
        assert client.get("/api/runs").json()[0]["id"] == "assets-run"
