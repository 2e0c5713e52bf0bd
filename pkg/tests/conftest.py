"""Shared fixtures: configuration spaces, run builders, and native-format
directories used across the suite.  Also prints one pass/fail line per
acceptance criterion at the end of the session."""

from __future__ import annotations

import numpy as np
import pytest

from optboard.ingest import write_native
from optboard.model import (
    Condition,
    Configuration,
    ConfigurationSpace,
    Direction,
    Hyperparameter,
    Kind,
    Objective,
    Run,
    Status,
    Trial,
)


@pytest.fixture
def simple_space() -> ConfigurationSpace:
    return ConfigurationSpace(
        hyperparameters=(
            Hyperparameter(name="x", kind=Kind.CONTINUOUS, lower=0.0, upper=10.0),
        )
    )


@pytest.fixture
def cond_space() -> ConfigurationSpace:
    """model in {ae, vae}; latent_dim active iff model = vae; lr log-scaled."""
    return ConfigurationSpace(
        hyperparameters=(
            Hyperparameter(name="model", kind=Kind.CATEGORICAL, choices=("ae", "vae")),
            Hyperparameter(
                name="latent_dim",
                kind=Kind.INTEGER,
                lower=2,
                upper=16,
                condition=Condition(parent="model", values=("vae",)),
            ),
            Hyperparameter(
                name="lr", kind=Kind.CONTINUOUS, lower=1e-4, upper=1.0, log_scale=True
            ),
        )
    )


def build_run(
    run_id: str = "run",
    space: ConfigurationSpace | None = None,
    objectives: tuple[Objective, ...] | None = None,
    budgets: tuple[float, ...] = (11.11, 33.33, 100.0),
    configs: list[Configuration] | None = None,
    trials: list[tuple] | None = None,
) -> Run:
    """Assemble a Run from terse trial tuples: (config_id, budget, costs, status[, additional])."""
    if space is None:
        space = ConfigurationSpace(
            hyperparameters=(
                Hyperparameter(name="x", kind=Kind.CONTINUOUS, lower=0.0, upper=10.0),
            )
        )
    if objectives is None:
        objectives = (Objective(name="cost", direction=Direction.MINIMIZE),)
    if configs is None:
        n = 1 + max((t[0] for t in trials or []), default=-1)
        configs = [Configuration(values={"x": (i % 101) / 10.0}) for i in range(n)]
    built_trials = []
    for i, spec in enumerate(trials or []):
        cid, budget, costs, status = spec[:4]
        additional = spec[4] if len(spec) > 4 else {}
        built_trials.append(
            Trial(
                config_id=cid,
                budget=budget,
                costs=tuple(costs) if costs is not None else None,
                status=status,
                start=float(i),
                end=float(i) + 0.5 if status is not Status.RUNNING else None,
                additional=additional,
            )
        )
    return Run(
        id=run_id,
        meta={"optimizer": "fixture"},
        space=space,
        objectives=objectives,
        budgets=budgets,
        configs=tuple(configs),
        trials=tuple(built_trials),
        content_hash=f"hash-{run_id}",
    )


@pytest.fixture
def run_factory():
    return build_run


def make_fixture_run(
    run_id: str = "fixture",
    n_configs: int = 80,
    seed: int = 7,
    space: ConfigurationSpace | None = None,
) -> Run:
    """A deterministic medium run: 2 objectives, 3 budgets, mixed statuses."""
    rng = np.random.default_rng(seed)
    if space is None:
        space = ConfigurationSpace(
            hyperparameters=(
                Hyperparameter(name="model", kind=Kind.CATEGORICAL, choices=("ae", "vae")),
                Hyperparameter(
                    name="latent_dim",
                    kind=Kind.INTEGER,
                    lower=2,
                    upper=16,
                    condition=Condition(parent="model", values=("vae",)),
                ),
                Hyperparameter(
                    name="lr", kind=Kind.CONTINUOUS, lower=1e-4, upper=1.0, log_scale=True
                ),
                Hyperparameter(name="batch", kind=Kind.ORDINAL, choices=(16, 32, 64, 128)),
            )
        )
    objectives = (
        Objective(name="cost", direction=Direction.MINIMIZE),
        Objective(name="time", direction=Direction.MINIMIZE),
    )
    budgets = (11.11, 33.33, 100.0)
    configs: list[Configuration] = []
    for _ in range(n_configs):
        values = {"model": ("ae", "vae")[rng.integers(0, 2)]}
        if values["model"] == "vae":
            values["latent_dim"] = int(rng.integers(2, 17))
        values["lr"] = float(np.exp(rng.uniform(np.log(1e-4), 0.0)))
        values["batch"] = (16, 32, 64, 128)[rng.integers(0, 4)]
        configs.append(Configuration(values=values))
    trials: list[Trial] = []
    clock = 0.0
    for cid, config in enumerate(configs):
        base = float(np.log10(config.values["lr"]) ** 2 / 16.0 + rng.normal(0.0, 0.02))
        promote = int(rng.integers(1, 4))  # how many budgets this config climbs
        for level in range(promote):
            budget = budgets[level]
            roll = rng.random()
            if roll < 0.06:
                status = Status.CRASHED
                costs = None
                additional = {"traceback": f"RuntimeError: boom in config {cid}"}
            elif roll < 0.08:
                status = Status.TIMEOUT
                costs = None
                additional = {}
            else:
                status = Status.SUCCESS
                cost = max(0.0, base + 0.3 / (1.0 + budget))
                costs = (cost, float(budget * (0.8 + 0.4 * rng.random())))
                additional = {}
            trials.append(
                Trial(
                    config_id=cid,
                    budget=budget,
                    costs=costs,
                    status=status,
                    start=clock,
                    end=clock + 1.0,
                    additional=additional,
                )
            )
            clock += 1.0
            if status is not Status.SUCCESS:
                break
    return Run(
        id=run_id,
        meta={"optimizer": "fixture-gen", "seed": str(seed)},
        space=space,
        objectives=objectives,
        budgets=budgets,
        configs=tuple(configs),
        trials=tuple(trials),
        content_hash=f"hash-{run_id}-{seed}",
    )


@pytest.fixture
def fixture_run() -> Run:
    return make_fixture_run()


@pytest.fixture
def native_run_dir(tmp_path):
    """A native-format directory holding the deterministic fixture run."""
    run = make_fixture_run(run_id="native-fixture")
    out = tmp_path / "native-fixture"
    write_native(run, out)
    return out


# -- acceptance summary -------------------------------------------------------

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        if report.when == "call":
            _acceptance_results[name] = report.outcome
        elif report.when == "setup" and report.outcome != "passed":
            _acceptance_results[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_results):
        outcome = _acceptance_results[name]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
    terminalreporter.write_line(
        "note: criterion 11 (dashboard contract) runs in the frontend vitest suite"
    )
