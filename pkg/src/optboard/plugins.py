"""The five analysis plugins behind the service: input validation with
defaults, JSON-ready result payloads, and the shared output envelope.

Envelope shape:
    {"plugin": str, "target": str, "inputs": {...}, "computed_at": iso8601,
     "data": plugin-specific JSON, "warnings": [str]}

``computed_at`` is the timestamp of the data snapshot the result was
computed from (the newest source file at load time), so identical run state
plus identical inputs always produce byte-identical envelopes.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Callable

from . import analysis, footprint, importance
from .model import (
    Direction,
    RunLike,
    Status,
    ValidationError,
    costs_at_budget,
    encode,
    incumbent,
)

__all__ = [
    "InputError",
    "PluginContext",
    "Plugin",
    "PLUGINS",
    "plugin_names",
    "compute_envelope",
    "canonical_inputs",
]


class InputError(ValueError):
    """A request parameter failed validation; ``field`` names the culprit."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class PluginContext:
    """Resolves additional target ids (used by cross-run comparisons)."""

    resolve: Callable[[str], RunLike]


def _single_context(view: RunLike) -> PluginContext:
    def resolve(target: str) -> RunLike:
        if target == view.id:
            return view
        raise InputError("compare", f"unknown target {target!r}")

    return PluginContext(resolve=resolve)


@dataclass(frozen=True)
class Plugin:
    name: str
    fast: bool  # fast plugins run synchronously; slow ones go through the queue
    validate: Callable[[RunLike, dict, PluginContext], dict]
    compute: Callable[[RunLike, dict, PluginContext], tuple[Any, list[str]]]


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------


def _check_objective(view: RunLike, inputs: dict, field: str, default_index: int = 0) -> str:
    name = inputs.get(field)
    if name is None:
        if len(view.objectives) <= default_index:
            raise InputError(field, "run does not expose enough objectives")
        return view.objectives[default_index].name
    try:
        view.objective_index(name)
    except ValidationError as exc:
        raise InputError(field, str(exc)) from exc
    return str(name)


def _check_budget(view: RunLike, inputs: dict, field: str = "budget") -> float:
    value = inputs.get(field)
    if value is None:
        if not view.budgets:
            raise InputError(field, "run has no budgets")
        return float(view.budgets[-1])
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise InputError(field, "must be a number")
    if float(value) not in view.budgets:
        raise InputError(field, f"{value} not in run budgets {list(view.budgets)}")
    return float(value)


def _check_int(inputs: dict, field: str, default: int, lo: int, hi: int) -> int:
    value = inputs.get(field, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(field, "must be an integer")
    if not lo <= value <= hi:
        raise InputError(field, f"must be in [{lo}, {hi}]")
    return value


def _check_bool(inputs: dict, field: str, default: bool) -> bool:
    value = inputs.get(field, default)
    if not isinstance(value, bool):
        raise InputError(field, "must be a boolean")
    return value


def _reject_unknown(inputs: dict, allowed: set[str]) -> None:
    for key in inputs:
        if key not in allowed:
            raise InputError(key, "unknown input")


# ---------------------------------------------------------------------------
# overview
# ---------------------------------------------------------------------------


def _overview_validate(view: RunLike, inputs: dict, ctx: PluginContext) -> dict:
    _reject_unknown(inputs, {"budget"})
    budget = inputs.get("budget")
    return {"budget": None if budget is None else _check_budget(view, inputs)}


def _overview_compute(view: RunLike, inputs: dict, ctx: PluginContext) -> tuple[Any, list[str]]:
    breakdown = analysis.status_breakdown(view, budget=inputs["budget"])
    matrix = analysis.status_matrix(view)
    data = {
        "report": analysis.render_status_report(breakdown),
        "total_trials": breakdown.total,
        "counts": {status.value: breakdown.counts[status] for status in Status},
        "per_budget_fraction": [
            {"budget": b, "fraction": breakdown.per_budget_fraction[b]}
            for b in sorted(breakdown.per_budget_fraction)
        ],
        "failures": [
            {
                "config_id": cid,
                "budget": budget,
                "status": status.value,
                "traceback": traceback,
            }
            for cid, budget, status, traceback in breakdown.failures
        ],
        "matrix": {
            "config_ids": list(matrix.config_ids),
            "budgets": list(matrix.budgets),
            "status": [[s.value for s in row] for row in matrix.grid],
        },
    }
    return data, []


# ---------------------------------------------------------------------------
# budget_correlation
# ---------------------------------------------------------------------------


def _correlation_validate(view: RunLike, inputs: dict, ctx: PluginContext) -> dict:
    _reject_unknown(inputs, {"objective"})
    if len(view.budgets) < 2:
        raise InputError("target", "budget correlation needs at least 2 budgets")
    return {"objective": _check_objective(view, inputs, "objective")}


def _correlation_summary(matrix: analysis.CorrelationMatrix) -> str:
    m = len(matrix.budgets)
    defined = [
        (i, j)
        for i in range(m)
        for j in range(i + 1, m)
        if matrix.coefficient[i][j] is not None
    ]
    if not defined:
        return "Not enough common configurations to correlate any budget combination."
    if all(abs(matrix.coefficient[i][j]) >= 0.8 for i, j in defined):
        return "All budget combinations have a very strong correlation."
    wi, wj = min(defined, key=lambda ij: abs(matrix.coefficient[ij[0]][ij[1]]))
    label = matrix.label(wi, wj)
    return (
        f"The weakest budget combination ({analysis.format_number(matrix.budgets[wi])} and "
        f"{analysis.format_number(matrix.budgets[wj])}) shows a {label} correlation."
    )


def _correlation_compute(view: RunLike, inputs: dict, ctx: PluginContext) -> tuple[Any, list[str]]:
    matrix = analysis.budget_correlation(view, inputs["objective"])
    m = len(matrix.budgets)
    data = {
        "objective": inputs["objective"],
        "budgets": list(matrix.budgets),
        "coefficient": [list(row) for row in matrix.coefficient],
        "support": [list(row) for row in matrix.support],
        "labels": [[matrix.label(i, j) for j in range(m)] for i in range(m)],
        "summary": _correlation_summary(matrix),
    }
    return data, []


# ---------------------------------------------------------------------------
# pareto
# ---------------------------------------------------------------------------


def _pareto_validate(view: RunLike, inputs: dict, ctx: PluginContext) -> dict:
    _reject_unknown(inputs, {"objective_x", "objective_y", "budget", "compare"})
    compare = inputs.get("compare", [])
    if not isinstance(compare, list) or not all(isinstance(c, str) for c in compare):
        raise InputError("compare", "must be a list of target ids")
    out = {
        "objective_x": _check_objective(view, inputs, "objective_x", default_index=0),
        "objective_y": _check_objective(view, inputs, "objective_y", default_index=1),
        "budget": _check_budget(view, inputs),
        "compare": list(compare),
    }
    for target in compare:
        other = ctx.resolve(target)
        for field, name in (("objective_x", out["objective_x"]), ("objective_y", out["objective_y"])):
            try:
                other.objective_index(name)
            except ValidationError as exc:
                raise InputError(field, f"source {target!r}: {exc}") from exc
    return out


def _pareto_compute(view: RunLike, inputs: dict, ctx: PluginContext) -> tuple[Any, list[str]]:
    sources = [view] + [ctx.resolve(t) for t in inputs["compare"]]
    results = analysis.pareto_compare(
        sources, inputs["objective_x"], inputs["objective_y"], inputs["budget"]
    )
    data = {
        "objective_x": inputs["objective_x"],
        "objective_y": inputs["objective_y"],
        "budget": inputs["budget"],
        "sources": [
            {
                "id": source.id,
                "points": [
                    {
                        "config_id": p.config_id,
                        "origin_run_id": p.origin_run_id,
                        "origin_config_id": p.origin_config_id,
                        "x": p.x,
                        "y": p.y,
                        "dominated": p.dominated,
                    }
                    for p in source.points
                ],
            }
            for source in results
        ],
    }
    return data, []


# ---------------------------------------------------------------------------
# footprint
# ---------------------------------------------------------------------------


def _footprint_validate(view: RunLike, inputs: dict, ctx: PluginContext) -> dict:
    _reject_unknown(inputs, {"objective", "budget", "n_border", "n_random", "seed", "refine"})
    return {
        "objective": _check_objective(view, inputs, "objective"),
        "budget": _check_budget(view, inputs),
        "n_border": _check_int(inputs, "n_border", default=100, lo=0, hi=10000),
        "n_random": _check_int(inputs, "n_random", default=100, lo=0, hi=10000),
        "seed": _check_int(inputs, "seed", default=0, lo=0, hi=2**31 - 1),
        "refine": _check_bool(inputs, "refine", default=False),
    }


def _footprint_compute(view: RunLike, inputs: dict, ctx: PluginContext) -> tuple[Any, list[str]]:
    points = footprint.build_footprint(
        view,
        inputs["objective"],
        inputs["budget"],
        n_border=inputs["n_border"],
        n_random=inputs["n_random"],
        seed=inputs["seed"],
        refine=inputs["refine"],
    )
    data = {
        "objective": inputs["objective"],
        "budget": inputs["budget"],
        "seed": inputs["seed"],
        "points": [
            {
                "x": p.x,
                "y": p.y,
                "kind": p.kind,
                "config_id": p.config_id,
                "origin_run_id": view.origin_of(p.config_id)[0] if p.config_id is not None else None,
                "origin_config_id": view.origin_of(p.config_id)[1] if p.config_id is not None else None,
                "cost": p.cost,
                "values": p.values,
            }
            for p in points
        ],
    }
    return data, []


# ---------------------------------------------------------------------------
# importance
# ---------------------------------------------------------------------------


def _importance_validate(view: RunLike, inputs: dict, ctx: PluginContext) -> dict:
    _reject_unknown(
        inputs, {"method", "objective", "budget", "n_trees", "seed", "min_leaf", "grid", "order"}
    )
    method = inputs.get("method", "fanova")
    if method not in ("fanova", "lpi"):
        raise InputError("method", "must be 'fanova' or 'lpi'")
    return {
        "method": method,
        "objective": _check_objective(view, inputs, "objective"),
        "budget": _check_budget(view, inputs),
        "n_trees": _check_int(inputs, "n_trees", default=16, lo=1, hi=256),
        "seed": _check_int(inputs, "seed", default=0, lo=0, hi=2**31 - 1),
        "min_leaf": _check_int(inputs, "min_leaf", default=3, lo=1, hi=10000),
        "grid": _check_int(inputs, "grid", default=20, lo=2, hi=1000),
        "order": _check_int(inputs, "order", default=1, lo=1, hi=2),
    }


def _score_name(names: tuple[str, ...], dims: tuple[int, ...]) -> str:
    return " & ".join(names[k] for k in dims)


def _importance_compute(view: RunLike, inputs: dict, ctx: PluginContext) -> tuple[Any, list[str]]:
    objective = view.objectives[view.objective_index(inputs["objective"])]
    costs = costs_at_budget(view, objective, inputs["budget"], mode="highest_seen")
    if len(costs) < 2:
        raise ValidationError("importance needs at least 2 evaluated configurations")
    cids = sorted(costs)
    x = [encode(view.configs[cid], view.space) for cid in cids]
    sign = 1.0 if objective.direction is Direction.MINIMIZE else -1.0
    y = [sign * costs[cid] for cid in cids]
    forest = importance.fit_forest(
        x,
        y,
        n_trees=inputs["n_trees"],
        seed=inputs["seed"],
        min_leaf=inputs["min_leaf"],
        dims=importance.dims_from_space(view.space),
    )
    names = view.space.names
    data: dict[str, Any] = {
        "method": inputs["method"],
        "objective": inputs["objective"],
        "budget": inputs["budget"],
        "n_trees": inputs["n_trees"],
        "seed": inputs["seed"],
    }
    warnings: list[str] = []
    if inputs["method"] == "fanova":
        scores = importance.fanova(forest, order_max=inputs["order"])
        data["scores"] = [
            {"name": _score_name(names, s.dims), "mean": s.mean, "std": s.std}
            for s in scores
        ]
    else:
        best = incumbent(view, objective, inputs["budget"], mode="highest_seen")
        result = importance.lpi(
            forest, view.configs[best[0]], view.space, grid=inputs["grid"]
        )
        data["incumbent_config_id"] = best[0]
        data["flat_neighborhood"] = result.flat_neighborhood
        data["scores"] = [
            {"name": _score_name(names, s.dims), "mean": s.mean, "std": s.std}
            for s in result.scores
        ]
        if result.flat_neighborhood:
            warnings.append("flat neighborhood: the surrogate is constant around the incumbent")
    return data, warnings


# ---------------------------------------------------------------------------
# Registry and envelope
# ---------------------------------------------------------------------------


PLUGINS: dict[str, Plugin] = {
    p.name: p
    for p in (
        Plugin("overview", True, _overview_validate, _overview_compute),
        Plugin("footprint", False, _footprint_validate, _footprint_compute),
        Plugin("budget_correlation", True, _correlation_validate, _correlation_compute),
        Plugin("pareto", True, _pareto_validate, _pareto_compute),
        Plugin("importance", False, _importance_validate, _importance_compute),
    )
}


def plugin_names() -> list[str]:
    return sorted(PLUGINS)


def canonical_inputs(
    plugin: Plugin, view: RunLike, inputs: dict, ctx: PluginContext | None = None
) -> dict:
    """Validated inputs with every default filled (the cache-key form)."""
    return plugin.validate(view, dict(inputs or {}), ctx or _single_context(view))


def compute_envelope(
    plugin: Plugin, view: RunLike, inputs: dict, ctx: PluginContext | None = None
) -> dict:
    """Run a plugin synchronously and wrap the result in the output envelope."""
    ctx = ctx or _single_context(view)
    data, warnings = plugin.compute(view, inputs, ctx)
    load_warnings = list(view.meta.get("load_warnings", []))
    return {
        "plugin": plugin.name,
        "target": view.id,
        "inputs": inputs,
        "computed_at": datetime.fromtimestamp(view.data_timestamp, tz=timezone.utc).isoformat(),
        "data": data,
        "warnings": load_warnings + warnings,
    }
