"""Non-surrogate analyses: status summaries, budget correlation, Pareto fronts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

from .model import (
    Direction,
    Objective,
    RunLike,
    Status,
    ValidationError,
    FAILURE_STATUSES,
    costs_at_budget,
)

__all__ = [
    "StatusBreakdown",
    "StatusMatrix",
    "CorrelationMatrix",
    "ParetoPoint",
    "ParetoSource",
    "status_breakdown",
    "render_status_report",
    "status_matrix",
    "spearman",
    "budget_correlation",
    "correlation_label",
    "pareto_front",
    "pareto_compare",
    "format_percent",
    "format_number",
]


# ---------------------------------------------------------------------------
# Status summary (overview)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StatusBreakdown:
    counts: dict[Status, int]
    per_budget_fraction: dict[float, float]
    failures: tuple[tuple[int, float, Status, str | None], ...]

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def status_breakdown(run: RunLike, budget: float | None = None) -> StatusBreakdown:
    """Counts per status, per-budget config coverage, and failure listing.

    ``budget`` filters the counts and the failure list; coverage fractions
    always span all budgets.  Coverage is the number of distinct configs
    with a trial at that budget over the size of the config table.
    """
    counts = {s: 0 for s in Status}
    failures: list[tuple[int, float, Status, str | None]] = []
    configs_at: dict[float, set[int]] = {b: set() for b in run.budgets}
    for t in run.trials:
        if t.budget in configs_at:
            configs_at[t.budget].add(t.config_id)
        if budget is not None and t.budget != budget:
            continue
        counts[t.status] += 1
        if t.status in FAILURE_STATUSES:
            failures.append(
                (t.config_id, t.budget, t.status, t.additional.get("traceback"))
            )
    n_configs = len(run.configs)
    fractions = {
        b: (len(cids) / n_configs if n_configs else 0.0) for b, cids in configs_at.items()
    }
    return StatusBreakdown(
        counts=counts,
        per_budget_fraction=fractions,
        failures=tuple(failures),
    )


def format_percent(fraction: float) -> str:
    """Format a fraction as a percentage, two decimals, half away from zero."""
    percent = Decimal(repr(fraction)) * 100
    return str(percent.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def format_number(value: float) -> str:
    """Shortest round-trip decimal form; floats keep their '.0' (100.0, 11.11)."""
    return repr(value)


def render_status_report(breakdown: StatusBreakdown) -> str:
    """Deterministic English status report.

    Sentence 1 gives the success percentage over all trials, sentence 2
    enumerates the failure statuses present (omitted when there are none),
    sentence 3 slash-joins per-budget config coverage.  Pending trials
    (running) count toward the totals but are not a failure, so they are
    not enumerated.
    """
    total = breakdown.total
    if total == 0:
        return "No trials have been evaluated yet."
    sentences = [
        "Taking all evaluated trials into account, "
        f"{format_percent(breakdown.counts[Status.SUCCESS] / total)}% have been successful."
    ]
    failure_parts = [
        f"{status.value} ({format_percent(breakdown.counts[status] / total)}%)"
        for status in FAILURE_STATUSES
        if breakdown.counts[status] > 0
    ]
    if failure_parts:
        if len(failure_parts) == 1:
            joined = failure_parts[0]
        else:
            joined = ", ".join(failure_parts[:-1]) + " and " + failure_parts[-1]
        sentences.append(f"The other trials are {joined}.")
    if breakdown.per_budget_fraction:
        budgets = sorted(breakdown.per_budget_fraction)
        fracs = "/".join(
            f"{format_percent(breakdown.per_budget_fraction[b])}%" for b in budgets
        )
        labels = "/".join(format_number(b) for b in budgets)
        sentences.append(
            f"Moreover, {fracs} of the configurations were evaluated on budget "
            f"{labels}, respectively."
        )
    return " ".join(sentences)


@dataclass(frozen=True)
class StatusMatrix:
    config_ids: tuple[int, ...]  # rows, first-seen order
    budgets: tuple[float, ...]  # columns, ascending
    grid: tuple[tuple[Status, ...], ...]


def status_matrix(run: RunLike) -> StatusMatrix:
    """Status per (config, budget); missing pairs read as not_evaluated."""
    order: list[int] = []
    seen: set[int] = set()
    cells: dict[tuple[int, float], Status] = {}
    for t in run.trials:
        if t.config_id not in seen:
            seen.add(t.config_id)
            order.append(t.config_id)
        cells[(t.config_id, t.budget)] = t.status
    budgets = tuple(run.budgets)
    grid = tuple(
        tuple(cells.get((cid, b), Status.NOT_EVALUATED) for b in budgets) for cid in order
    )
    return StatusMatrix(config_ids=tuple(order), budgets=budgets, grid=grid)


# ---------------------------------------------------------------------------
# Budget correlation
# ---------------------------------------------------------------------------


def _average_ranks(values: Sequence[float]) -> np.ndarray:
    """Ranks starting at 1; ties share the average of their positions."""
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr), dtype=float)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Spearman rank correlation with average-rank tie handling.

    Returns None for fewer than two pairs.  Degenerate rank variance is
    resolved deterministically: both sides constant -> 1.0 (identically
    ranked), exactly one side constant -> 0.0.
    """
    if len(x) != len(y):
        raise ValidationError("spearman needs equal-length sequences")
    if len(x) < 2:
        return None
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx2 = float((dx * dx).sum())
    sy2 = float((dy * dy).sum())
    if sx2 == 0.0 and sy2 == 0.0:
        return 1.0
    if sx2 == 0.0 or sy2 == 0.0:
        return 0.0
    # sqrt(sx2 * sy2) keeps rho at exactly +/-1.0 for identical/reversed ranks
    rho = float((dx * dy).sum() / math.sqrt(sx2 * sy2))
    return max(-1.0, min(1.0, rho))


@dataclass(frozen=True)
class CorrelationMatrix:
    budgets: tuple[float, ...]
    coefficient: tuple[tuple[float | None, ...], ...]
    support: tuple[tuple[int, ...], ...]

    def label(self, i: int, j: int) -> str | None:
        rho = self.coefficient[i][j]
        return None if rho is None else correlation_label(rho)


_LABEL_BINS = (
    (0.8, "very strong"),
    (0.6, "strong"),
    (0.4, "moderate"),
    (0.2, "weak"),
)


def correlation_label(rho: float) -> str:
    """Evans-style strength label on |rho|."""
    for threshold, label in _LABEL_BINS:
        if abs(rho) >= threshold:
            return label
    return "not"


def budget_correlation(run: RunLike, objective: Objective | str) -> CorrelationMatrix:
    """Spearman correlation of per-config costs between every budget pair.

    An entry is defined only when at least two configs succeeded at both
    budgets; ``support`` records that overlap count.
    """
    budgets = tuple(run.budgets)
    if len(budgets) < 2:
        raise ValidationError("budget correlation needs at least 2 budgets")
    per_budget = [costs_at_budget(run, objective, b, mode="exact") for b in budgets]
    m = len(budgets)
    coeff: list[list[float | None]] = [[None] * m for _ in range(m)]
    support = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            common = sorted(set(per_budget[i]) & set(per_budget[j]))
            support[i][j] = support[j][i] = len(common)
            if len(common) < 2:
                continue
            xs = [per_budget[i][cid] for cid in common]
            ys = [per_budget[j][cid] for cid in common]
            rho = spearman(xs, ys)
            coeff[i][j] = coeff[j][i] = rho
    return CorrelationMatrix(
        budgets=budgets,
        coefficient=tuple(tuple(row) for row in coeff),
        support=tuple(tuple(row) for row in support),
    )


# ---------------------------------------------------------------------------
# Pareto fronts
# ---------------------------------------------------------------------------


def pareto_front(
    points: Sequence[tuple[float, float]],
    directions: tuple[Direction, Direction] = (Direction.MINIMIZE, Direction.MINIMIZE),
) -> list[bool]:
    """Dominated flag per point (False = on the front).

    A point is dominated iff some other point is at least as good in both
    coordinates (per direction) and strictly better in one.  Exact
    duplicates of a front point all stay on the front.  Runs in
    O(n log n): sort on x, sweep on y.
    """
    n = len(points)
    for idx, (x, y) in enumerate(points):
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError(f"non-finite coordinate at point {idx}")
    if n == 0:
        return []
    sx = 1.0 if directions[0] is Direction.MINIMIZE else -1.0
    sy = 1.0 if directions[1] is Direction.MINIMIZE else -1.0
    norm = [(sx * x, sy * y) for x, y in points]
    order = sorted(range(n), key=lambda i: norm[i])
    dominated = [False] * n
    best_prev_y = math.inf  # best y among points with strictly smaller x
    i = 0
    while i < n:
        j = i
        x = norm[order[i]][0]
        group_min_y = math.inf
        while j < n and norm[order[j]][0] == x:
            group_min_y = min(group_min_y, norm[order[j]][1])
            j += 1
        for k in range(i, j):
            y = norm[order[k]][1]
            dominated[order[k]] = best_prev_y <= y or group_min_y < y
        best_prev_y = min(best_prev_y, group_min_y)
        i = j
    return dominated


@dataclass(frozen=True)
class ParetoPoint:
    config_id: int
    origin_run_id: str
    origin_config_id: int
    x: float
    y: float
    dominated: bool


@dataclass(frozen=True)
class ParetoSource:
    id: str
    points: tuple[ParetoPoint, ...]


def pareto_compare(
    sources: Sequence[RunLike],
    objective_x: Objective | str,
    objective_y: Objective | str,
    budget: float,
) -> list[ParetoSource]:
    """Per-source Pareto fronts over highest-seen costs at a budget.

    Fronts are computed independently per source; no cross-source
    domination is applied.
    """
    results: list[ParetoSource] = []
    for source in sources:
        try:
            xs = costs_at_budget(source, objective_x, budget, mode="highest_seen")
            ys = costs_at_budget(source, objective_y, budget, mode="highest_seen")
        except ValidationError as exc:
            raise ValidationError(f"source {source.id!r}: {exc}") from exc
        ix = source.objective_index(objective_x)
        iy = source.objective_index(objective_y)
        directions = (
            source.objectives[ix].direction,
            source.objectives[iy].direction,
        )
        cids = sorted(set(xs) & set(ys))
        coords = [(xs[cid], ys[cid]) for cid in cids]
        flags = pareto_front(coords, directions)
        points = []
        for cid, (x, y), dom in zip(cids, coords, flags):
            origin_run, origin_cid = source.origin_of(cid)
            points.append(
                ParetoPoint(
                    config_id=cid,
                    origin_run_id=origin_run,
                    origin_config_id=origin_cid,
                    x=x,
                    y=y,
                    dominated=dom,
                )
            )
        results.append(ParetoSource(id=source.id, points=tuple(points)))
    return results
