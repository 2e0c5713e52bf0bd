"""Canonical in-memory model for configuration spaces, trials, runs, and groups.

Everything here is immutable after construction and safe to share across
threads; re-ingestion replaces whole ``Run`` objects instead of mutating them.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

__all__ = [
    "ValidationError",
    "GroupError",
    "Kind",
    "Status",
    "Direction",
    "Condition",
    "Hyperparameter",
    "ConfigurationSpace",
    "Configuration",
    "Objective",
    "Trial",
    "Run",
    "Group",
    "RunView",
    "FAILURE_STATUSES",
    "active_hyperparameters",
    "validate_config",
    "encode",
    "costs_at_budget",
    "incumbent",
    "merge_group",
]


class ValidationError(ValueError):
    """A value, configuration, or model invariant check failed."""


class GroupError(ValueError):
    """Group members are incompatible (objectives or spaces mismatch)."""


class Kind(str, Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"
    CATEGORICAL = "categorical"
    ORDINAL = "ordinal"


class Status(str, Enum):
    SUCCESS = "success"
    CRASHED = "crashed"
    TIMEOUT = "timeout"
    MEMOUT = "memout"
    RUNNING = "running"
    NOT_EVALUATED = "not_evaluated"


# Statuses that denote a finished-but-failed evaluation.  RUNNING and
# NOT_EVALUATED are pending states, not failures.
FAILURE_STATUSES = (Status.CRASHED, Status.TIMEOUT, Status.MEMOUT)


class Direction(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass(frozen=True)
class Condition:
    """Activation rule: the owner is active iff its parent takes one of ``values``."""

    parent: str
    values: tuple[Any, ...]

    def activates(self, parent_value: Any) -> bool:
        return parent_value in self.values


@dataclass(frozen=True)
class Hyperparameter:
    name: str
    kind: Kind
    lower: float | None = None
    upper: float | None = None
    log_scale: bool = False
    choices: tuple[Any, ...] | None = None
    default: Any = None
    condition: Condition | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("hyperparameter name must be nonempty")
        if self.is_numeric:
            if self.lower is None or self.upper is None:
                raise ValidationError(f"{self.name}: numeric kinds need lower and upper")
            if not self.lower < self.upper:
                raise ValidationError(f"{self.name}: lower must be < upper")
            if self.log_scale and self.lower <= 0:
                raise ValidationError(f"{self.name}: log scale requires lower > 0")
            if self.choices is not None:
                raise ValidationError(f"{self.name}: numeric kinds take no choices")
        else:
            if not self.choices:
                raise ValidationError(f"{self.name}: {self.kind.value} needs nonempty choices")
            if len(set(self.choices)) != len(self.choices):
                raise ValidationError(f"{self.name}: choices must be pairwise distinct")
            if self.lower is not None or self.upper is not None or self.log_scale:
                raise ValidationError(f"{self.name}: bounds apply to numeric kinds only")
        if self.default is not None and not self.contains(self.default):
            raise ValidationError(f"{self.name}: default {self.default!r} outside domain")

    @property
    def is_numeric(self) -> bool:
        return self.kind in (Kind.CONTINUOUS, Kind.INTEGER)

    def contains(self, value: Any) -> bool:
        """Domain membership test for one value."""
        if self.is_numeric:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return False
            if not math.isfinite(value):
                return False
            if self.kind is Kind.INTEGER and value != int(value):
                return False
            return self.lower <= value <= self.upper
        return value in self.choices


@dataclass(frozen=True)
class ConfigurationSpace:
    """Ordered, possibly conditional hyperparameter space.

    The condition graph (child -> parent) must be acyclic; a topological
    order is precomputed so activation can be resolved in one pass.
    """

    hyperparameters: tuple[Hyperparameter, ...]
    _by_name: dict[str, Hyperparameter] = field(init=False, repr=False, compare=False)
    _topo_order: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        names = [hp.name for hp in self.hyperparameters]
        if len(set(names)) != len(names):
            raise ValidationError("hyperparameter names must be unique")
        by_name = {hp.name: hp for hp in self.hyperparameters}
        for hp in self.hyperparameters:
            if hp.condition is not None and hp.condition.parent not in by_name:
                raise ValidationError(
                    f"{hp.name}: condition parent {hp.condition.parent!r} does not exist"
                )
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "_topo_order", self._toposort(by_name))

    def _toposort(self, by_name: dict[str, Hyperparameter]) -> tuple[str, ...]:
        order: list[str] = []
        state: dict[str, int] = {}  # 0 unseen, 1 visiting, 2 done

        def visit(name: str) -> None:
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                raise ValidationError(f"condition cycle involving {name!r}")
            state[name] = 1
            hp = by_name[name]
            if hp.condition is not None:
                visit(hp.condition.parent)
            state[name] = 2
            order.append(name)

        for hp in self.hyperparameters:
            visit(hp.name)
        return tuple(order)

    def __len__(self) -> int:
        return len(self.hyperparameters)

    def __getitem__(self, name: str) -> Hyperparameter:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(hp.name for hp in self.hyperparameters)

    @property
    def topological_order(self) -> tuple[str, ...]:
        return self._topo_order

    def same_structure(self, other: "ConfigurationSpace") -> str | None:
        """Return a message naming the first structural mismatch, or None."""
        if self.names != other.names:
            ours, theirs = set(self.names), set(other.names)
            extra = sorted(ours.symmetric_difference(theirs))
            if extra:
                return f"hyperparameter mismatch: {extra[0]!r}"
            return "hyperparameter order mismatch"
        for a, b in zip(self.hyperparameters, other.hyperparameters):
            if a != b:
                return f"hyperparameter mismatch: {a.name!r}"
        return None


@dataclass(frozen=True)
class Configuration:
    """One point of the space: name -> value; inactive hyperparameters are absent."""

    values: Mapping[str, Any]

    def key(self) -> tuple:
        """Hashable canonical identity (used for dedup)."""
        return tuple(sorted(self.values.items(), key=lambda kv: kv[0]))


@dataclass(frozen=True)
class Objective:
    name: str
    direction: Direction = Direction.MINIMIZE
    lower: float | None = None
    upper: float | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("objective name must be nonempty")
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ValidationError(f"{self.name}: lower bound exceeds upper bound")


@dataclass(frozen=True)
class Trial:
    config_id: int
    budget: float
    costs: tuple[float, ...] | None
    status: Status
    start: float = 0.0
    end: float | None = None
    additional: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Run:
    """A full optimization history: space, objectives, budgets, configs, trials."""

    id: str
    meta: Mapping[str, Any]
    space: ConfigurationSpace
    objectives: tuple[Objective, ...]
    budgets: tuple[float, ...]
    configs: tuple[Configuration, ...]
    trials: tuple[Trial, ...]
    content_hash: str = ""
    data_timestamp: float = 0.0

    def __post_init__(self) -> None:
        if any(b2 <= b1 for b1, b2 in zip(self.budgets, self.budgets[1:])):
            raise ValidationError(f"run {self.id}: budgets must be strictly ascending")
        budget_set = set(self.budgets)
        seen: set[tuple[int, float]] = set()
        n_obj = len(self.objectives)
        for i, t in enumerate(self.trials):
            where = f"run {self.id}, trial {i}"
            if not 0 <= t.config_id < len(self.configs):
                raise ValidationError(f"{where}: config_id {t.config_id} out of range")
            if t.budget not in budget_set:
                raise ValidationError(f"{where}: budget {t.budget} not in budget list")
            if (t.config_id, t.budget) in seen:
                raise ValidationError(
                    f"{where}: duplicate (config_id, budget) = ({t.config_id}, {t.budget})"
                )
            seen.add((t.config_id, t.budget))
            if t.status is Status.SUCCESS:
                if t.costs is None or len(t.costs) != n_obj:
                    raise ValidationError(f"{where}: success needs one cost per objective")
                if any(not math.isfinite(c) for c in t.costs):
                    raise ValidationError(f"{where}: costs must be finite")
            elif t.costs is not None:
                raise ValidationError(f"{where}: non-success trials carry no costs")

    def objective_index(self, objective: "Objective | str") -> int:
        return _objective_index(self.objectives, objective)

    def origin_of(self, config_id: int) -> tuple[str, int]:
        """Provenance of a config row: (source run id, config id there)."""
        return self.id, config_id


@dataclass(frozen=True)
class Group:
    name: str
    run_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("group name must be nonempty")
        if not self.run_ids:
            raise GroupError(f"group {self.name!r}: members must be nonempty")


@dataclass(frozen=True)
class RunView:
    """Read-only merged view over a group's member runs.

    Config tables and trial lists are concatenated in member order; config
    ids are re-indexed and per-config provenance is retained so plugins can
    point back at the member run.
    """

    id: str
    meta: Mapping[str, Any]
    space: ConfigurationSpace
    objectives: tuple[Objective, ...]
    budgets: tuple[float, ...]
    configs: tuple[Configuration, ...]
    trials: tuple[Trial, ...]
    content_hash: str
    data_timestamp: float
    origins: tuple[tuple[str, int], ...]

    def objective_index(self, objective: "Objective | str") -> int:
        return _objective_index(self.objectives, objective)

    def origin_of(self, config_id: int) -> tuple[str, int]:
        return self.origins[config_id]


# Anything with the Run query surface (Run or RunView).
RunLike = Run | RunView


def _objective_index(objectives: tuple[Objective, ...], objective: Objective | str) -> int:
    name = objective.name if isinstance(objective, Objective) else objective
    for i, obj in enumerate(objectives):
        if obj.name == name:
            return i
    raise ValidationError(f"unknown objective {name!r}")


def active_hyperparameters(config: Configuration, space: ConfigurationSpace) -> set[str]:
    """Names active under the space's conditions for this configuration.

    A hyperparameter is active iff it has no condition, or its parent is
    active with an activating value.  Resolved by walking the condition
    graph in topological order.
    """
    for name in config.values:
        if name not in space:
            raise ValidationError(f"unknown hyperparameter {name!r} in configuration")
    active: set[str] = set()
    for name in space.topological_order:
        cond = space[name].condition
        if cond is None:
            active.add(name)
        elif cond.parent in active and cond.activates(config.values.get(cond.parent)):
            active.add(name)
    return active


def validate_config(config: Configuration, space: ConfigurationSpace) -> set[str]:
    """Check the activation/domain invariants; returns the active set."""
    active = active_hyperparameters(config, space)
    for name in active:
        if name not in config.values:
            raise ValidationError(f"active hyperparameter {name!r} missing a value")
        if not space[name].contains(config.values[name]):
            raise ValidationError(
                f"{name!r}: value {config.values[name]!r} outside domain"
            )
    for name in config.values:
        if name not in active:
            raise ValidationError(f"inactive hyperparameter {name!r} must be absent")
    return active


INACTIVE = -1.0  # sentinel slot for inactive hyperparameters in encoded space


def encode_value(hp: Hyperparameter, value: Any) -> float:
    """Map one in-domain value to [0, 1] (rank scale for choice kinds)."""
    if not hp.contains(value):
        raise ValidationError(f"{hp.name!r}: value {value!r} outside domain")
    if hp.is_numeric:
        if hp.log_scale:
            lo, hi = math.log(hp.lower), math.log(hp.upper)
            return (math.log(value) - lo) / (hi - lo)
        return (value - hp.lower) / (hp.upper - hp.lower)
    if len(hp.choices) == 1:
        return 0.0
    return hp.choices.index(value) / (len(hp.choices) - 1)


def decode_value(hp: Hyperparameter, slot: float) -> Any:
    """Inverse of :func:`encode_value` (nearest choice / rounded integer)."""
    if hp.is_numeric:
        if hp.log_scale:
            lo, hi = math.log(hp.lower), math.log(hp.upper)
            raw = math.exp(lo + slot * (hi - lo))
        else:
            raw = hp.lower + slot * (hp.upper - hp.lower)
        if hp.kind is Kind.INTEGER:
            return int(min(max(round(raw), hp.lower), hp.upper))
        return min(max(raw, hp.lower), hp.upper)
    if len(hp.choices) == 1:
        return hp.choices[0]
    idx = int(round(slot * (len(hp.choices) - 1)))
    return hp.choices[min(max(idx, 0), len(hp.choices) - 1)]


def encode(config: Configuration, space: ConfigurationSpace) -> list[float]:
    """Encode a configuration as one slot per hyperparameter, in space order.

    Numeric kinds map onto [0, 1] (log-transformed endpoints when
    log-scaled); choice kinds map to rank / (#choices - 1); inactive slots
    take the sentinel -1.
    """
    active = validate_config(config, space)
    out: list[float] = []
    for hp in space.hyperparameters:
        if hp.name in active:
            out.append(encode_value(hp, config.values[hp.name]))
        else:
            out.append(INACTIVE)
    return out


def _costs_with_order(
    run: RunLike, objective: Objective | str, budget: float, mode: str
) -> dict[int, tuple[float, int]]:
    """config_id -> (cost, index of the trial that produced it)."""
    if mode not in ("exact", "highest_seen"):
        raise ValidationError(f"unknown cost mode {mode!r}")
    obj_idx = run.objective_index(objective)
    if mode == "exact" and budget not in run.budgets:
        raise ValidationError(f"budget {budget} not in run budgets")
    best: dict[int, tuple[float, float, int]] = {}  # cid -> (budget, cost, trial idx)
    for i, t in enumerate(run.trials):
        if t.status is not Status.SUCCESS or t.budget > budget:
            continue
        if mode == "exact":
            if t.budget == budget:
                best[t.config_id] = (t.budget, t.costs[obj_idx], i)
        else:
            prev = best.get(t.config_id)
            if prev is None or t.budget > prev[0]:
                best[t.config_id] = (t.budget, t.costs[obj_idx], i)
    return {cid: (cost, idx) for cid, (_, cost, idx) in best.items()}


def costs_at_budget(
    run: RunLike,
    objective: Objective | str,
    budget: float,
    mode: str = "exact",
) -> dict[int, float]:
    """Per-config cost of successful trials at a budget.

    ``exact`` uses trials at exactly that budget; ``highest_seen`` uses,
    per config, the cost at the highest budget <= the requested one on
    which it succeeded.  Maximize objectives are returned raw.
    """
    return {cid: cost for cid, (cost, _) in _costs_with_order(run, objective, budget, mode).items()}


def incumbent(
    run: RunLike,
    objective: Objective | str,
    budget: float,
    mode: str = "exact",
) -> tuple[int, float] | None:
    """Best (config_id, cost) at a budget, or None when nothing succeeded.

    Ties break by the earliest producing trial in history order.
    """
    obj = run.objectives[run.objective_index(objective)]
    costs = _costs_with_order(run, objective, budget, mode)
    if not costs:
        return None
    sign = 1.0 if obj.direction is Direction.MINIMIZE else -1.0
    best_cid = min(costs, key=lambda cid: (sign * costs[cid][0], costs[cid][1]))
    return best_cid, costs[best_cid][0]


def merge_group(group: Group, runs: Iterable[Run]) -> RunView:
    """Concatenate member runs into one read-only view.

    Members must share identical objective lists and structurally identical
    configuration spaces; the first mismatch is reported by name.
    """
    members = list(runs)
    if not members:
        raise GroupError(f"group {group.name!r}: members must be nonempty")
    first = members[0]
    for other in members[1:]:
        ours = [(o.name, o.direction) for o in first.objectives]
        theirs = [(o.name, o.direction) for o in other.objectives]
        if ours != theirs:
            raise GroupError(
                f"group {group.name!r}: objective mismatch between "
                f"{first.id!r} and {other.id!r}"
            )
        mismatch = first.space.same_structure(other.space)
        if mismatch is not None:
            raise GroupError(
                f"group {group.name!r}: space mismatch between "
                f"{first.id!r} and {other.id!r}: {mismatch}"
            )
    configs: list[Configuration] = []
    trials: list[Trial] = []
    origins: list[tuple[str, int]] = []
    for run in members:
        offset = len(configs)
        configs.extend(run.configs)
        origins.extend((run.id, cid) for cid in range(len(run.configs)))
        for t in run.trials:
            trials.append(
                Trial(
                    config_id=t.config_id + offset,
                    budget=t.budget,
                    costs=t.costs,
                    status=t.status,
                    start=t.start,
                    end=t.end,
                    additional=t.additional,
                )
            )
    digest = hashlib.sha256()
    for run in members:
        digest.update(run.id.encode())
        digest.update(b"\0")
        digest.update(run.content_hash.encode())
        digest.update(b"\0")
    return RunView(
        id=group.name,
        meta={"group": group.name, "members": [r.id for r in members]},
        space=first.space,
        objectives=first.objectives,
        budgets=tuple(sorted({b for r in members for b in r.budgets})),
        configs=tuple(configs),
        trials=tuple(trials),
        content_hash=digest.hexdigest(),
        data_timestamp=max(r.data_timestamp for r in members),
        origins=tuple(origins),
    )
