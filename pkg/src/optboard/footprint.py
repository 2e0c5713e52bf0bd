"""Configuration footprint: mixed-type distances, border and random
configurations, and a deterministic 2-D projection of the space.

The projection is classical (Torgerson) multidimensional scaling on a
Gower-style distance matrix; an optional stress-majorization refinement is
available for matrices far from Euclidean.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .model import (
    Configuration,
    ConfigurationSpace,
    Hyperparameter,
    INACTIVE,
    Kind,
    Objective,
    RunLike,
    ValidationError,
    encode,
    incumbent,
    costs_at_budget,
)

__all__ = [
    "FootprintPoint",
    "config_distance",
    "distance_matrix",
    "count_corners",
    "border_configs",
    "random_configs",
    "mds_project",
    "smacof_refine",
    "build_footprint",
]


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def _dim_distance(hp: Hyperparameter, a: float, b: float) -> float:
    """Per-hyperparameter distance on encoded slots (sentinel -1 = inactive)."""
    a_active, b_active = a != INACTIVE, b != INACTIVE
    if not a_active and not b_active:
        return 0.0
    if a_active != b_active:
        return 1.0
    if hp.kind is Kind.CATEGORICAL:
        return 0.0 if a == b else 1.0
    return abs(a - b)


def config_distance(a: Configuration, b: Configuration, space: ConfigurationSpace) -> float:
    """Gower-style mean of per-hyperparameter distances, in [0, 1]."""
    za = encode(a, space)
    zb = encode(b, space)
    total = sum(
        _dim_distance(hp, za[k], zb[k]) for k, hp in enumerate(space.hyperparameters)
    )
    return total / len(space)


def distance_matrix(configs: Sequence[Configuration], space: ConfigurationSpace) -> np.ndarray:
    """Full pairwise distance matrix (symmetric, zero diagonal, entries in [0, 1])."""
    n = len(configs)
    z = np.array([encode(c, space) for c in configs], dtype=float)
    out = np.zeros((n, n), dtype=float)
    for k, hp in enumerate(space.hyperparameters):
        col = z[:, k]
        active = col != INACTIVE
        both = active[:, None] & active[None, :]
        one = active[:, None] ^ active[None, :]
        if hp.kind is Kind.CATEGORICAL:
            core = (col[:, None] != col[None, :]).astype(float)
        else:
            core = np.abs(col[:, None] - col[None, :])
        out += np.where(both, core, np.where(one, 1.0, 0.0))
    out /= len(space)
    return out


# ---------------------------------------------------------------------------
# Border configurations (corners of the conditional space)
# ---------------------------------------------------------------------------


def _corner_values(hp: Hyperparameter) -> list[Any]:
    if hp.is_numeric:
        return [hp.lower, hp.upper]
    if len(hp.choices) == 1:
        return [hp.choices[0]]
    return [hp.choices[0], hp.choices[-1]]


def _children(space: ConfigurationSpace) -> dict[str, list[Hyperparameter]]:
    by_parent: dict[str, list[Hyperparameter]] = {hp.name: [] for hp in space.hyperparameters}
    for hp in space.hyperparameters:
        if hp.condition is not None:
            by_parent[hp.condition.parent].append(hp)
    return by_parent


def _count_corners_of(
    hp: Hyperparameter, children: dict[str, list[Hyperparameter]], memo: dict[str, int]
) -> int:
    if hp.name in memo:
        return memo[hp.name]
    total = 0
    for value in _corner_values(hp):
        ways = 1
        for child in children[hp.name]:
            if child.condition.activates(value):
                ways *= _count_corners_of(child, children, memo)
        total += ways
    memo[hp.name] = total
    return total


def count_corners(space: ConfigurationSpace) -> int:
    """Exact number of distinct border configurations (may be astronomically large)."""
    children = _children(space)
    memo: dict[str, int] = {}
    total = 1
    for hp in space.hyperparameters:
        if hp.condition is None:
            total *= _count_corners_of(hp, children, memo)
    return total


def _decode_corner(
    hp: Hyperparameter,
    index: int,
    children: dict[str, list[Hyperparameter]],
    memo: dict[str, int],
    out: dict[str, Any],
) -> None:
    """Write the index-th corner of the subtree rooted at ``hp`` into ``out``."""
    for value in _corner_values(hp):
        active_children = [
            c for c in children[hp.name] if c.condition.activates(value)
        ]
        ways = 1
        for child in active_children:
            ways *= _count_corners_of(child, children, memo)
        if index < ways:
            out[hp.name] = value
            for child in active_children:
                n_child = _count_corners_of(child, children, memo)
                _decode_corner(child, index % n_child, children, memo, out)
                index //= n_child
            return
        index -= ways
    raise IndexError("corner index out of range")


def _corner_at(index: int, space: ConfigurationSpace) -> Configuration:
    children = _children(space)
    memo: dict[str, int] = {}
    out: dict[str, Any] = {}
    for hp in space.hyperparameters:
        if hp.condition is None:
            n_root = _count_corners_of(hp, children, memo)
            _decode_corner(hp, index % n_root, children, memo, out)
            index //= n_root
    return Configuration(values=out)


def border_configs(space: ConfigurationSpace, cap: int = 100, seed: int = 0) -> list[Configuration]:
    """Corner configurations: every active numeric hyperparameter at a bound,
    every active choice hyperparameter at its first or last choice.

    Returns the full corner set when it fits under ``cap``, otherwise a
    seeded uniform sample of ``cap`` distinct corners.  Conditional children
    appear only when activated by the chosen parent corner value.
    """
    if cap < 1:
        raise ValidationError("border cap must be >= 1")
    total = count_corners(space)
    if total <= cap:
        indices: Sequence[int] = range(total)
    else:
        rng = random.Random(seed)
        picked: set[int] = set()
        while len(picked) < cap:
            picked.add(rng.randrange(total))
        indices = sorted(picked)
    return [_corner_at(i, space) for i in indices]


# ---------------------------------------------------------------------------
# Random configurations
# ---------------------------------------------------------------------------


def _sample_value(hp: Hyperparameter, rng: np.random.Generator) -> Any:
    if hp.kind is Kind.CONTINUOUS:
        if hp.log_scale:
            return float(np.exp(rng.uniform(math.log(hp.lower), math.log(hp.upper))))
        return float(rng.uniform(hp.lower, hp.upper))
    if hp.kind is Kind.INTEGER:
        if hp.log_scale:
            raw = np.exp(rng.uniform(math.log(hp.lower), math.log(hp.upper)))
            return int(min(max(round(raw), hp.lower), hp.upper))
        return int(rng.integers(int(hp.lower), int(hp.upper) + 1))
    return hp.choices[int(rng.integers(0, len(hp.choices)))]


def random_configs(space: ConfigurationSpace, n: int, seed: int = 0) -> list[Configuration]:
    """n configurations sampled uniformly per hyperparameter (log-uniform on
    log scales), honoring conditional activation.  Deterministic per seed."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    rng = np.random.default_rng(seed)
    out: list[Configuration] = []
    for _ in range(n):
        values: dict[str, Any] = {}
        for name in space.topological_order:
            hp = space[name]
            cond = hp.condition
            if cond is None or (cond.parent in values and cond.activates(values[cond.parent])):
                values[name] = _sample_value(hp, rng)
        out.append(Configuration(values=values))
    return out


# ---------------------------------------------------------------------------
# Multidimensional scaling
# ---------------------------------------------------------------------------


def _validate_distance_matrix(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError("distance matrix must be square")
    if d.shape[0] < 2:
        raise ValidationError("projection needs at least 2 points")
    if not np.allclose(d, d.T, rtol=1e-9, atol=1e-12):
        raise ValidationError("distance matrix must be symmetric")
    if np.any(d < 0) or np.any(np.diag(d) != 0):
        raise ValidationError("distances must be nonnegative with a zero diagonal")
    return d


def mds_project(d: np.ndarray) -> np.ndarray:
    """Classical (Torgerson) MDS to 2-D.

    Double-centers -0.5 * D^2, takes the top two eigenpairs (negative
    eigenvalues clamp to zero), and scales eigenvectors by sqrt(eigenvalue).
    The sign convention makes each column's largest-magnitude entry
    nonnegative, so the output is deterministic; it remains meaningful only
    up to rotation/reflection/translation.
    """
    d = _validate_distance_matrix(d)
    n = d.shape[0]
    sq = d * d
    centerer = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * centerer @ sq @ centerer
    b = 0.5 * (b + b.T)  # keep eigh on the exactly symmetric part
    eigvals, eigvecs = np.linalg.eigh(b)
    coords = np.zeros((n, 2), dtype=float)
    for col, idx in enumerate((n - 1, n - 2)):
        lam = max(eigvals[idx], 0.0)
        coords[:, col] = eigvecs[:, idx] * math.sqrt(lam)
    for col in range(2):
        pivot = int(np.argmax(np.abs(coords[:, col])))
        if coords[pivot, col] < 0:
            coords[:, col] = -coords[:, col]
    return coords


def smacof_refine(
    d: np.ndarray,
    init: np.ndarray,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> np.ndarray:
    """Stress-majorization refinement of an existing embedding.

    Deterministic: starts from ``init`` (no random restarts) and stops when
    the stress improvement drops below ``tol``.
    """
    d = _validate_distance_matrix(d)
    x = np.array(init, dtype=float, copy=True)
    n = d.shape[0]

    def embedded_distances(pts: np.ndarray) -> np.ndarray:
        diff = pts[:, None, :] - pts[None, :, :]
        return np.sqrt((diff * diff).sum(axis=2))

    def stress(delta: np.ndarray) -> float:
        return float(((d - delta) ** 2).sum() / 2.0)

    delta = embedded_distances(x)
    prev = stress(delta)
    for _ in range(max_iter):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(delta > 0, d / np.where(delta > 0, delta, 1.0), 0.0)
        b = -ratio
        np.fill_diagonal(b, 0.0)
        np.fill_diagonal(b, -b.sum(axis=1))
        x = (b @ x) / n
        delta = embedded_distances(x)
        current = stress(delta)
        if prev - current < tol:
            break
        prev = current
    return x


# ---------------------------------------------------------------------------
# Footprint assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FootprintPoint:
    x: float
    y: float
    kind: str  # "evaluated" | "incumbent" | "border" | "random"
    config_id: int | None
    cost: float | None
    values: dict[str, Any]


def build_footprint(
    run: RunLike,
    objective: Objective | str,
    budget: float,
    n_border: int = 100,
    n_random: int = 100,
    seed: int = 0,
    refine: bool = False,
) -> list[FootprintPoint]:
    """Project evaluated, border, and random configurations into 2-D.

    Evaluated configs carry highest-seen costs at the budget, the incumbent
    is flagged, and generated configs fill in the unexplored regions.
    """
    costs = costs_at_budget(run, objective, budget, mode="highest_seen")
    if not costs:
        raise ValidationError("footprint needs at least one evaluated configuration")
    inc = incumbent(run, objective, budget, mode="highest_seen")
    inc_cid = inc[0] if inc is not None else None

    eval_cids = sorted(costs)
    configs: list[Configuration] = [run.configs[cid] for cid in eval_cids]
    kinds: list[str] = [
        "incumbent" if cid == inc_cid else "evaluated" for cid in eval_cids
    ]
    ids: list[int | None] = list(eval_cids)
    point_costs: list[float | None] = [costs[cid] for cid in eval_cids]

    if n_border > 0:
        for config in border_configs(run.space, cap=n_border, seed=seed):
            configs.append(config)
            kinds.append("border")
            ids.append(None)
            point_costs.append(None)
    for config in random_configs(run.space, n_random, seed=seed):
        configs.append(config)
        kinds.append("random")
        ids.append(None)
        point_costs.append(None)

    if len(configs) == 1:
        coords = np.zeros((1, 2))
    else:
        d = distance_matrix(configs, run.space)
        coords = mds_project(d)
        if refine:
            coords = smacof_refine(d, coords)
    return [
        FootprintPoint(
            x=float(coords[i, 0]),
            y=float(coords[i, 1]),
            kind=kinds[i],
            config_id=ids[i],
            cost=point_costs[i],
            values=dict(configs[i].values),
        )
        for i in range(len(configs))
    ]
