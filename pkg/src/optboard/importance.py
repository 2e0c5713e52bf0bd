"""Hyperparameter importance: a random-forest surrogate over encoded
configurations, global variance decomposition (fANOVA), and local parameter
importance around the incumbent (LPI).

The forest works on the encoded space where every dimension lives in [0, 1]
and the inactive sentinel -1 is an ordinary coordinate, so conditional
structure is learned without imputation.  Marginals integrate the trees'
piecewise-constant functions against a uniform product measure: Lebesgue on
continuous dimensions, equi-weighted cells on discrete ones.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    Configuration,
    ConfigurationSpace,
    INACTIVE,
    Kind,
    ValidationError,
    encode,
)

__all__ = [
    "Dimension",
    "TreeNode",
    "RegressionTree",
    "ImportanceForest",
    "ImportanceScore",
    "LpiResult",
    "dims_from_space",
    "fit_forest",
    "tree_marginal",
    "fanova",
    "lpi",
]

GRID_RESOLUTION = 100  # discretization per continuous dimension in fanova


@dataclass(frozen=True)
class Dimension:
    """Measure over one encoded dimension.

    ``continuous`` integrates Lebesgue over [lo, hi]; ``discrete`` puts equal
    weight on each support point (encoded categories, plus the inactive
    sentinel for conditional hyperparameters).
    """

    kind: str  # "continuous" | "discrete"
    lo: float = 0.0
    hi: float = 1.0
    points: tuple[float, ...] = ()

    def measure(self, a: float, b: float) -> float:
        """Mass of the half-open interval (a, b] under this dimension."""
        if self.kind == "continuous":
            return max(0.0, min(b, self.hi) - max(a, self.lo))
        return float(bisect_right(self.points, b) - bisect_right(self.points, a))

    @property
    def total(self) -> float:
        if self.kind == "continuous":
            return self.hi - self.lo
        return float(len(self.points))

    def grid(self) -> np.ndarray:
        if self.kind == "continuous":
            return np.linspace(self.lo, self.hi, GRID_RESOLUTION)
        return np.asarray(self.points, dtype=float)


def dims_from_space(space: ConfigurationSpace) -> tuple[Dimension, ...]:
    """Measure per encoded slot; conditional slots extend down to the sentinel."""
    dims: list[Dimension] = []
    for hp in space.hyperparameters:
        conditional = hp.condition is not None
        if hp.is_numeric:
            dims.append(Dimension(kind="continuous", lo=-1.0 if conditional else 0.0, hi=1.0))
        else:
            k = len(hp.choices)
            points = [0.0] if k == 1 else [i / (k - 1) for i in range(k)]
            if conditional:
                points = [INACTIVE] + points
            dims.append(Dimension(kind="discrete", points=tuple(points)))
    return tuple(dims)


def _dims_from_data(x: np.ndarray) -> tuple[Dimension, ...]:
    """Fallback bounds when no space is given: continuous hull of [0,1] and the data."""
    lo = np.minimum(x.min(axis=0), 0.0)
    hi = np.maximum(x.max(axis=0), 1.0)
    return tuple(
        Dimension(kind="continuous", lo=float(a), hi=float(b)) for a, b in zip(lo, hi)
    )


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    """Axis-aligned binary split (leaf when ``dim`` is None); rows with
    x[dim] <= threshold go left."""

    dim: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.dim is None

    @staticmethod
    def leaf(value: float) -> "TreeNode":
        return TreeNode(value=float(value))

    @staticmethod
    def split(dim: int, threshold: float, left: "TreeNode", right: "TreeNode") -> "TreeNode":
        return TreeNode(dim=dim, threshold=threshold, left=left, right=right)


@dataclass
class RegressionTree:
    root: TreeNode
    dims: tuple[Dimension, ...]

    def predict(self, x: Sequence[float]) -> float:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.dim] <= node.threshold else node.right
        return node.value

    def leaves(self) -> list[tuple[list[tuple[float, float]], float]]:
        """(box, mean) per leaf; boxes are (a, b] intervals per dimension.

        Root boxes are unbounded so the domain's lower edge lies inside the
        leftmost leaf; Dimension.measure clamps to the actual domain.
        """
        root_box = [(-math.inf, math.inf) for _ in self.dims]
        out: list[tuple[list[tuple[float, float]], float]] = []
        stack: list[tuple[TreeNode, list[tuple[float, float]]]] = [(self.root, root_box)]
        while stack:
            node, box = stack.pop()
            if node.is_leaf:
                out.append((box, node.value))
                continue
            a, b = box[node.dim]
            left_box = list(box)
            right_box = list(box)
            left_box[node.dim] = (a, node.threshold)
            right_box[node.dim] = (node.threshold, b)
            stack.append((node.right, right_box))
            stack.append((node.left, left_box))
        return out


@dataclass
class ImportanceForest:
    trees: list[RegressionTree]
    n_trees: int
    seed: int
    dims: tuple[Dimension, ...]

    def predict(self, x: Sequence[float]) -> float:
        return float(np.mean([t.predict(x) for t in self.trees]))


def _best_split(
    x: np.ndarray, y: np.ndarray, feature_ids: np.ndarray
) -> tuple[int, float] | None:
    """Feature and threshold minimizing child SSE; midpoint thresholds,
    first-found tie-break."""
    n = len(y)
    best: tuple[float, int, float] | None = None
    for k in feature_ids:
        order = np.argsort(x[:, k], kind="stable")
        xs = x[order, k]
        ys = y[order]
        cum1 = np.cumsum(ys)
        cum2 = np.cumsum(ys * ys)
        boundaries = np.nonzero(xs[:-1] < xs[1:])[0]
        if len(boundaries) == 0:
            continue
        nl = boundaries + 1.0
        nr = n - nl
        left1 = cum1[boundaries]
        sse_left = cum2[boundaries] - left1 * left1 / nl
        right1 = cum1[-1] - left1
        sse_right = (cum2[-1] - cum2[boundaries]) - right1 * right1 / nr
        sse = sse_left + sse_right
        pick = int(np.argmin(sse))  # first minimum: deterministic tie-break
        if best is None or sse[pick] < best[0]:
            i = int(boundaries[pick])
            best = (float(sse[pick]), int(k), float(0.5 * (xs[i] + xs[i + 1])))
    if best is None:
        return None
    return best[1], best[2]


def _fit_tree(
    x: np.ndarray,
    y: np.ndarray,
    dims: tuple[Dimension, ...],
    rng: np.random.Generator,
    min_leaf: int,
    max_features: int | None,
) -> RegressionTree:
    d = x.shape[1]
    root = TreeNode()
    stack: list[tuple[TreeNode, np.ndarray]] = [(root, np.arange(len(y)))]
    while stack:
        node, idx = stack.pop()
        yy = y[idx]
        node.value = float(yy.mean())
        if len(idx) <= min_leaf or np.ptp(yy) == 0.0:
            continue
        if max_features is None or max_features >= d:
            feature_ids = np.arange(d)
        else:
            feature_ids = np.sort(rng.choice(d, size=max_features, replace=False))
        found = _best_split(x[idx], yy, feature_ids)
        if found is None:
            continue
        k, threshold = found
        mask = x[idx, k] <= threshold
        node.dim = k
        node.threshold = threshold
        node.left = TreeNode()
        node.right = TreeNode()
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return RegressionTree(root=root, dims=dims)


def fit_forest(
    x: Sequence[Sequence[float]],
    y: Sequence[float],
    n_trees: int = 16,
    seed: int = 0,
    min_leaf: int = 3,
    dims: tuple[Dimension, ...] | None = None,
    max_features: int | None = None,
) -> ImportanceForest:
    """Bootstrap forest of variance-reduction regression trees.

    Deterministic per seed: bootstrap resamples and any feature subsetting
    derive from one seeded generator.  ``dims`` carries the per-dimension
    measure (see :func:`dims_from_space`); without it, continuous bounds are
    inferred from the data.
    """
    xr = np.asarray(x, dtype=float)
    yr = np.asarray(y, dtype=float)
    if xr.ndim != 2 or len(xr) != len(yr):
        raise ValidationError("X must be 2-D with one y per row")
    if len(yr) < 2:
        raise ValidationError("forest needs at least 2 rows")
    bad = np.nonzero(~np.isfinite(yr))[0]
    if len(bad):
        raise ValidationError(f"non-finite cost at row {int(bad[0])}")
    if dims is None:
        dims = _dims_from_data(xr)
    if len(dims) != xr.shape[1]:
        raise ValidationError("one Dimension per encoded slot required")
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        boot = rng.integers(0, len(yr), size=len(yr))
        trees.append(_fit_tree(xr[boot], yr[boot], dims, rng, min_leaf, max_features))
    return ImportanceForest(trees=trees, n_trees=n_trees, seed=seed, dims=dims)


# ---------------------------------------------------------------------------
# Marginals
# ---------------------------------------------------------------------------


def tree_marginal(
    tree: RegressionTree, subset: Sequence[int], values: Sequence[float]
) -> float:
    """Mean prediction with the ``subset`` dimensions pinned to ``values``
    and every other dimension integrated out against its measure."""
    fixed = dict(zip(subset, values))
    dims = tree.dims
    total = 0.0

    def walk(node: TreeNode, weight: float, intervals: dict[int, tuple[float, float]]) -> None:
        nonlocal total
        while not node.is_leaf:
            k = node.dim
            if k in fixed:
                node = node.left if fixed[k] <= node.threshold else node.right
                continue
            a, b = intervals.get(k, _root_interval(dims[k]))
            parent = dims[k].measure(a, b)
            left_mass = dims[k].measure(a, node.threshold)
            right_mass = parent - left_mass
            if right_mass > 0.0:
                right_intervals = dict(intervals)
                right_intervals[k] = (node.threshold, b)
                walk(node.right, weight * right_mass / parent, right_intervals)
            if left_mass <= 0.0:
                return
            intervals = dict(intervals)
            intervals[k] = (a, node.threshold)
            weight = weight * left_mass / parent
            node = node.left
        total += weight * node.value

    walk(tree.root, 1.0, {})
    return total


def _root_interval(dim: Dimension) -> tuple[float, float]:
    return -math.inf, math.inf


def _weights_excluding(f: np.ndarray, exclude: tuple[int, ...]) -> np.ndarray:
    """Row products of fractions over all dims except ``exclude`` (zero-safe)."""
    keep = np.ones(f.shape[1], dtype=bool)
    for k in exclude:
        keep[k] = False
    return np.prod(f[:, keep], axis=1)


@dataclass(frozen=True)
class ImportanceScore:
    dims: tuple[int, ...]
    mean: float
    std: float


@dataclass(frozen=True)
class LpiResult:
    scores: tuple[ImportanceScore, ...]
    flat_neighborhood: bool


def _tree_variances(
    tree: RegressionTree, order_max: int
) -> tuple[float, dict[tuple[int, ...], float]]:
    """Total variance and per-subset component variances for one tree."""
    dims = tree.dims
    leaves = tree.leaves()
    m = np.array([mean for _, mean in leaves])
    f = np.empty((len(leaves), len(dims)))
    for l, (box, _) in enumerate(leaves):
        for k, dim in enumerate(dims):
            f[l, k] = dim.measure(*box[k]) / dim.total
    w_full = np.prod(f, axis=1)
    grand_mean = float(w_full @ m)
    v_total = float(w_full @ (m - grand_mean) ** 2)
    grids = [d.grid() for d in dims]
    # per leaf and dim, the half-open [lo, hi) grid-index range inside the
    # leaf's (a, b] interval (grids are ascending)
    ranges = [
        [
            (
                int(np.searchsorted(grids[k], box[k][0], side="right")),
                int(np.searchsorted(grids[k], box[k][1], side="right")),
            )
            for box, _ in leaves
        ]
        for k in range(len(dims))
    ]

    components: dict[tuple[int, ...], float] = {}
    for k in range(len(dims)):
        w_rest = _weights_excluding(f, (k,))
        marg = np.zeros(len(grids[k]))
        for l, (lo, hi) in enumerate(ranges[k]):
            if w_rest[l] != 0.0 and lo < hi:
                marg[lo:hi] += w_rest[l] * m[l]
        components[(k,)] = float(np.mean((marg - grand_mean) ** 2))
    if order_max >= 2:
        for k1 in range(len(dims)):
            for k2 in range(k1 + 1, len(dims)):
                w_rest = _weights_excluding(f, (k1, k2))
                marg2 = np.zeros((len(grids[k1]), len(grids[k2])))
                for l in range(len(m)):
                    if w_rest[l] == 0.0:
                        continue
                    lo1, hi1 = ranges[k1][l]
                    lo2, hi2 = ranges[k2][l]
                    if lo1 < hi1 and lo2 < hi2:
                        marg2[lo1:hi1, lo2:hi2] += w_rest[l] * m[l]
                raw = float(np.mean((marg2 - grand_mean) ** 2))
                components[(k1, k2)] = max(
                    0.0, raw - components[(k1,)] - components[(k2,)]
                )
    return v_total, components


def fanova(forest: ImportanceForest, order_max: int = 1) -> list[ImportanceScore]:
    """Variance-decomposition importances (singletons, optionally pairs).

    Per tree, each subset's component variance is normalized by the tree's
    total variance; scores report mean and std across trees.  Zero-variance
    trees contribute zero to every subset.
    """
    if order_max not in (1, 2):
        raise ValidationError("order_max must be 1 or 2")
    if not forest.trees:
        raise ValidationError("forest has no trees")
    d = len(forest.dims)
    subsets: list[tuple[int, ...]] = [(k,) for k in range(d)]
    if order_max >= 2:
        subsets += [(k1, k2) for k1 in range(d) for k2 in range(k1 + 1, d)]
    per_tree = np.zeros((len(forest.trees), len(subsets)))
    for t, tree in enumerate(forest.trees):
        v_total, components = _tree_variances(tree, order_max)
        if v_total <= 0.0:
            continue
        for s, subset in enumerate(subsets):
            # grid quadrature on continuous dims can overshoot slightly;
            # the true ratio is <= 1 by the law of total variance
            per_tree[t, s] = min(1.0, components[subset] / v_total)
    return [
        ImportanceScore(
            dims=subset,
            mean=float(per_tree[:, s].mean()),
            std=float(per_tree[:, s].std()),
        )
        for s, subset in enumerate(subsets)
    ]


def lpi(
    forest: ImportanceForest,
    incumbent_config: Configuration,
    space: ConfigurationSpace,
    grid: int = 20,
) -> LpiResult:
    """Local parameter importance around the incumbent.

    Varies one hyperparameter at a time over its full encoded range (all
    choices for choice kinds) with everything else pinned to the incumbent,
    and normalizes the per-hyperparameter prediction variances to sum to 1.
    Hyperparameters inactive at the incumbent score 0.
    """
    if grid < 2:
        raise ValidationError("grid must be >= 2")
    base = np.asarray(encode(incumbent_config, space), dtype=float)
    if len(base) != len(forest.dims):
        raise ValidationError("forest and space dimensionality differ")
    d = len(base)
    grids: list[np.ndarray | None] = []
    for k, hp in enumerate(space.hyperparameters):
        if base[k] == INACTIVE:
            grids.append(None)
            continue
        if hp.is_numeric:
            grids.append(np.linspace(0.0, 1.0, grid))
        else:
            n_choices = len(hp.choices)
            grids.append(
                np.array([0.0])
                if n_choices == 1
                else np.arange(n_choices) / (n_choices - 1)
            )
    n_trees = len(forest.trees)
    variances = np.zeros((n_trees, d))
    for t, tree in enumerate(forest.trees):
        for k in range(d):
            if grids[k] is None:
                continue
            probe = base.copy()
            preds = []
            for v in grids[k]:
                probe[k] = v
                preds.append(tree.predict(probe))
            variances[t, k] = float(np.var(preds))
    totals = variances.sum(axis=1)
    ratios = np.zeros_like(variances)
    nonzero = totals > 0.0
    ratios[nonzero] = variances[nonzero] / totals[nonzero, None]
    flat = not bool(nonzero.any())
    scores = tuple(
        ImportanceScore(
            dims=(k,),
            mean=float(ratios[:, k].mean()),
            std=float(ratios[:, k].std()),
        )
        for k in range(d)
    )
    return LpiResult(scores=scores, flat_neighborhood=flat)
