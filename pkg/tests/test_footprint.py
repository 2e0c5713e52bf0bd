"""Footprint: Gower distances, corner enumeration, sampling, and MDS."""

from __future__ import annotations

import math

import numpy as np
import pytest

from optboard.footprint import (
    border_configs,
    build_footprint,
    config_distance,
    count_corners,
    distance_matrix,
    mds_project,
    random_configs,
    smacof_refine,
)
from optboard.model import (
    Condition,
    Configuration,
    ConfigurationSpace,
    Hyperparameter,
    Kind,
    Status,
    ValidationError,
    active_hyperparameters,
    validate_config,
)

from conftest import build_run, make_fixture_run


def _pairwise(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


# -- config_distance ------------------------------------------------------------


def test_distance_identity(simple_space):
    c = Configuration(values={"x": 3.0})
    assert config_distance(c, c, simple_space) == 0.0


def test_distance_full_range(simple_space):
    a = Configuration(values={"x": 0.0})
    b = Configuration(values={"x": 10.0})
    assert config_distance(a, b, simple_space) == 1.0


def test_distance_mean_rule():
    space = ConfigurationSpace(
        hyperparameters=(
            Hyperparameter(name="m", kind=Kind.CATEGORICAL, choices=("a", "b")),
            Hyperparameter(name="x", kind=Kind.CONTINUOUS, lower=0.0, upper=10.0),
        )
    )
    a = Configuration(values={"m": "a", "x": 0.0})
    b = Configuration(values={"m": "a", "x": 5.0})
    assert config_distance(a, b, space) == pytest.approx(0.25)


def test_distance_active_vs_inactive_is_maximal(cond_space):
    a = Configuration(values={"model": "ae", "lr": 0.01})
    b = Configuration(values={"model": "vae", "latent_dim": 2, "lr": 0.01})
    # model differs (1) + latent active/inactive (1) + lr equal (0), over 3 dims
    assert config_distance(a, b, cond_space) == pytest.approx(2 / 3)


def test_distance_symmetry_and_range(cond_space):
    rng_configs = random_configs(cond_space, 20, seed=9)
    for a in rng_configs[:5]:
        for b in rng_configs[5:10]:
            d_ab = config_distance(a, b, cond_space)
            assert d_ab == config_distance(b, a, cond_space)
            assert 0.0 <= d_ab <= 1.0


def test_distance_matrix_matches_scalar(cond_space):
    configs = random_configs(cond_space, 12, seed=1)
    matrix = distance_matrix(configs, cond_space)
    assert np.allclose(matrix, matrix.T)
    assert np.all(np.diag(matrix) == 0)
    for i in range(12):
        for j in range(12):
            assert matrix[i, j] == pytest.approx(
                config_distance(configs[i], configs[j], cond_space), abs=1e-12
            )


def test_distance_triangle_inequality_unconditional():
    space = ConfigurationSpace(
        hyperparameters=(
            Hyperparameter(name="x", kind=Kind.CONTINUOUS, lower=0.0, upper=1.0),
            Hyperparameter(name="m", kind=Kind.CATEGORICAL, choices=("a", "b", "c")),
            Hyperparameter(name="o", kind=Kind.ORDINAL, choices=(1, 2, 3)),
        )
    )
    configs = random_configs(space, 12, seed=4)
    for a in configs[:4]:
        for b in configs[4:8]:
            for c in configs[8:12]:
                ab = config_distance(a, b, space)
                bc = config_distance(b, c, space)
                ac = config_distance(a, c, space)
                assert ac <= ab + bc + 1e-12


# -- border configs ---------------------------------------------------------------


def test_border_two_numeric_hps_four_corners():
    space = ConfigurationSpace(
        hyperparameters=(
            Hyperparameter(name="x", kind=Kind.CONTINUOUS, lower=0.0, upper=1.0),
            Hyperparameter(name="y", kind=Kind.CONTINUOUS, lower=-5.0, upper=5.0),
        )
    )
    corners = border_configs(space, cap=100)
    assert len(corners) == 4
    keys = {tuple(sorted(c.values.items())) for c in corners}
    assert len(keys) == 4
    for c in corners:
        assert c.values["x"] in (0.0, 1.0)
        assert c.values["y"] in (-5.0, 5.0)


def test_border_cap_sampling_is_distinct_and_reproducible():
    space = ConfigurationSpace(
        hyperparameters=tuple(
            Hyperparameter(name=f"b{i}", kind=Kind.CONTINUOUS, lower=0.0, upper=1.0)
            for i in range(20)
        )
    )
    assert count_corners(space) == 2**20
    first = border_configs(space, cap=100, seed=42)
    second = border_configs(space, cap=100, seed=42)
    assert len(first) == 100
    keys = {tuple(sorted(c.values.items())) for c in first}
    assert len(keys) == 100
    assert first == second
    assert border_configs(space, cap=100, seed=43) != first


def test_border_conditional_hand_enumeration(cond_space):
    corners = border_configs(cond_space, cap=100)
    # hand-enumerated: {ae} x lr-bounds, {vae, latent in {2,16}} x lr-bounds
    projected = {
        (c.values["model"], c.values.get("latent_dim")) for c in corners
    }
    assert projected == {("ae", None), ("vae", 2), ("vae", 16)}
    assert len(corners) == 6  # each of the 3 above at lr in {1e-4, 1.0}


def test_border_corner_property_and_validity(cond_space):
    for config in border_configs(cond_space, cap=100):
        active = validate_config(config, cond_space)
        for name in active:
            hp = cond_space[name]
            value = config.values[name]
            if hp.is_numeric:
                assert value in (hp.lower, hp.upper)
            else:
                assert value in (hp.choices[0], hp.choices[-1])


def test_border_single_choice_categorical():
    space = ConfigurationSpace(
        hyperparameters=(
            Hyperparameter(name="solo", kind=Kind.CATEGORICAL, choices=("only",)),
            Hyperparameter(name="x", kind=Kind.CONTINUOUS, lower=0.0, upper=1.0),
        )
    )
    corners = border_configs(space, cap=10)
    assert len(corners) == 2
    assert all(c.values["solo"] == "only" for c in corners)


# -- random configs ----------------------------------------------------------------


def test_random_zero(cond_space):
    assert random_configs(cond_space, 0, seed=1) == []


def test_random_deterministic_per_seed(cond_space):
    assert random_configs(cond_space, 25, seed=3) == random_configs(cond_space, 25, seed=3)
    assert random_configs(cond_space, 25, seed=3) != random_configs(cond_space, 25, seed=4)


def test_random_configs_are_valid(cond_space):
    for config in random_configs(cond_space, 50, seed=5):
        active = validate_config(config, cond_space)
        assert active == active_hyperparameters(config, cond_space)


def test_random_uniform_mean():
    space = ConfigurationSpace(
        hyperparameters=(
            Hyperparameter(name="x", kind=Kind.CONTINUOUS, lower=0.0, upper=1.0),
        )
    )
    samples = random_configs(space, 10_000, seed=0)
    mean = float(np.mean([c.values["x"] for c in samples]))
    assert abs(mean - 0.5) < 0.02


def test_random_log_uniform_mean():
    space = ConfigurationSpace(
        hyperparameters=(
            Hyperparameter(
                name="x", kind=Kind.CONTINUOUS, lower=1e-4, upper=1.0, log_scale=True
            ),
        )
    )
    samples = random_configs(space, 10_000, seed=0)
    mean_log10 = float(np.mean([math.log10(c.values["x"]) for c in samples]))
    assert abs(mean_log10 - (-2.0)) < 0.05  # uniform in log space


# -- MDS ---------------------------------------------------------------------------


def test_mds_two_points():
    coords = mds_project(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert _pairwise(coords)[0, 1] == pytest.approx(1.0, rel=1e-12)


def test_mds_reconstructs_planar_distances():
    rng = np.random.default_rng(12)
    points = rng.normal(size=(10, 2))
    d = _pairwise(points)
    coords = mds_project(d)
    reconstructed = _pairwise(coords)
    mask = d > 0
    assert np.max(np.abs(reconstructed[mask] - d[mask]) / d[mask]) < 1e-6


def test_mds_all_zero_distances():
    coords = mds_project(np.zeros((4, 4)))
    assert np.allclose(coords, 0.0)


def test_mds_permutation_equivariance():
    rng = np.random.default_rng(13)
    points = rng.normal(size=(8, 2))
    d = _pairwise(points)
    coords = mds_project(d)
    perm = rng.permutation(8)
    coords_perm = mds_project(d[np.ix_(perm, perm)])
    assert np.allclose(coords_perm, coords[perm], atol=1e-8)


def test_mds_rejects_bad_input():
    with pytest.raises(ValidationError):
        mds_project(np.zeros((1, 1)))
    with pytest.raises(ValidationError):
        mds_project(np.array([[0.0, 1.0], [2.0, 0.0]]))  # asymmetric
    with pytest.raises(ValidationError):
        mds_project(np.array([[0.0, -1.0], [-1.0, 0.0]]))  # negative


def test_mds_sign_convention_deterministic():
    rng = np.random.default_rng(14)
    points = rng.normal(size=(6, 2))
    d = _pairwise(points)
    a = mds_project(d)
    b = mds_project(d.copy())
    assert np.array_equal(a, b)
    for col in range(2):
        pivot = int(np.argmax(np.abs(a[:, col])))
        assert a[pivot, col] >= 0


def test_smacof_does_not_increase_stress():
    rng = np.random.default_rng(15)
    # non-Euclidean-ish matrix: random symmetric perturbation of planar distances
    points = rng.normal(size=(12, 2))
    d = _pairwise(points)
    noise = rng.uniform(0, 0.2, size=d.shape)
    d = d + noise + noise.T
    np.fill_diagonal(d, 0.0)
    init = mds_project(d)

    def stress(coords):
        delta = _pairwise(coords)
        return float(((d - delta) ** 2).sum() / 2)

    refined = smacof_refine(d, init)
    assert stress(refined) <= stress(init) + 1e-12
    assert np.array_equal(refined, smacof_refine(d, init))


# -- build_footprint -----------------------------------------------------------------


def test_footprint_single_point_at_origin():
    run = build_run(trials=[(0, 11.11, (0.4,), Status.SUCCESS)])
    points = build_footprint(run, "cost", 100.0, n_border=0, n_random=0)
    assert len(points) == 1
    assert (points[0].x, points[0].y) == (0.0, 0.0)
    assert points[0].kind == "incumbent"
    assert points[0].cost == 0.4


def test_footprint_duplicate_configs_coincide():
    configs = [Configuration(values={"x": 4.0}), Configuration(values={"x": 4.0})]
    run = build_run(
        configs=configs,
        trials=[
            (0, 11.11, (0.4,), Status.SUCCESS),
            (1, 11.11, (0.5,), Status.SUCCESS),
        ],
    )
    points = build_footprint(run, "cost", 100.0, n_border=4, n_random=4, seed=0)
    a, b = points[0], points[1]
    assert (a.x, a.y) == pytest.approx((b.x, b.y), abs=1e-6)


def test_footprint_kinds_and_costs():
    run = make_fixture_run(n_configs=20)
    points = build_footprint(run, "cost", 100.0, n_border=10, n_random=10, seed=2)
    kinds = {p.kind for p in points}
    assert kinds == {"evaluated", "incumbent", "border", "random"}
    assert sum(1 for p in points if p.kind == "incumbent") == 1
    for p in points:
        if p.kind in ("evaluated", "incumbent"):
            assert p.cost is not None and p.config_id is not None
        else:
            assert p.cost is None and p.config_id is None
        assert p.values  # hover payload always carries the configuration


def test_footprint_embedding_rank_correlates_with_input():
    from optboard.analysis import spearman

    run = make_fixture_run(n_configs=30)
    costs_points = build_footprint(run, "cost", 100.0, n_border=20, n_random=20, seed=3)
    configs = [Configuration(values=p.values) for p in costs_points]
    d_in = distance_matrix(configs, run.space)
    coords = np.array([[p.x, p.y] for p in costs_points])
    d_out = _pairwise(coords)
    iu = np.triu_indices(len(configs), k=1)
    rho = spearman(d_in[iu], d_out[iu])
    assert rho >= 0.7


def test_footprint_requires_an_evaluated_config():
    run = build_run(trials=[(0, 11.11, None, Status.CRASHED)])
    with pytest.raises(ValidationError):
        build_footprint(run, "cost", 100.0)
