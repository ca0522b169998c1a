import math

import numpy as np
import pytest

from conftest import brute_force_star, dense_scan_star

from jitterdisc.core import PointSet, count_closed, count_open, volume_anchored
from jitterdisc.discrepancy import (
    EnumerationBudgetError,
    compute_star,
    critical_grid,
    expected_l2sq_partition,
    expected_l2sq_random,
    l2_bruteforce,
    l2_star,
    pointwise_count_variance,
    resolve_method,
    star_1d_exact,
    star_exact_bb,
    star_exact_grid,
    star_heuristic_lower,
)
from jitterdisc.generators import gen_jittered, gen_partition_jittered, gen_uniform
from jitterdisc.partition import (
    grid_partition,
    random_box_partition,
    randomized_fine_grid_partition,
)


def _witness_value(ps, w):
    vol = volume_anchored(w)
    return max(
        count_closed(ps, w) / ps.n - vol, vol - count_open(ps, w) / ps.n
    )


# ---------------------------------------------------------------------------
# star, 1-d


def test_star_1d_examples():
    assert star_1d_exact(PointSet([[0.5]])).value == pytest.approx(0.5, abs=1e-15)
    centered = PointSet([[1 / 8], [3 / 8], [5 / 8], [7 / 8]])
    assert star_1d_exact(centered).value == pytest.approx(0.125, abs=1e-15)


def test_star_1d_brute_force_value():
    pts = np.array([[0.1], [0.2], [0.9]])
    oracle = brute_force_star(pts)  # = 7/15
    assert oracle == pytest.approx(7 / 15, abs=1e-12)
    assert star_1d_exact(PointSet(pts)).value == pytest.approx(oracle, abs=1e-12)


def test_star_1d_rejects_higher_dim():
    with pytest.raises(ValueError):
        star_1d_exact(PointSet([[0.1, 0.2]]))


def test_star_1d_point_at_one():
    assert star_1d_exact(PointSet([[1.0]])).value == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------------------
# star, exact grid


def test_star_grid_degenerate_repeated_origin():
    for d in (1, 2, 3):
        ps = PointSet(np.zeros((4, d)))
        assert star_exact_grid(ps).value == pytest.approx(1.0, abs=1e-15)


def test_star_grid_single_center_point():
    ps = PointSet([[0.5, 0.5]])
    res = star_exact_grid(ps)
    assert res.value == pytest.approx(0.75, abs=1e-15)
    assert res.witness.tolist() == [0.5, 0.5]
    assert res.is_exact and res.method == "exact_grid"
    # dense anchor lattice approaches the same supremum
    assert abs(dense_scan_star(ps.points, 200) - 0.75) < 1e-3


def test_star_grid_matches_1d_exact(rng):
    for _ in range(20):
        ps = PointSet(rng.random((int(rng.integers(1, 30)), 1)))
        a = star_1d_exact(ps).value
        b = star_exact_grid(ps).value
        assert abs(a - b) <= 1e-12


def test_star_grid_matches_brute_force(rng):
    for d in (2, 3):
        for _ in range(10):
            pts = rng.random((int(rng.integers(1, 9)), d))
            assert star_exact_grid(PointSet(pts)).value == pytest.approx(
                brute_force_star(pts), abs=1e-12
            )


def test_star_grid_budget_refusal():
    ps = gen_uniform(50, 2, seed=1)
    with pytest.raises(EnumerationBudgetError):
        star_exact_grid(ps, budget=100)


def test_star_grid_witness_attains_value(rng):
    for _ in range(10):
        ps = PointSet(rng.random((12, 2)))
        res = star_exact_grid(ps)
        assert _witness_value(ps, res.witness) == pytest.approx(res.value, abs=1e-12)


def test_star_grid_duplicate_coordinates():
    pts = np.array([[0.5, 0.25], [0.5, 0.75], [0.5, 0.25]])
    assert star_exact_grid(PointSet(pts)).value == pytest.approx(
        brute_force_star(pts), abs=1e-12
    )


# ---------------------------------------------------------------------------
# star, branch and bound


def test_star_bb_equals_grid(rng):
    for d in (1, 2, 3):
        for _ in range(10):
            n = int(rng.integers(1, 20))
            ps = PointSet(rng.random((n, d)))
            g = star_exact_grid(ps)
            b = star_exact_bb(ps)
            assert b.is_exact
            assert abs(g.value - b.value) <= 1e-12


def test_star_bb_jittered_d3():
    ps = gen_jittered(3, 3, seed=5)
    g = star_exact_grid(ps)
    b = star_exact_bb(ps)
    assert abs(g.value - b.value) <= 1e-12


def test_star_bb_single_center_point():
    res = star_exact_bb(PointSet([[0.5, 0.5]]))
    assert res.value == pytest.approx(0.75, abs=1e-15)
    assert res.is_exact


def test_star_bb_budget_exhaustion_gives_lower_bound():
    ps = gen_uniform(24, 2, seed=8)
    exact = star_exact_grid(ps).value
    res = star_exact_bb(ps, budget=4, warm_restarts=1)
    assert not res.is_exact
    assert res.value <= exact + 1e-12


def test_star_bb_witness_attains_value(rng):
    ps = PointSet(rng.random((10, 3)))
    res = star_exact_bb(ps)
    assert _witness_value(ps, res.witness) == pytest.approx(res.value, abs=1e-12)


# ---------------------------------------------------------------------------
# star, heuristic


def test_heuristic_is_lower_bound_and_deterministic(rng):
    for _ in range(15):
        ps = PointSet(rng.random((int(rng.integers(2, 25)), 2)))
        exact = star_exact_grid(ps).value
        h1 = star_heuristic_lower(ps, restarts=8, seed=3)
        h2 = star_heuristic_lower(ps, restarts=8, seed=3)
        assert h1.value <= exact + 1e-12
        assert h1.value == h2.value
        assert not h1.is_exact
        assert _witness_value(ps, h1.witness) == pytest.approx(h1.value, abs=1e-12)


def test_heuristic_finds_single_point_witness():
    res = star_heuristic_lower(PointSet([[0.5, 0.5]]), restarts=4, seed=0)
    assert res.value == pytest.approx(0.75, abs=1e-15)


def test_heuristic_rejects_bad_restarts():
    with pytest.raises(ValueError):
        star_heuristic_lower(PointSet([[0.5]]), restarts=0)


# ---------------------------------------------------------------------------
# dispatch


def test_resolve_method():
    assert resolve_method(100, 1) == "exact_1d"
    assert resolve_method(100, 2) == "exact_grid"
    assert resolve_method(3125, 5) == "exact_bb"


def test_compute_star_dispatch():
    ps = gen_uniform(12, 2, seed=2)
    auto = compute_star(ps)
    assert auto.method == "exact_grid"
    assert compute_star(ps, "exact-bb").value == pytest.approx(auto.value, abs=1e-12)
    with pytest.raises(ValueError):
        compute_star(ps, "nope")


def test_result_json_dict():
    res = star_exact_grid(PointSet([[0.5, 0.5]]))
    doc = res.to_json_dict()
    assert set(doc) == {"value", "witness", "method", "is_exact", "n", "d", "wall_time_ms"}
    assert doc["n"] == 1 and doc["d"] == 2


def test_jittered_1d_star_below_cell_width(rng):
    # one point per cell forces the 1-d discrepancy under 1/m
    for m in (4, 16, 64):
        ps = gen_jittered(m, 1, seed=int(rng.integers(0, 2**32)))
        assert star_1d_exact(ps).value <= 1.0 / m + 1e-15


# ---------------------------------------------------------------------------
# L2 closed form


def test_l2_star_analytic_1d():
    assert l2_star(PointSet([[0.0]])) == pytest.approx(1 / 3, abs=1e-12)
    assert l2_star(PointSet([[0.5]])) == pytest.approx(1 / 12, abs=1e-12)


def test_l2_star_analytic_2d_center():
    expected = 0.25 - 0.5 * 0.75**2 + 1 / 9
    assert l2_star(PointSet([[0.5, 0.5]])) == pytest.approx(expected, abs=1e-12)


def test_l2_star_nonnegative(rng):
    for _ in range(20):
        ps = PointSet(rng.random((int(rng.integers(1, 30)), int(rng.integers(1, 4)))))
        assert l2_star(ps) >= 0.0


def test_l2_bruteforce_validates_samples():
    with pytest.raises(ValueError):
        l2_bruteforce(PointSet([[0.5]]), samples=0)


def test_l2_bruteforce_matches_analytic():
    est, se = l2_bruteforce(PointSet([[0.0]]), samples=200_000, seed=4)
    assert abs(est - 1 / 3) < 4 * se


def test_l2_closed_form_matches_bruteforce(rng):
    for _ in range(5):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 17))
        ps = PointSet(rng.random((n, d)))
        exact = l2_star(ps)
        est, se = l2_bruteforce(ps, samples=100_000, seed=int(rng.integers(2**32)))
        assert abs(est - exact) < 4 * se


# ---------------------------------------------------------------------------
# expectations


def test_expected_l2sq_random_values():
    assert expected_l2sq_random(1, 1) == pytest.approx(1 / 6, abs=1e-15)
    assert expected_l2sq_random(4, 2) == pytest.approx(5 / 144, abs=1e-15)
    # decreasing in n
    vals = [expected_l2sq_random(n, 2) for n in range(1, 50)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_expected_l2sq_random_monte_carlo_oracle():
    # d=1, N=1: mean of l2_star over random singletons should be 1/6
    rng = np.random.default_rng(101)
    reps = 20_000
    vals = [l2_star(PointSet([[rng.random()]])) for _ in range(reps)]
    se = np.std(vals, ddof=1) / math.sqrt(reps)
    assert abs(np.mean(vals) - 1 / 6) < 4 * se


def test_expected_l2sq_partition_single_cell_equals_random():
    for d in (1, 2, 3):
        part = grid_partition(1, d)
        assert expected_l2sq_partition(part) == pytest.approx(
            expected_l2sq_random(1, d), abs=1e-14
        )


def test_expected_l2sq_partition_grid21_closed_form():
    assert expected_l2sq_partition(grid_partition(2, 1)) == pytest.approx(
        1 / 24, abs=1e-14
    )


def test_expected_l2sq_partition_monte_carlo_oracle():
    part = grid_partition(2, 1)
    reps = 20_000
    vals = [
        l2_star(gen_partition_jittered(part, seed)) for seed in range(reps)
    ]
    se = np.std(vals, ddof=1) / math.sqrt(reps)
    assert abs(np.mean(vals) - 1 / 24) < 4 * se


def test_partition_principle_deterministic(rng):
    parts = [grid_partition(m, d) for m in (2, 3) for d in (1, 2)]
    parts += [random_box_partition(int(rng.integers(2, 9)), 2, seed=s) for s in range(5)]
    parts += [random_box_partition(4, 3, seed=9, boxes_per_cell=2)]
    for part in parts:
        lhs = expected_l2sq_partition(part)
        rhs = expected_l2sq_random(part.n_cells, part.dim)
        assert lhs <= rhs + 1e-12


def test_fine_grid_partition_approaches_random_from_below():
    rand = expected_l2sq_random(4, 2)
    means = []
    for m_fine in (2, 4, 8, 16):
        vals = [
            expected_l2sq_partition(randomized_fine_grid_partition(m_fine, 4, 2, s))
            for s in range(5)
        ]
        means.append(np.mean(vals))
        assert all(v <= rand + 1e-12 for v in vals)
    assert all(a < b for a, b in zip(means, means[1:]))


# ---------------------------------------------------------------------------
# pointwise variance


def test_pointwise_variance_edges():
    part = grid_partition(2, 2)
    assert pointwise_count_variance(part, [1.0, 1.0]) == pytest.approx(0.0, abs=1e-12)
    assert pointwise_count_variance(part, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)


def test_pointwise_variance_grid21():
    part = grid_partition(2, 1)
    var = pointwise_count_variance(part, [0.75])
    assert var == pytest.approx(0.25, abs=1e-12)
    n_vol = 2 * 0.75
    assert n_vol * (1 - 0.75) == pytest.approx(0.375, abs=1e-15)
    assert var <= 0.375


def test_pointwise_variance_monte_carlo_oracle():
    part = grid_partition(2, 1)
    reps = 20_000
    counts = np.array(
        [
            count_closed(gen_partition_jittered(part, s), [0.75])
            for s in range(reps)
        ]
    )
    est = counts.var(ddof=1)
    se = est * math.sqrt(2.0 / reps)
    assert abs(est - 0.25) < 4 * se


def test_pointwise_domination_property(rng):
    for part in [
        grid_partition(3, 2),
        random_box_partition(5, 2, seed=1),
        randomized_fine_grid_partition(4, 4, 2, seed=2),
    ]:
        n = part.n_cells
        for _ in range(25):
            x = rng.random(part.dim)
            vol = volume_anchored(x)
            assert pointwise_count_variance(part, x) <= n * vol * (1 - vol) + 1e-12


def test_count_mean_identity_monte_carlo():
    # E count/N should equal the anchored volume
    part = random_box_partition(4, 2, seed=6)
    x = np.array([0.6, 0.8])
    reps = 20_000
    counts = np.array(
        [count_closed(gen_partition_jittered(part, s), x) for s in range(reps)]
    )
    mean = counts.mean() / part.n_cells
    se = counts.std(ddof=1) / part.n_cells / math.sqrt(reps)
    assert abs(mean - volume_anchored(x)) < 4 * se


def test_critical_grid_structure(rng):
    ps = PointSet(rng.random((7, 2)))
    grids = critical_grid(ps)
    for j, g in enumerate(grids):
        assert g[-1] == 1.0
        assert np.all(np.diff(g) > 0)
        assert set(ps.points[:, j]) <= set(g.tolist())
