import numpy as np
import pytest

from paracut import (ALGORITHMS, GAP_SLACK, GridEnergy, SolverConfig,
                     brute_force_mincut, decompose_grid, level_sets,
                     random_grid, solve, threshold)

from gen import tiny_grid


def _cfg(algo, **kw):
    kw.setdefault("max_iters", 20000)
    kw.setdefault("check_every", 5)
    return SolverConfig(algorithm=algo, **kw)


def test_threshold_is_strict_at_zero():
    x = np.array([-1.0, 0.0, 1e-300, 2.0])
    assert threshold(x).tolist() == [0, 0, 1, 1]
    assert threshold(x).dtype == np.uint8


def test_level_sets_are_nested_and_complete():
    x = np.array([0.5, -0.2, 0.5, 0.0])
    ls = level_sets(x)
    assert len(ls) == 4
    assert ls[0].tolist() == [1, 1, 1, 1]
    assert ls[-1].tolist() == [0, 0, 0, 0]
    for hi, lo in zip(ls, ls[1:]):
        assert np.all(hi >= lo)
    assert any(np.array_equal(l, threshold(x)) for l in ls)
    assert len(level_sets(np.zeros(3))) == 2


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_edge_free_instance_certifies_at_iteration_zero(algo):
    g = GridEnergy((2, 2), "2D-4", np.array([1.0, -1.0, 0.0, 2.0]),
                   [np.zeros((2, 1)), np.zeros((1, 2))])
    res = solve(g, decompose_grid(g), _cfg(algo))
    assert res.certified and res.iterations == 0
    assert res.labeling.tolist() == [1, 0, 0, 1]
    assert res.gap <= GAP_SLACK


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_matches_brute_force_on_random_battery(algo):
    rng = np.random.default_rng(hash(algo) % 2 ** 31)
    for _ in range(30):
        g = tiny_grid(rng)
        _, e_opt = brute_force_mincut(g)
        res = solve(g, decompose_grid(g), _cfg(algo))
        assert res.certified, (g.dims, res.gap)
        assert res.energy == pytest.approx(e_opt, abs=1e-9)
        assert g.energy(res.labeling) == pytest.approx(res.energy, abs=1e-12)


def test_isolated_node_with_unary_mass():
    # node 0 has no incident edges but carries weight; it sits in edgeless
    # singleton chains whose polytope pins its dual to 0, so its label is
    # decided by the sign of w alone and solvers still certify
    row = np.array([[0.0, 1.0, 0.5]])
    g = GridEnergy((1, 4), "2D-4", np.array([3.0, -1.0, 0.25, -0.5]),
                   [row, np.zeros((0, 4))])
    _, e_opt = brute_force_mincut(g)
    for algo in ALGORITHMS:
        res = solve(g, decompose_grid(g), _cfg(algo))
        assert res.certified
        assert res.energy == pytest.approx(e_opt, abs=1e-9)
        assert res.labeling[0] == 1


def test_monitor_sequences_are_monotone():
    rng = np.random.default_rng(0)
    g = random_grid((16, 16), "2D-8", rng)
    dec = decompose_grid(g)
    res = solve(g, dec, _cfg("bcd"))
    d = np.diff(res.monitor["dual_objective"])
    assert d.size and np.all(d >= -1e-9)
    res = solve(g, dec, _cfg("ap"))
    d = np.diff(res.monitor["ap_distance"])
    assert d.size and np.all(d <= 1e-9)
    res = solve(g, dec, _cfg("aar"))
    d = np.diff(res.monitor["aar_step_norm"])
    assert d.size and np.all(d <= 1e-9)
    res = solve(g, dec, _cfg("fista"))
    assert "dual_objective" in res.monitor


def test_gap_trace_never_negative_and_stops_within_tol():
    rng = np.random.default_rng(1)
    for _ in range(10):
        g = tiny_grid(rng)
        for algo in ALGORITHMS:
            res = solve(g, decompose_grid(g), _cfg(algo, check_every=1))
            gaps = [row.gap for row in res.trace]
            assert min(gaps) >= -1e-9
            assert res.gap <= GAP_SLACK


def test_trace_rows_carry_jaccard_to_final_by_default():
    rng = np.random.default_rng(2)
    g = random_grid((12, 12), "2D-4", rng)
    res = solve(g, decompose_grid(g), _cfg("aar", check_every=1))
    assert res.trace[0].iteration == 0
    assert [r.iteration for r in res.trace] == list(range(len(res.trace)))
    assert res.trace[-1].jaccard == 0.0  # final labeling vs itself
    assert all(0.0 <= r.jaccard <= 1.0 for r in res.trace)
    wall = [r.wall_s for r in res.trace]
    assert all(b >= a for a, b in zip(wall, wall[1:]))


def test_reference_labeling_overrides_trace_jaccard():
    rng = np.random.default_rng(3)
    g = random_grid((10, 10), "2D-4", rng)
    ref = np.ones(g.n, dtype=np.uint8)
    res = solve(g, decompose_grid(g), _cfg("aar", reference=ref))
    from paracut import jaccard_distance
    assert res.trace[-1].jaccard == pytest.approx(
        jaccard_distance(res.labeling, ref))


def test_max_iters_bound_is_respected():
    rng = np.random.default_rng(4)
    g = random_grid((24, 24), "2D-8", rng)
    res = solve(g, decompose_grid(g), _cfg("ap", max_iters=3, check_every=1))
    assert res.iterations <= 3
    assert not res.certified
    assert res.gap > GAP_SLACK


def test_best_iterate_is_reported_not_last():
    # with a crude iteration budget the best-gap checkpoint wins
    rng = np.random.default_rng(5)
    g = random_grid((20, 20), "2D-4", rng)
    res = solve(g, decompose_grid(g), _cfg("fista", max_iters=40,
                                           check_every=1))
    gaps = [row.gap for row in res.trace]
    assert res.gap == pytest.approx(min(gaps), abs=0)


def test_dual_tol_stops_on_stalled_iterates():
    # gap checkpoints disabled beyond iteration 0; only the iterate-change
    # criterion can stop the loop early, and stalled iterates are optimal
    rng = np.random.default_rng(6)
    g = random_grid((16, 16), "2D-4", rng)
    dec = decompose_grid(g)
    for algo in ALGORITHMS:
        res = solve(g, dec, _cfg(algo, dual_tol=1e-7, check_every=10 ** 9))
        assert res.iterations < 20000, algo
        assert res.certified, algo


def test_warm_start_shapes_and_fingerprint():
    rng = np.random.default_rng(7)
    g = random_grid((12, 12), "2D-4", rng)
    dec = decompose_grid(g)
    res = solve(g, dec, _cfg("aar"))
    st = res.dual_state
    assert st.fingerprint is not None and st.z is not None

    other = random_grid((12, 12), "2D-4", rng)
    with pytest.raises(ValueError, match="fingerprint"):
        solve(other, decompose_grid(other), _cfg("aar", warm_start=st))
    forced = solve(other, decompose_grid(other),
                   _cfg("aar", warm_start=st, force_warm=True))
    assert forced.certified

    bad = st.copy()
    bad.z = np.zeros((1, 5))
    with pytest.raises(ValueError, match="shape"):
        solve(g, dec, _cfg("aar", warm_start=bad, force_warm=True))


def test_warm_start_reduces_iterations_after_small_perturbation():
    rng = np.random.default_rng(8)
    g = random_grid((32, 32), "2D-4", rng)
    dec = decompose_grid(g)
    base = solve(g, dec, _cfg("aar", check_every=1))
    g2 = GridEnergy(g.dims, g.connectivity,
                    g.w * (1 + rng.uniform(-0.02, 0.02, g.n)),
                    [a.copy() for a in g.dir_weights])
    dec2 = decompose_grid(g2)
    cold = solve(g2, dec2, _cfg("aar", check_every=1))
    warm = solve(g2, dec2, _cfg("aar", check_every=1,
                                warm_start=base.dual_state))
    assert warm.certified and cold.certified
    assert warm.iterations <= cold.iterations


def test_cross_algorithm_warm_start_uses_y():
    rng = np.random.default_rng(9)
    g = random_grid((12, 12), "2D-4", rng)
    dec = decompose_grid(g)
    res = solve(g, dec, _cfg("bcd"))
    for algo in ("ap", "aar", "fista"):
        warm = solve(g, dec, _cfg(algo, warm_start=res.dual_state))
        assert warm.certified
        assert warm.iterations == 0  # already optimal duals


def test_thread_count_does_not_change_results():
    rng = np.random.default_rng(10)
    g = random_grid((40, 40), "2D-8", rng)
    dec = decompose_grid(g)
    ref = {}
    for algo in ALGORITHMS:
        for th in (1, 2, 8):
            res = solve(g, dec, _cfg(algo, threads=th, max_iters=60,
                                     check_every=6))
            key = algo
            got = (res.gap, res.tv_solution.tobytes(),
                   res.dual_state.y.tobytes() if res.dual_state.y is not None
                   else res.dual_state.z.tobytes())
            if key in ref:
                assert got == ref[key], (algo, th)  # bitwise identical
            else:
                ref[key] = got


def test_solver_config_validation():
    with pytest.raises(ValueError, match="algorithm"):
        SolverConfig(algorithm="newton")
    with pytest.raises(ValueError, match="max_iters"):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError, match="tolerances"):
        SolverConfig(gap_tol=-1e-3)
    with pytest.raises(ValueError, match=">= 1"):
        SolverConfig(threads=0)


def test_wall_time_and_energy_fields_populated():
    rng = np.random.default_rng(11)
    g = random_grid((8, 8), "2D-4", rng)
    res = solve(g, decompose_grid(g), _cfg("aar"))
    assert res.wall_time > 0
    assert res.algorithm == "aar"
    assert g.energy(res.labeling) == pytest.approx(res.energy, abs=1e-12)
    assert np.array_equal(threshold(res.tv_solution), res.labeling)
