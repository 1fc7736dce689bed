"""Weighted 1D TV prox against an independent QP oracle plus exact laws."""
import numpy as np
import pytest

from paracut import Chain, chain_dual_feasible, tv1d_prox

from gen import chain_case
from qp_oracle import tv1d_prox_qp


def test_two_point_closed_form():
    # fuse at the mean iff the weight covers half the gap
    s = np.array([1.0, -1.0])
    assert tv1d_prox(s, np.array([1.0])).tolist() == [0.0, 0.0]
    assert tv1d_prox(s, np.array([0.25])).tolist() == [0.75, -0.75]
    assert tv1d_prox(s, np.array([0.0])).tolist() == [1.0, -1.0]
    rng = np.random.default_rng(0)
    for _ in range(200):
        s = rng.normal(size=2) * 3
        a = float(rng.uniform(0, 3))
        x = tv1d_prox(s, np.array([a]))
        half = abs(s[0] - s[1]) / 2
        if a >= half:
            m = (s[0] + s[1]) / 2
            assert x.tolist() == [m, m]
        else:
            shift = a if s[0] > s[1] else -a
            assert x[0] == pytest.approx(s[0] - shift, abs=1e-14)
            assert x[1] == pytest.approx(s[1] + shift, abs=1e-14)


def test_zero_weights_return_signal_bitwise():
    rng = np.random.default_rng(1)
    s = rng.normal(size=40)
    x = tv1d_prox(s, np.zeros(39))
    assert np.array_equal(x, s)


def test_constant_signal_is_fixed_point_bitwise():
    rng = np.random.default_rng(2)
    s = np.full(25, -0.3)
    a = rng.uniform(0, 2, 24)
    assert np.array_equal(tv1d_prox(s, a), s)


def test_single_point_identity():
    assert tv1d_prox(np.array([4.2]), np.zeros(0)).tolist() == [4.2]


def test_matches_qp_oracle():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(400):
        s, a = chain_case(rng)
        x = tv1d_prox(s, a)
        xq = tv1d_prox_qp(s, a)
        worst = max(worst, float(np.max(np.abs(x - xq))) if x.size else 0.0)
    assert worst < 1e-8, worst


def test_dual_feasibility_of_residual():
    # Moreau: s - prox(s) is the projection onto the dual box polytope
    rng = np.random.default_rng(4)
    for _ in range(300):
        s, a = chain_case(rng)
        x = tv1d_prox(s, a)
        assert chain_dual_feasible(s - x, a)


def test_taut_string_boundary_certificate():
    # wherever the solution jumps, the dual partial sum sits on its bound
    rng = np.random.default_rng(5)
    for _ in range(200):
        s, a = chain_case(rng)
        if s.size < 2:
            continue
        x = tv1d_prox(s, a)
        t = np.cumsum(s - x)[:-1]
        jump = np.diff(x)
        for k in np.nonzero(np.abs(jump) > 1e-10)[0]:
            want = -a[k] if jump[k] > 0 else a[k]
            assert t[k] == pytest.approx(want, abs=1e-9)


def test_prox_is_monotone_and_nonexpansive():
    rng = np.random.default_rng(6)
    for _ in range(200):
        s, a = chain_case(rng, m_max=30)
        t = s + rng.normal(0, 0.5, s.size)
        xs, xt = tv1d_prox(s, a), tv1d_prox(t, a)
        assert np.linalg.norm(xs - xt) <= np.linalg.norm(s - t) + 1e-10
        bump = s.copy()
        bump += np.abs(rng.normal(0, 0.5, s.size))
        assert np.all(tv1d_prox(bump, a) >= xs - 1e-10)


def test_mean_is_preserved():
    # total shift of the taut string is zero: sum(x) == sum(s)
    rng = np.random.default_rng(7)
    for _ in range(200):
        s, a = chain_case(rng)
        x = tv1d_prox(s, a)
        assert float(x.sum()) == pytest.approx(float(s.sum()), abs=1e-9)


def test_input_validation():
    with pytest.raises(ValueError):
        tv1d_prox(np.zeros(0), np.zeros(0))
    with pytest.raises(ValueError):
        tv1d_prox(np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        tv1d_prox(np.zeros(3), np.array([1.0, -0.5]))


def test_chain_container_validation():
    ch = Chain(np.array([4, 7, 9]), np.array([1.0, 0.5]))
    assert ch.node_ids.tolist() == [4, 7, 9]
    with pytest.raises(ValueError):
        Chain(np.array([4, 4]), np.array([1.0]))
    with pytest.raises(ValueError):
        Chain(np.array([4, 5]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        Chain(np.array([4, 5]), np.array([-1.0]))


def test_chain_dual_feasible_boundaries():
    a = np.array([1.0, 2.0])
    assert chain_dual_feasible(np.array([1.0, 1.0, -2.0]), a)
    assert not chain_dual_feasible(np.array([1.1, 0.9, -2.0]), a)
    assert not chain_dual_feasible(np.array([1.0, 1.0, -1.0]), a)  # sum != 0


def test_soft_linear_scaling():
    # a hard guarantee is not testable here; check throughput stays sane
    import time
    rng = np.random.default_rng(8)
    s = rng.normal(size=200000)
    a = rng.uniform(0, 1.5, s.size - 1)
    tv1d_prox(s[:100], a[:99])  # warm the kernel
    t0 = time.perf_counter()
    tv1d_prox(s, a)
    dt = time.perf_counter() - t0
    assert dt < 1.0, dt
