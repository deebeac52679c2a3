from itertools import combinations

import numpy as np
import pytest

from helpers import enumerate_lagrangian_min, random_tiny_instance
from kcompress.dual import (
    DualState,
    SelectionResult,
    SolverConfig,
    batch_subgradient,
    dual_value,
    duality_gap,
    initial_state,
    inner_solution,
    primal_recovery,
    repair_feasibility,
    run_subgradient,
    subgradient,
)
from kcompress.errors import EmptyHistoryError
from kcompress.oracle import SelectionInstance, solve_exact


def _zero_state(instance):
    return DualState(theta0=0.0, theta=np.zeros(instance.n_particles))


def _random_state(rng, instance, scale=1.0):
    return DualState(
        theta0=float(rng.uniform(0, scale)),
        theta=rng.uniform(-scale, scale, size=instance.n_particles),
    )


def _theta_groups(instance, theta):
    """Split a flat theta vector back into per-group vectors."""
    out = []
    start = 0
    for cloud in instance.clouds:
        out.append(theta[start : start + len(cloud)])
        start += len(cloud)
    return out


# ---------------------------------------------------------------------------
# inner solution / dual value / subgradient
# ---------------------------------------------------------------------------

def test_zero_multipliers_select_nothing():
    rng = np.random.default_rng(0)
    inst = random_tiny_instance(rng)
    gamma, beta = inner_solution(inst, _zero_state(inst))
    assert gamma.sum() == 0
    assert not beta.any()
    assert dual_value(inst, _zero_state(inst)) == 0.0


def test_huge_threshold_dominates():
    inst = SelectionInstance.build(
        [(1.0, [(0.0, 0.0)])], [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)], 1.0, 1
    )
    state = DualState(theta0=0.0, theta=np.array([10.0]))
    gamma, beta = inner_solution(inst, state)
    np.testing.assert_array_equal(gamma, [1, 1, 1])
    assert beta.all()


def test_dual_value_large_theta0():
    rng = np.random.default_rng(1)
    inst = random_tiny_instance(rng)
    theta = rng.uniform(0, 1, size=inst.n_particles)
    state = DualState(theta0=1e6, theta=theta)
    expected = theta.sum() - inst.budget * 1e6
    assert dual_value(inst, state) == pytest.approx(expected, rel=1e-12)


def test_inner_attains_enumerated_minimum():
    rng = np.random.default_rng(7)
    for _ in range(15):
        inst = random_tiny_instance(rng, max_particles=4, max_k=8)
        state = _random_state(rng, inst, scale=0.3)
        value = dual_value(inst, state)
        blocks = [c.entries for c in inst.costs]
        brute = enumerate_lagrangian_min(
            inst.weights,
            blocks,
            inst.budget,
            state.theta0,
            _theta_groups(inst, state.theta),
        )
        assert value == pytest.approx(brute, abs=1e-12)


def test_dual_value_is_lagrangian_at_inner_solution():
    rng = np.random.default_rng(3)
    for _ in range(10):
        inst = random_tiny_instance(rng)
        state = _random_state(rng, inst, scale=0.5)
        gamma, beta = inner_solution(inst, state)
        wd = inst.stacked_weighted_costs()
        lagrangian = (
            float((wd * beta).sum())
            + float(state.theta @ (1.0 - beta.sum(axis=1)))
            + state.theta0 * (float(gamma.sum()) - inst.budget)
        )
        assert dual_value(inst, state) == pytest.approx(lagrangian, abs=1e-12)


def test_beta_only_on_selected():
    rng = np.random.default_rng(4)
    for _ in range(10):
        inst = random_tiny_instance(rng)
        gamma, beta = inner_solution(inst, _random_state(rng, inst))
        assert not beta[:, gamma == 0].any()


def test_subgradient_at_zero():
    rng = np.random.default_rng(5)
    inst = random_tiny_instance(rng)
    state = _zero_state(inst)
    g0, g = subgradient(inst, state, inner_solution(inst, state))
    assert g0 == -inst.budget
    np.testing.assert_array_equal(g, np.ones(inst.n_particles))


def test_supergradient_inequality():
    rng = np.random.default_rng(6)
    for _ in range(40):
        inst = random_tiny_instance(rng, max_particles=5, max_k=8)
        state = _random_state(rng, inst, scale=0.4)
        other = _random_state(rng, inst, scale=0.4)
        g0, g = subgradient(inst, state, inner_solution(inst, state))
        lhs = dual_value(inst, other)
        rhs = (
            dual_value(inst, state)
            + g0 * (other.theta0 - state.theta0)
            + float(g @ (other.theta - state.theta))
        )
        assert lhs <= rhs + 1e-12


def test_concavity_probe():
    rng = np.random.default_rng(8)
    for _ in range(20):
        inst = random_tiny_instance(rng, max_particles=5, max_k=8)
        a = _random_state(rng, inst, scale=0.4)
        b = _random_state(rng, inst, scale=0.4)
        t = float(rng.uniform(0.1, 0.9))
        mix = DualState(
            theta0=t * a.theta0 + (1 - t) * b.theta0,
            theta=t * a.theta + (1 - t) * b.theta,
        )
        assert dual_value(inst, mix) >= (
            t * dual_value(inst, a) + (1 - t) * dual_value(inst, b) - 1e-12
        )


def test_weak_duality_random_multipliers():
    rng = np.random.default_rng(9)
    inst = random_tiny_instance(rng)
    _, optimum, _ = solve_exact(inst)
    for _ in range(200):
        state = _random_state(rng, inst, scale=0.5)
        assert dual_value(inst, state) <= optimum + 1e-9


# ---------------------------------------------------------------------------
# stochastic estimates
# ---------------------------------------------------------------------------

def test_batch_estimates_unbiased():
    rng = np.random.default_rng(10)
    inst = random_tiny_instance(rng, max_k=8)
    state = _random_state(rng, inst, scale=0.4)
    gamma, beta = inner_solution(inst, state)
    g0_full = float(gamma.sum()) - inst.budget
    g_full = 1.0 - beta.sum(axis=1)
    k = inst.n_candidates
    for b in (2, 4):
        batches = list(combinations(range(k), b))
        avg0 = 0.0
        avg = np.zeros(inst.n_particles)
        for batch in batches:
            g0, g = batch_subgradient(inst, state, batch)
            avg0 += g0
            avg += g
        avg0 /= len(batches)
        avg /= len(batches)
        assert avg0 == pytest.approx(g0_full, abs=1e-12)
        np.testing.assert_allclose(avg, g_full, atol=1e-12)


# ---------------------------------------------------------------------------
# primal recovery and repair
# ---------------------------------------------------------------------------

def test_recovery_constant_history():
    gamma = np.array([1, 0, 1, 0], dtype=np.int8)
    bar, rounded = primal_recovery([(gamma, 0.5), (gamma, 0.25)], 2)
    np.testing.assert_array_equal(bar, gamma)
    np.testing.assert_array_equal(rounded, gamma)


def test_recovery_tie_to_lowest_index():
    bar, rounded = primal_recovery(
        [(np.array([1, 0]), 0.1), (np.array([0, 1]), 0.1)], 1
    )
    np.testing.assert_allclose(bar, [0.5, 0.5])
    np.testing.assert_array_equal(rounded, [1, 0])


def test_recovery_mass_identity():
    rng = np.random.default_rng(11)
    entries = [
        (rng.integers(0, 2, size=6).astype(np.int8), float(rng.uniform(0.1, 1)))
        for _ in range(12)
    ]
    bar, _ = primal_recovery(entries, 3)
    alphas = np.array([a for _, a in entries])
    omega = alphas / alphas.sum()
    expected = float(
        sum(w * g.sum() for (g, _), w in zip(entries, omega))
    )
    assert bar.sum() == pytest.approx(expected, abs=1e-12)


def test_recovery_empty_history():
    with pytest.raises(EmptyHistoryError):
        primal_recovery([], 1)


def test_recovery_sampling_mode_seeded():
    rng_a = np.random.default_rng(42)
    rng_b = np.random.default_rng(42)
    entries = [(np.array([1, 0, 1, 1]), 0.3), (np.array([1, 1, 0, 1]), 0.2)]
    _, a = primal_recovery(entries, 2, rng=rng_a, sample=True)
    _, b = primal_recovery(entries, 2, rng=rng_b, sample=True)
    np.testing.assert_array_equal(a, b)


def test_repair_noop_when_feasible():
    rng = np.random.default_rng(12)
    inst = random_tiny_instance(rng)
    state = _random_state(rng, inst)
    gamma = np.zeros(inst.n_candidates, dtype=np.int8)
    gamma[: inst.budget] = 1
    np.testing.assert_array_equal(
        repair_feasibility(inst, gamma, inst.budget, state), gamma
    )


def test_repair_clears_marginal_candidate():
    """Scores 10, 10, 0.1 with theta0=0.05 and budget 2: the candidate whose
    score barely clears theta0 is removed first."""
    # clusters far apart so each particle contributes only to its own
    # candidate's score, making the scores exactly the theta entries
    particles = [(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)]
    candidates = [(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)]
    inst = SelectionInstance.build(
        [(1.0 / 3.0, particles)], candidates, 1.0, 2
    )
    state = DualState(theta0=0.05, theta=np.array([10.0, 10.0, 0.1]))
    gamma, _ = inner_solution(inst, state)
    np.testing.assert_array_equal(gamma, [1, 1, 1])
    wd = inst.stacked_weighted_costs()
    scores = np.maximum(state.theta[:, None] - wd, 0.0).sum(axis=0)
    np.testing.assert_allclose(scores, [10.0, 10.0, 0.1])
    repaired = repair_feasibility(inst, gamma, 2, state)
    np.testing.assert_array_equal(repaired, [1, 1, 0])


def test_gap_zero_when_equal():
    assert duality_gap(1.5, 1.5) == 0.0


# ---------------------------------------------------------------------------
# the full loop
# ---------------------------------------------------------------------------

def test_perfect_cover_reaches_zero():
    rng = np.random.default_rng(13)
    pts = rng.normal(size=(6, 2))
    distinct = np.unique(pts, axis=0)
    inst = SelectionInstance.build(
        [(1.0 / len(pts), pts)], distinct, 1.0, len(distinct)
    )
    result = run_subgradient(inst, SolverConfig(max_iter=400))
    assert result.objective == pytest.approx(0.0, abs=1e-9)


def test_run_matches_oracle_mostly():
    rng = np.random.default_rng(14)
    hits = 0
    for _ in range(20):
        inst = random_tiny_instance(rng)
        _, optimum, _ = solve_exact(inst)
        result = run_subgradient(inst, SolverConfig(max_iter=600))
        assert result.best_dual <= optimum + 1e-9
        assert result.gap >= -1e-9
        if result.objective <= optimum * 1.05 + 1e-12:
            hits += 1
    assert hits >= 18


def test_history_shapes_and_best_dual():
    rng = np.random.default_rng(15)
    inst = random_tiny_instance(rng)
    result = run_subgradient(inst, SolverConfig(max_iter=50))
    n = result.iterations
    assert len(result.history_dual) == n
    assert len(result.history_sum_gamma) == n
    assert len(result.history_alpha) == n
    assert result.best_dual == pytest.approx(result.history_dual.max())
    # best-so-far trace is non-decreasing by construction
    best_so_far = np.maximum.accumulate(result.history_dual)
    assert np.all(np.diff(best_so_far) >= 0)
    np.testing.assert_allclose(
        result.history_alpha, 0.01 / np.sqrt(np.arange(1, n + 1))
    )


def test_run_is_deterministic_across_threads():
    rng = np.random.default_rng(16)
    inst = random_tiny_instance(rng, max_particles=8, max_k=12)
    results = [
        run_subgradient(inst, SolverConfig(max_iter=120, threads=t))
        for t in (1, 4)
    ]
    a, b = results
    np.testing.assert_array_equal(a.gamma, b.gamma)
    np.testing.assert_array_equal(a.history_dual, b.history_dual)
    assert a.objective == b.objective
    assert a.best_dual == b.best_dual


def test_stochastic_variant_runs():
    rng = np.random.default_rng(17)
    inst = random_tiny_instance(rng, max_k=10)
    result = run_subgradient(
        inst, SolverConfig(max_iter=300, batch=4, seed=3)
    )
    assert result.gap >= -1e-9
    assert np.isfinite(result.objective)


def test_stochastic_variant_deterministic_per_seed():
    rng = np.random.default_rng(18)
    inst = random_tiny_instance(rng, max_k=10)
    cfg = SolverConfig(max_iter=150, batch=4, seed=11)
    a = run_subgradient(inst, cfg)
    b = run_subgradient(inst, cfg)
    np.testing.assert_array_equal(a.gamma, b.gamma)
    np.testing.assert_array_equal(a.history_dual, b.history_dual)


def test_selection_respects_budget():
    rng = np.random.default_rng(19)
    for _ in range(10):
        inst = random_tiny_instance(rng)
        result = run_subgradient(inst, SolverConfig(max_iter=200))
        assert result.gamma.sum() <= inst.budget
        selected = set(np.flatnonzero(result.gamma))
        for group in result.beta_assignment:
            assert set(group) <= selected
