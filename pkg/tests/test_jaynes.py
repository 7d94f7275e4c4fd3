import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gibbs_sdp.exceptions import PreconditionError
from gibbs_sdp.jaynes import (JaynesGrid, constraint_gibbs, exact_grid_oracle, gibbs_k,
                              grid_oracle, grid_oracle_width, jaynes_discrepancy, jaynes_gamma,
                              jaynes_witness, mmw_grid_oracle, closed_form_sample_count,
                              perturb_distribution)


def test_uniform_when_coefficients_vanish():
    g = constraint_gibbs(np.arange(5.0), np.ones(5), 0.0, 0.0)
    np.testing.assert_allclose(g.weights, np.full(5, 0.2))


def test_two_point_distribution():
    g = constraint_gibbs([1.0, 0.0], [1.0, 1.0], 1.0, 0.0)
    np.testing.assert_allclose(g.weights, [np.e / (1 + np.e), 1 / (1 + np.e)])


@given(st.integers(0, 10**6), st.integers(1, 8))
def test_gibbs_matches_direct_formula(seed, m):
    rng = np.random.default_rng(seed)
    e, b = rng.uniform(-1, 1, m), rng.uniform(1, 2, m)
    lam, mu = rng.uniform(-2, 2, 2)
    w = np.exp(lam * e + mu * b)
    np.testing.assert_allclose(constraint_gibbs(e, b, lam, mu).weights, w / w.sum(), atol=1e-12)


def test_gamma_value():
    assert jaynes_gamma(0.25, 6, 1.0) == math.ceil(8 / 0.0625 * math.log(6))
    assert jaynes_gamma(0.5, 1, 1.0) == 1


def test_last_grid_index_parameters():
    grid = JaynesGrid(kappa=0.25, R=1.0, m=4, lambda_sign=-1)
    lam, mu = grid.parameters(grid.gamma)
    assert mu == 0
    assert lam == pytest.approx(-0.25 * grid.gamma / 4)
    lam, _ = JaynesGrid(kappa=0.25, R=1.0, m=4).parameters(grid.gamma)
    assert lam == pytest.approx(0.25 * grid.gamma / 4)
    with pytest.raises(ValueError):
        grid.parameters(0)


def test_constant_expectations_leave_only_b_dependence():
    grid = JaynesGrid(kappa=0.5, R=2.0, m=3)
    b = np.array([2.0, 1.0, 1.5])
    for k in (1, 3, grid.gamma):
        a = gibbs_k(np.full(3, 0.3), b, k, grid).weights
        c = gibbs_k(np.full(3, -0.9), b, k, grid).weights
        np.testing.assert_allclose(a, c, atol=1e-14)
        assert a.sum() == pytest.approx(1)


@given(st.integers(0, 10**6))
def test_log_ratio_slope_in_k(seed):
    rng = np.random.default_rng(seed)
    e, b = rng.uniform(-1, 1, 2), rng.uniform(1, 2, 2)
    kappa, R = 0.5, 2.0
    for sign in (1, -1):
        grid = JaynesGrid(kappa=kappa, R=R, m=2, lambda_sign=sign)
        c = kappa / (4 * R ** 2)
        logs = [np.log(gibbs_k(e, b, k, grid).weights) for k in (1, 2)]
        slope = (logs[1][0] - logs[1][1]) - (logs[0][0] - logs[0][1])
        assert slope == pytest.approx(c * (sign * (e[0] - e[1]) + (b[0] - b[1])), abs=1e-12)


def test_perturbation_moves_half_nu():
    np.testing.assert_allclose(perturb_distribution([0.5, 0.5], 0.1), [0.55, 0.45])
    q = np.array([0.1, 0.6, 0.3])
    p = perturb_distribution(q, 0.4)
    assert np.abs(p - q).sum() <= 0.4 + 1e-15 and p.sum() == pytest.approx(1)


def test_single_constraint_accepts_expected_window():
    # scan the two scalar inequalities directly
    kappa, alpha, f = 0.1, 1.0, 0.5
    expected = next(N for N in range(1, 11)
                    if 1 >= f / (kappa * N) - kappa and 1 <= alpha / (kappa * N) + kappa)
    hit = exact_grid_oracle([1.0, f], [1.0], alpha, kappa)
    assert hit.N == expected == 5 and 0.5 <= hit.norm <= 1.0
    sampled = grid_oracle([1.0, f], [1.0], alpha, kappa, 0.0, 10, seed=0)
    assert (sampled.k, sampled.N) == (1, 5)


def test_negative_objective_accepts_at_smallest_norm():
    hit = exact_grid_oracle([0.2, 0.1, -1.0], [1.0, 1.0], 1.0, 0.1)
    assert (hit.k, hit.N) == (1, 1) and hit.norm == pytest.approx(0.1)


def test_adversarial_expectations_fail():
    # every y in D_alpha gives sum y_i e_i <= alpha * 0.1, far below f = 1
    assert exact_grid_oracle([0.1, 0.05, 1.0], [1.0, 1.0], 1.0, 0.05) is None
    assert grid_oracle([0.1, 0.05, 1.0], [1.0, 1.0], 1.0, 0.05, 0.0, 50, seed=3) is None


def _hand_grid(e, f, b, alpha, kappa, R):
    """Enumerate every (k, N) with explicit loops and no shared helpers."""
    m = len(b)
    gamma = max(1, math.ceil(8 / kappa ** 2 * math.log(m) * R ** 2))
    n_max = math.ceil(alpha / kappa)
    c = kappa / (4 * R ** 2)
    for k in range(1, gamma + 1):
        lam, mu = c * k, -c * (gamma - k)
        w = [math.exp(lam * e[i] + mu * b[i]) for i in range(m)]
        z = sum(w)
        me = sum(w[i] * e[i] for i in range(m)) / z
        mb = sum(w[i] * b[i] for i in range(m)) / z
        for N in range(1, n_max + 1):
            if me >= f / (kappa * N) - kappa and mb <= alpha / (kappa * N) + R * kappa:
                return k, N
    return None


@given(st.integers(0, 10**6))
def test_two_constraint_grid_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    e = rng.uniform(-1, 1, 2)
    b = np.array([2.0, rng.uniform(1, 2)])
    f = float(rng.uniform(-1, 1))
    alpha, kappa = float(rng.uniform(1, 2)), 0.4
    hit = exact_grid_oracle(np.append(e, f), b, alpha, kappa, R=2.0)
    expected = _hand_grid(e, f, b, alpha, kappa, 2.0)
    assert (None if hit is None else (hit.k, hit.N)) == expected


def test_uniform_constant_case():
    kappa = 0.2
    for c in (0.3, 0.6):
        for f in (0.05, 0.2, 0.5):
            hit = exact_grid_oracle([c, c, c, f], [1.0, 1.0, 1.0], 1.0, kappa)
            Ns = [N for N in range(1, 6) if c >= f / (kappa * N) - kappa and 1 <= 1 / (kappa * N) + kappa]
            assert (hit is None) == (not Ns)
            if hit:
                assert hit.N == Ns[0]


def _random_case(rng, m):
    e = rng.uniform(-1, 1, m)
    b = rng.uniform(1, 2, m)
    b[0] = 2.0
    e[0] = 1.0  # A_1 = I
    f = float(rng.uniform(-1, 0.8))
    return e, b, f


def test_exact_acceptance_implies_sampled_acceptance():
    rng = np.random.default_rng(0)
    n = m = 4
    kappa, nu, alpha = 0.2, 0.1, 2.0
    checked = 0
    while checked < 5:
        e, b, f = _random_case(rng, m)
        if exact_grid_oracle(np.append(e, f), b, alpha, kappa) is None:
            continue
        checked += 1
        passes = sum(grid_oracle(np.append(e, f), b, alpha, kappa, nu, 200, seed) is not None
                     for seed in range(200))
        assert passes / 200 >= 1 - math.exp(-math.log(n * m))


def test_sampled_outputs_meet_oracle_inequalities():
    rng = np.random.default_rng(1)
    kappa, nu, alpha, R = 0.2, 0.05, 2.0, 2.0
    e, b, f = _random_case(rng, 5)
    good = total = 0
    for seed in range(200):
        hit = grid_oracle(np.append(e, f), b, alpha, kappa, nu, 300, seed, R=R)
        if hit is None:
            continue
        total += 1
        assert hit.norm <= alpha + kappa
        # recomputed against the exact expectations of the chosen q
        y = hit.norm * hit.weights
        good += (b @ y <= alpha * (1 + 2 * R * (kappa + nu))) and (y @ e >= f - 2 * alpha * (kappa + nu))
    assert total > 0 and good / total >= 0.95


def test_sampled_scan_is_deterministic():
    args = ([0.8, -0.2, 0.4, 0.3], [2.0, 1.0, 1.5], 1.5, 0.1, 0.05, 64)
    a, b = grid_oracle(*args, seed=7), grid_oracle(*args, seed=7)
    assert (a.k, a.N) == (b.k, b.N)
    np.testing.assert_array_equal(a.sample(20, np.random.default_rng(1)),
                                  b.sample(20, np.random.default_rng(1)))


def test_oracle_preconditions():
    with pytest.raises(PreconditionError):
        exact_grid_oracle([1.0, 0.0], [0.5], 1.0, 0.1)
    with pytest.raises(ValueError):
        exact_grid_oracle([1.0], [1.0], 1.0, 0.1)
    with pytest.raises(ValueError):
        grid_oracle([1.0, 0.0], [1.0], 1.0, 0.1, 0.0, 0, seed=0)


def test_witness_recovers_gibbs_form():
    rng = np.random.default_rng(4)
    e, b = rng.uniform(-1, 1, 4), rng.uniform(0, 1, 4)
    grid = JaynesGrid(kappa=0.25, R=1.0, m=4)
    pi = gibbs_k(e, b, 5, grid).weights
    k = jaynes_witness(pi, e, b, 0.25, R=1.0)
    assert k is not None and k <= 5
    assert jaynes_discrepancy(pi, gibbs_k(e, b, 5, grid).weights, e, b) == pytest.approx(0)


def test_witness_with_large_kappa_is_first_index():
    rng = np.random.default_rng(5)
    pi = rng.dirichlet(np.ones(3))
    assert jaynes_witness(pi, rng.uniform(-1, 1, 3), rng.uniform(0, 1, 3), 2.0, R=1.0) == 1


@given(st.integers(0, 10**6), st.integers(2, 6))
def test_witness_always_found(seed, m):
    rng = np.random.default_rng(seed)
    pi = rng.dirichlet(np.ones(m))
    e, b = rng.uniform(-1, 1, m), rng.uniform(-1, 1, m)
    assert jaynes_witness(pi, e, b, 0.25, R=1.0) is not None


def test_witness_input_checks():
    with pytest.raises(ValueError):
        jaynes_witness([0.5, 0.6], [0, 0], [1, 1], 0.25)
    with pytest.raises(PreconditionError):
        jaynes_witness([0.5, 0.5], [0, 3.0], [1, 1], 0.25, R=1.0)


def test_sample_count_and_width():
    assert closed_form_sample_count(1.0, 4, 4, 0.5, 1.0) == math.ceil(80 * math.log(8 * 16 / 0.5) ** 2 / 0.25)
    assert grid_oracle_width(1.0, 2.0, 0.1, 0.05) == pytest.approx(1.6 + 1)


def test_mmw_adapter_returns_vector_or_none():
    orc = mmw_grid_oracle(np.array([1.0, 1.0]), 1.0, 0.1)
    assert orc(np.array([0.1, 0.05]), 1.0) is None
    y = orc(np.array([1.0, 0.2]), 0.5)
    assert y.shape == (2,) and y.sum() <= 1.0 + 0.1
    assert y @ [1.0, 0.2] >= 0.5 - 2 * 0.1
