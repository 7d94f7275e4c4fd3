import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gibbs_sdp.exceptions import OracleError, PreconditionError, WidthError
from gibbs_sdp.generators import gen_diagonal_lp, gen_lower_bound, gen_random
from gibbs_sdp.mmw import (LpOracle, MmwConfig, MmwTrace, check_regret, lp_oracle, mmw_state,
                           payoff_matrix, primal_value_from_state, run_arora_kale, width_bound)
from gibbs_sdp.model import verify_dual
from gibbs_sdp.reductions import scale_b

from conftest import diagonal_instance, random_hermitian


def test_width_bound_examples():
    inst = gen_random(3, 2, 1, 0)
    assert width_bound(inst, 1.0) == 2
    assert width_bound(inst, inst.R) == inst.R + 1
    assert width_bound(inst, 0.5) == 1.5


def test_width_bound_needs_large_b():
    inst = gen_diagonal_lp(3, 3, 0, mixed_sign=True)
    with pytest.raises(PreconditionError):
        width_bound(inst, 1.0)


def test_payoff_examples():
    inst = diagonal_instance([0, 0], [[1, 1]], [1.0])
    np.testing.assert_allclose(payoff_matrix(inst, [0.0], 1.0), np.eye(2) / 2)
    np.testing.assert_allclose(payoff_matrix(inst, [1.0], 2.0), 0.75 * np.eye(2))


@given(st.integers(0, 10**6), st.floats(1.0, 3.0))
def test_payoff_spectrum_in_unit_interval(seed, alpha):
    inst = gen_random(5, 4, 3, seed)
    rng = np.random.default_rng(seed)
    # random y in D_alpha = {y >= 0, b.y <= alpha}
    y = rng.dirichlet(np.ones(4)) * rng.uniform(0, 1) * alpha / inst.b
    y *= min(1.0, alpha / float(inst.b @ y))
    w = np.linalg.eigvalsh(payoff_matrix(inst, y, alpha + 1))
    assert w[0] >= -1e-12 and w[-1] <= 1 + 1e-12


def test_payoff_detects_narrow_width():
    inst = diagonal_instance([0, 0], [[1, 1]], [1.0])
    with pytest.raises(WidthError):
        payoff_matrix(inst, [5.0], 1.0)


def test_mmw_state_examples():
    np.testing.assert_allclose(mmw_state(np.zeros((3, 3)), 0.3).matrix, np.eye(3) / 3)
    np.testing.assert_allclose(mmw_state(np.eye(3), 0.3).matrix, np.eye(3) / 3)
    np.testing.assert_allclose(mmw_state(np.diag([1.0, 0.0]), np.log(2)).matrix,
                               np.diag([1 / 3, 2 / 3]))


def test_config_parameters():
    cfg = MmwConfig(alpha=1.0, delta=0.1, R=1.0, n=8)
    assert cfg.eps == pytest.approx(0.05)
    assert cfg.eps_prime == pytest.approx(-math.log(0.95))
    assert cfg.T_theory == math.ceil(16 * math.log(8) / 0.01)
    assert MmwConfig(alpha=1.0, delta=0.1, R=1.0, n=8, T=10, T_cap=5).rounds == 5
    with pytest.raises(ValueError):
        MmwConfig(alpha=1.0, delta=0.1, R=0.2, n=2)


def _random_trace(rng, n, T, eps_prime):
    payoffs, states = [], []
    total = np.zeros((n, n))
    for _ in range(T):
        states.append(mmw_state(total, eps_prime).matrix)
        h = random_hermitian(rng, n)
        M = (h + np.eye(n)) / 2  # spectrum in [0, 1]
        payoffs.append(M)
        total = total + M
    return MmwTrace.from_sequence(payoffs, states)


def test_single_round_regret():
    n, eps = 4, 0.1
    trace = MmwTrace.from_sequence([np.eye(n) / 2], [np.eye(n) / n])
    assert check_regret(trace, eps, -math.log1p(-eps), n)


@given(st.integers(0, 10**6), st.integers(2, 8), st.integers(1, 50), st.floats(0.01, 0.5))
def test_regret_holds_on_random_traces(seed, n, T, eps):
    trace = _random_trace(np.random.default_rng(seed), n, T, -math.log1p(-eps))
    assert check_regret(trace, eps, -math.log1p(-eps), n)


def test_regret_checker_catches_wrong_states():
    n, T, eps = 4, 200, 0.1
    payoffs, states = [], []
    for _ in range(T):
        # put all payoff on e_1 and let the state sit on e_1 too
        M = np.zeros((n, n))
        M[0, 0] = 1.0
        payoffs.append(M)
        states.append(M.copy())
    trace = MmwTrace.from_sequence(payoffs, states)
    assert not check_regret(trace, eps, -math.log1p(-eps), n)


def test_regret_checker_validates_eps_prime():
    trace = MmwTrace.from_sequence([np.eye(2) / 2], [np.eye(2) / 2])
    with pytest.raises(ValueError):
        check_regret(trace, 0.1, 0.5, 2)


def test_recorded_trace_satisfies_regret():
    inst = gen_random(4, 3, 2, 7)
    cfg = MmwConfig.for_instance(inst, 1.0, 0.5, T_cap=40)
    res = run_arora_kale(inst, cfg, lp_oracle(inst.b, 1.0), early_stop=False, record_trace=True)
    assert len(res.trace) == res.iterations
    assert check_regret(res.trace, cfg.eps, cfg.eps_prime, inst.n)


def test_lp_oracle_picks_best_ratio():
    orc = LpOracle([1.0, 2.0], 1.0)
    np.testing.assert_allclose(orc(np.array([0.5, 2.0]), 0.5), [0.0, 0.5])
    assert orc(np.array([0.5, 0.5]), 0.9) is None
    np.testing.assert_allclose(LpOracle([1.0, 2.0], 1.0, scale="min")(np.array([0.5, 2.0]), 0.5),
                               [0.0, 0.25])
    with pytest.raises(PreconditionError):
        LpOracle([0.0, 1.0], 1.0)


def test_primal_value_from_state():
    assert primal_value_from_state([0.5, 0.25], 0.3, [1.0, 1.0]) == pytest.approx(0.6)
    assert primal_value_from_state([0.0], 0.3, [1.0]) == math.inf


def test_case_two_returns_witness():
    inst, _ = gen_lower_bound(2, 6, 4, 0)
    cfg = MmwConfig.for_instance(inst, 0.9, 0.05)
    res = run_arora_kale(inst, cfg, lp_oracle(inst.b, 0.9))
    assert res.status == "witness"
    assert res.primal_bound > (1 - 0.05) * 0.9


@pytest.mark.parametrize("compiled", [True, False])
def test_case_one_returns_dual(compiled):
    inst, _ = gen_lower_bound(1, 6, 4, 0, normalized=True)
    inst = scale_b(inst, 2.0).transformed  # b >= 1 makes optimum 1, guess 1.2
    cfg = MmwConfig.for_instance(inst, 1.2, 0.05)
    res = run_arora_kale(inst, cfg, lp_oracle(inst.b, 1.2, scale="min"), compiled=compiled,
                         adaptive_shift=True)
    assert res.status == "dual"
    ok, cert = verify_dual(inst, res.dual, 1.2, 0.05)
    assert ok and cert.objective <= 1.26


def test_zero_objective_gives_shift_dual():
    inst = diagonal_instance([0, 0, 0], [[1, 1, 1], [1, 0, 0]], [2.0, 1.0])
    cfg = MmwConfig.for_instance(inst, 1.0, 0.1)
    res = run_arora_kale(inst, cfg, lp_oracle(inst.b, 1.0), compiled=False)
    assert res.status == "dual" and res.iterations == 1
    np.testing.assert_allclose(res.dual.y, [0.1 / 2 + 0.5, 0.0])


@given(st.integers(0, 10**6))
def test_emitted_duals_always_verify(seed):
    inst = gen_random(4, 3, 2, seed)
    alpha = float(np.random.default_rng(seed).uniform(1.0, 2 * inst.R))
    cfg = MmwConfig.for_instance(inst, alpha, 0.2, T_cap=100)
    res = run_arora_kale(inst, cfg, lp_oracle(inst.b, alpha), adaptive_shift=True)
    if res.status == "dual":
        assert verify_dual(inst, res.dual, alpha, 0.2)[0]
        assert np.all(res.dual.y >= 0)


def test_compiled_and_python_loops_agree():
    inst = gen_diagonal_lp(8, 5, 3)
    cfg = MmwConfig.for_instance(inst, 1.5, 0.2)
    a = run_arora_kale(inst, cfg, lp_oracle(inst.b, 1.5))
    b = run_arora_kale(inst, cfg, lp_oracle(inst.b, 1.5), compiled=False)
    assert a.status == b.status and a.iterations == b.iterations
    if a.dual is not None:
        np.testing.assert_allclose(a.dual.y, b.dual.y, rtol=1e-9, atol=1e-12)


def test_oracle_exceptions_are_wrapped():
    inst = gen_random(3, 2, 1, 0)

    def broken(e, f):
        raise RuntimeError("boom")

    with pytest.raises(OracleError):
        run_arora_kale(inst, MmwConfig.for_instance(inst, 1.0, 0.1), broken)
