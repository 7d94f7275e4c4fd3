import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from gibbs_sdp.qsim.params import (QsimConfig, cost_Ct, hbar_sampler_cost, iceil,
                                   measurement_cost, payoff_sampler_cost, sampler_cost,
                                   theoretical_cost_report)

mpmath.mp.dps = 50

# (n, m, R, delta, xi, alpha)
POINTS = [
    (16, 16, 1.0, 0.1, 1.0, 1.0),
    (8, 4, 2.0, 0.2, 0.5, 1.5),
    (64, 32, 1.0, 0.05, 1.0, 0.8),
    (4, 128, 3.0, 0.3, 2.0, 2.5),
    (100, 7, 1.5, 0.01, 1.2, 1.0),
]


def _mp(x):
    return mpmath.mpf(x)


def _ceil(x):
    return int(mpmath.ceil(x))


def independent(n, m, R, delta, xi, alpha):
    """The closed forms in 50-digit arithmetic, written out separately."""
    n, m, R, delta, xi, alpha = map(_mp, (n, m, R, delta, xi, alpha))
    eps = delta / (28 * R ** 2)
    return {
        "eps": eps,
        "eps_prime": -mpmath.log(1 - eps),
        "T": _ceil(500 * R ** 3 * mpmath.log(n) / delta ** 2),
        "gamma": _ceil(8 * mpmath.log(m) * R ** 2 / eps ** 2),
        "M": _ceil(80 * mpmath.log(8 * R ** 2 * n * m / eps) ** (1 + xi) / eps ** 2),
        "L": _ceil(80 * mpmath.log(n * m) ** (1 + xi) / eps ** 2),
        "Q": _ceil(10 ** 6 * R ** 6 * mpmath.log(n * m) ** (2 + xi) / delta ** 4),
        "h_precision": delta / (56 * R ** 2),
    }


@pytest.mark.parametrize("point", POINTS)
def test_closed_forms_match_independent_evaluation(point):
    n, m, R, delta, xi, alpha = point
    cfg = QsimConfig(delta=delta, xi=xi, alpha=alpha, R=R, n=n, m=m, profile="paper")
    ref = independent(*point)
    assert cfg.eps == float(ref["eps"])
    assert cfg.eps_prime == pytest.approx(float(ref["eps_prime"]), rel=1e-15)
    assert cfg.T_full == cfg.T == ref["T"]
    assert cfg.gamma == ref["gamma"]
    assert cfg.M_full == cfg.M == ref["M"]
    assert cfg.L_full == cfg.L == ref["L"]
    assert cfg.Q_full == cfg.Q == ref["Q"]
    assert cfg.h_precision == float(ref["h_precision"])


@pytest.mark.parametrize("point", POINTS)
def test_round_cost_matches_independent_evaluation(point):
    n, m, R, delta, xi, alpha = point
    cfg = QsimConfig(delta=delta, xi=xi, alpha=alpha, R=R, n=n, m=m, profile="paper")
    ref = independent(*point)
    eps, gamma, a = ref["eps"], ref["gamma"], _mp(alpha)
    for g in (0, 1, 37):
        expected = ((10 * mpmath.log(m) / eps ** 2) * (gamma * a / eps * ref["M"] + ref["Q"]) * g
                    + (2 * gamma * a / eps) * ref["M"] * ref["L"])
        assert cost_Ct(cfg, g) == _ceil(expected)


def test_round_cost_without_sampler_cost():
    cfg = QsimConfig(delta=0.1, xi=1.0, alpha=1.0, R=1.0, n=16, m=16, profile="paper")
    eps = _mp(0.1) / 28
    assert cost_Ct(cfg, 0) == _ceil(2 * cfg.gamma / eps * cfg.M * cfg.L)


def test_round_cost_with_unit_inputs():
    cfg = QsimConfig(delta=28.0 * 0.5, xi=1.0, alpha=1.0, R=1.0, n=2, m=2, profile="practical",
                     M_override=1, L_override=1, Q_override=1, k_grid=1)
    # eps = 1/2, gamma_eff = 1
    assert cfg.eps == 0.5 and cfg.gamma_eff == 1
    assert cost_Ct(cfg, 1) == math.ceil(40 * math.log(2) * (2 + 1) + 4)


def test_practical_profile_scales_down():
    cfg = QsimConfig(delta=0.1, xi=1.0, alpha=1.0, R=1.0, n=16, m=16)
    assert (cfg.T, cfg.M, cfg.L, cfg.Q) == (200, 200, 50, 400)
    assert cfg.gamma_eff == 16 and cfg.k_values[0] == 1 and cfg.k_values[-1] == cfg.gamma
    assert QsimConfig(delta=0.1, xi=1.0, alpha=1.0, R=1.0, n=16, m=16, T_override=7).T == 7


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        QsimConfig(delta=0.1, xi=1.0, alpha=1.0, R=1.0, n=1, m=2)
    with pytest.raises(ValueError):
        QsimConfig(delta=0.1, xi=1.0, alpha=1.0, R=1.0, n=2, m=2, profile="fast")
    with pytest.raises(ValueError):
        QsimConfig(delta=0.0, xi=1.0, alpha=1.0, R=1.0, n=2, m=2)


def test_hbar_parameters():
    cfg = QsimConfig(delta=0.1, xi=1.0, alpha=1.0, R=1.0, n=4, m=4)
    c = cfg.eps / 8
    assert cfg.hbar_parameters(3) == pytest.approx((3 * c, -c * (cfg.gamma - 3)))
    neg = cfg.with_(lambda_sign=-1)
    assert neg.hbar_parameters(3)[0] == pytest.approx(-3 * c)


@given(st.floats(0.0, 1e6, allow_nan=False))
def test_iceil_never_below_ceil_minus_noise(x):
    r = iceil(x)
    assert r >= x - 1e-6 and r - x < 1


def test_iceil_absorbs_float_noise():
    assert iceil(3.0000000000000004) == 3
    assert iceil(2.5) == 3
    with pytest.raises(OverflowError):
        iceil(math.inf)


def test_measurement_cost_example():
    expected = 2 * 100 * math.ceil(math.log(16 * 2 / (1e-3 * 0.1)) ** 4)
    assert measurement_cost(2, 0.1, 16, 1e-3) == expected


def test_sampler_costs():
    assert sampler_cost(16, 2, 3.0, 0.5) == 48
    cfg = QsimConfig(delta=0.1, xi=1.0, alpha=1.0, R=1.0, n=16, m=9, s=2)
    assert hbar_sampler_cost(cfg) == iceil(3 * (1 / cfg.eps) / (cfg.eps / 4))
    assert payoff_sampler_cost(cfg) == iceil(
        4 * cfg.eps_prime * cfg.T * cfg.T * cfg.Q * 2 / (cfg.eps / 4)) * cfg.T * 2
    with pytest.raises(ValueError):
        sampler_cost(4, 1, 1.0, 0.0)


@pytest.mark.parametrize("n", [64, 128, 1024])
def test_bound_scaling_in_n_and_m(n):
    a = theoretical_cost_report(n, 16, 2, 1.0, 0.1)
    b = theoretical_cost_report(2 * n, 16, 2, 1.0, 0.1)
    assert 1.3 <= b.G_M_bound / a.G_M_bound <= 1.6
    c = theoretical_cost_report(16, n, 2, 1.0, 0.1)
    d = theoretical_cost_report(16, 2 * n, 2, 1.0, 0.1)
    assert 1.3 <= d.G_hbar_bound / c.G_hbar_bound <= 1.6


def test_cost_report_validates():
    with pytest.raises(ValueError):
        theoretical_cost_report(0, 1, 1, 1.0, 0.1)
