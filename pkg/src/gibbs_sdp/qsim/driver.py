"""The sampling-based feasibility loop, simulated classically.

Each round searches the ``(k, N)`` grid with noisy sample means of Gibbs
distributions over constraints, sparsifies the payoff from ``Q`` samples and
advances the state through a noisy Gibbs sampler. The exact state is known to
the simulation, which uses it only to produce the noisy estimates, to certify
Larger verdicts and, when instrumented, to measure drift.
"""

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import PreconditionError, SparsificationError
from ..linalg import gibbs_state, min_eigenvalue, trace_distance
from ..mmw import primal_value_from_state
from ..model import DualVector, verify_dual
from .ledger import CostLedger, RoundRecord
from .params import (QsimConfig, cost_Ct, hbar_sampler_cost, measurement_cost,
                     payoff_sampler_cost)
from .primitives import build_hbar, exact_payoff, perturb_probabilities, perturb_state, sparsify_payoff

GRID_WORK_LIMIT = 2 * 10 ** 8


@dataclass
class QsimResult:
    """Outcome of one run: ``"dual"``, ``"larger"`` or ``"failed"`` (never silent)."""

    status: str
    config: QsimConfig
    ledger: CostLedger
    rounds: int
    dual: DualVector = None
    certificate: object = None
    primal_bound: float = None
    reason: str = ""
    drift: list = field(default_factory=list)
    deviations: list = field(default_factory=list)
    alpha: float = None

    @property
    def norm(self):
        return None if self.dual is None else self.dual.norm1

    @property
    def distribution(self):
        return None if self.dual is None else np.asarray(self.dual.y) / self.dual.norm1

    def sample(self, size, seed=None):
        """Indices drawn from ``ybar / ||ybar||_1``."""
        if self.dual is None:
            raise ValueError(f"run ended with status {self.status!r}: nothing to sample")
        rng = np.random.default_rng(seed)
        return rng.choice(self.dual.y.size, size=size, p=self.distribution)

    def to_dict(self):
        out = {"status": self.status, "rounds": self.rounds, "reason": self.reason,
               "config": self.config.summary(), "ledger": self.ledger.to_dict()}
        if self.dual is not None:
            out["dual"] = {"norm": self.norm, "objective": self.dual.objective,
                           "min_slack": self.dual.min_slack, "y": [float(v) for v in self.dual.y]}
        if self.primal_bound is not None:
            out["primal_bound"] = self.primal_bound
        return out


GRID_CHUNK = 128


def _grid_search(cfg, e, f, b, rng, hbar_rng):
    """Scan ``(k, N)`` for a point passing both acceptance tests.

    Every grid point gets independent sample means, so they are drawn lazily
    in chunks in scan order: ``k`` then ``N`` descending for ``"last"`` (the
    point an overwriting scan would end on), ascending for ``"first"``.
    Returns ``((k, N, q) or None, grid points charged)``.
    """
    eps, alpha, R, M = cfg.eps, cfg.alpha, cfg.R, cfg.M
    n_max, m = cfg.n_max, b.size
    last = cfg.selection == "last"
    ks = cfg.k_values[::-1] if last else cfg.k_values
    full = cfg.gamma_eff * n_max
    visited = 0
    for k in ks:
        lam, mu = cfg.hbar_parameters(int(k))
        hbar = build_hbar(e, b, lam, mu, cfg.h_precision, cfg.p_e, rng=hbar_rng,
                          inject_faults=cfg.inject_faults)
        q = perturb_probabilities(hbar.distribution(), cfg.sampler_noise)
        for start in range(0, n_max, GRID_CHUNK):
            stop = min(n_max, start + GRID_CHUNK)
            Ns = np.arange(n_max - start, n_max - stop, -1) if last else np.arange(start + 1, stop + 1)
            # M sampled indices per grid point, each with its own estimate of tr(A_i rho)
            idx = rng.choice(m, size=(Ns.size, M), p=q)
            est = e[idx] + rng.uniform(-eps / 2, eps / 2, size=idx.shape)
            f_est = f + rng.uniform(-eps / 2, eps / 2, size=Ns.size)
            if cfg.inject_faults:
                est = np.where(rng.random(idx.shape) < cfg.p_e,
                               rng.uniform(-1, 1, size=idx.shape), est)
            e_mean = est.mean(axis=1)
            b_mean = b[idx].mean(axis=1)
            ok = (e_mean >= f_est / (eps * Ns) - eps) & (b_mean <= alpha / (eps * Ns) + R * eps)
            hits = np.flatnonzero(ok)
            if hits.size:
                visited += Ns.size if last else int(hits[0]) + 1
                return (int(k), int(Ns[hits[0]]), q), (full if last else visited)
            visited += Ns.size
    return None, full


def _averaged_dual(inst, ybar, shift, adaptive):
    """``ybar + shift e_1``; adaptively the shift is the least one making it feasible."""
    ybar = ybar.copy()
    if adaptive:
        shift = max(0.0, -min_eigenvalue(inst.slack(ybar)))
    ybar[0] += shift
    return DualVector.from_y(inst, ybar)


def run_quantum_sim(instance, alpha, delta, xi=1.0, profile="practical", seed=0, *,
                    config=None, oracle_handle=None, instrument=False, **overrides):
    """One feasibility run at guess ``alpha``.

    Returns a :class:`QsimResult`: ``"dual"`` with a verified ``ybar``,
    ``"larger"`` with the certified primal value of the state on which no grid
    point passed, or ``"failed"`` with a reason.
    """
    inst = instance
    if np.any(inst.b < 1 - 1e-12):
        raise PreconditionError("the sampling loop needs b_i >= 1; apply a reduction first")
    if alpha < 1:
        # b / alpha keeps b >= 1 and moves the guess to 1; the dual is the same vector
        from ..reductions import rescale_for_alpha

        work = rescale_for_alpha(inst, alpha).transformed
        res = run_quantum_sim(work, 1.0, delta, xi, profile, seed, config=config,
                              oracle_handle=oracle_handle, instrument=instrument, **overrides)
        if res.dual is not None:
            res.dual = DualVector.from_y(inst, res.dual.y)
            res.certificate = verify_dual(inst, res.dual, alpha, delta)[1]
        if res.primal_bound is not None:
            res.primal_bound *= alpha
        res.alpha = alpha
        return res
    cfg = config or QsimConfig.for_instance(inst, alpha, delta, xi, profile, **overrides)
    work = cfg.gamma_eff * cfg.n_max * inst.m
    if work > GRID_WORK_LIMIT:
        raise ValueError(f"grid of {work:.3g} cells per round is beyond simulation; "
                         f"use the practical profile or a coarser k_grid")
    rng = np.random.default_rng(seed)
    hbar_rng = np.random.default_rng([seed, 1]) if cfg.inject_faults else None
    n = inst.n
    eps, T, Q = cfg.eps, cfg.T, cfg.Q
    b = np.asarray(inst.b, dtype=float)
    shift = delta * alpha / (2 * inst.R)
    tol = 1.0 / (4 * T)

    ledger = CostLedger()
    ledger.T_meas = measurement_cost(inst.s, eps / 2, n, cfg.p_e)
    G_h = hbar_sampler_cost(cfg)
    G_M = payoff_sampler_cost(cfg)
    C_t = cost_Ct(cfg, G_h)

    rho = np.eye(n) / n
    payoff_sum = 0
    exact_sum = 0
    ysum = np.zeros(inst.m)
    drift, deviations = [], []

    def result(status, t, **kw):
        if oracle_handle is not None:
            oracle_handle.charge(ledger.total)
        return QsimResult(status=status, config=cfg, ledger=ledger, rounds=t, drift=drift,
                          deviations=deviations, alpha=alpha, **kw)

    for t in range(1, T + 1):
        e, f = inst.expectations(rho)
        pick, visited = _grid_search(cfg, e, f, b, rng, hbar_rng)
        meas = visited * (cfg.M + 1) * ledger.T_meas
        if pick is None:
            ledger.record(RoundRecord(t=t, k_t=0, N_t=0, C_t=C_t, G_hbar_t=G_h, G_M_t=G_M,
                                      measurement_cost_t=meas, grid_points=visited))
            return result("larger", t, primal_bound=primal_value_from_state(e, f, b),
                          reason="no grid point passed")
        k_t, N_t, q = pick
        norm = eps * N_t
        y = norm * q
        counts = rng.multinomial(Q, q)
        mode = cfg.deviation_mode
        exact = exact_payoff(inst, y, alpha) if (mode != "off" or instrument) else None
        try:
            M_t, dev = sparsify_payoff(counts, norm, inst, alpha, exact=exact, tolerance=tol,
                                       mode=mode)
        except SparsificationError as exc:
            ledger.record(RoundRecord(t=t, k_t=k_t, N_t=N_t, C_t=C_t, G_hbar_t=G_h, G_M_t=G_M,
                                      measurement_cost_t=meas, grid_points=visited))
            return result("failed", t, reason=f"sparsification: {exc}")
        if dev is not None:
            deviations.append(dev)
            if dev > tol:
                ledger.hoeffding_events += 1
        ledger.record(RoundRecord(t=t, k_t=k_t, N_t=N_t, C_t=C_t, G_hbar_t=G_h, G_M_t=G_M,
                                  measurement_cost_t=meas, grid_points=visited, deviation=dev))
        ledger.sampler_preparations += 1
        payoff_sum += M_t
        ysum += y

        if cfg.stop_early or t == T:
            dual = _averaged_dual(inst, ysum / t, shift, cfg.shift_adaptively)
            ok, cert = verify_dual(inst, dual, alpha, delta)
            if ok:
                return result("dual", t, dual=dual, certificate=cert)
            if t == T:
                return result("failed", t, dual=dual, certificate=cert,
                              reason="averaged dual did not verify after the last round")

        exact_state = gibbs_state(-cfg.eps_prime * payoff_sum)
        rho, _, _ = perturb_state(exact_state.matrix, cfg.sampler_noise)
        if instrument:
            exact_sum += exact
            ideal = gibbs_state(-cfg.eps_prime * exact_sum)
            drift.append(trace_distance(rho, ideal))
    raise AssertionError("unreachable")


def qsim_feasibility(instance, delta, *, xi=1.0, profile="practical", seed=0, **overrides):
    """``solver(alpha) -> FeasibilityOutcome`` for binary search; seeds advance per call."""
    from ..reductions import FeasibilityOutcome

    calls = [0]

    def solver(alpha):
        calls[0] += 1
        res = run_quantum_sim(instance, alpha, delta, xi, profile, seed=(seed, calls[0]),
                              **overrides)
        if res.status == "dual":
            return FeasibilityOutcome("dual", alpha, delta, dual=res.dual, detail=res)
        if res.status == "larger":
            return FeasibilityOutcome("larger", alpha, delta, primal_bound=res.primal_bound,
                                      detail=res)
        return FeasibilityOutcome("failed", alpha, delta, detail=res)

    return solver
