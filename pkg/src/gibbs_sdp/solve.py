"""Glue: feasibility solvers for binary search and a one-call optimizer."""

from dataclasses import dataclass

import numpy as np

from .exceptions import PreconditionError
from .jaynes import grid_oracle_width, mmw_grid_oracle
from .linalg import max_eigenvalue
from .mmw import MmwConfig, lp_oracle, run_arora_kale
from .model import DualVector
from .reductions import (FeasibilityOutcome, binary_search_opt, extend_to_positive_b,
                         identity_record, map_back, scale_b)


def polish_dual(instance, dual):
    """Lower ``y_1`` (the identity coefficient) as far as feasibility allows.

    Uses ``A_1 = I``: shifting ``y_1`` by ``t`` shifts every eigenvalue of the
    slack by ``t``. Never returns a worse objective than the input.
    """
    y = np.array(dual.y, dtype=float)
    cut = min(dual.min_slack, y[0])
    if cut <= 0:
        return dual
    y[0] -= cut
    polished = DualVector.from_y(instance, y)
    if polished.min_slack < 0 or polished.objective > dual.objective:
        return dual
    return polished


def classical_feasibility(instance, delta, *, oracle="lp", scale="min", kappa=None,
                          T_cap=None, polish=True, early_stop=True, adaptive_shift=True,
                          oracle_handle=None):
    """``solver(alpha) -> FeasibilityOutcome`` backed by the MMW loop.

    ``oracle="lp"`` is the exact single-coordinate ORACLE; ``oracle="grid"``
    is the exact-expectation Gibbs grid with accuracy ``kappa``.
    """
    if np.any(instance.b < 1 - 1e-12):
        raise PreconditionError("the MMW feasibility solver needs b_i >= 1; reduce first")

    def solver(alpha):
        omega = shift = None
        if oracle == "lp":
            orc = lp_oracle(instance.b, alpha, scale=scale)
        elif oracle == "grid":
            # the grid's b-slack costs up to 2 R kappa alpha, so halve the e_1 shift
            k = kappa if kappa is not None else delta / (8 * instance.R)
            orc = mmw_grid_oracle(instance.b, alpha, k, R=instance.R)
            omega = grid_oracle_width(alpha, instance.R, k)
            shift = delta * alpha / (2 * instance.R)
        else:
            raise ValueError(f"unknown oracle {oracle!r}")
        cfg = MmwConfig.for_instance(instance, alpha, delta, T_cap=T_cap, omega=omega)
        res = run_arora_kale(instance, cfg, orc, shift=shift, early_stop=early_stop,
                             adaptive_shift=adaptive_shift,
                             oracle_handle=oracle_handle)
        if res.status == "dual":
            dual = polish_dual(instance, res.dual) if polish else res.dual
            return FeasibilityOutcome("dual", alpha, delta, dual=dual, detail=res)
        if res.status == "witness":
            return FeasibilityOutcome("larger", alpha, delta, primal_bound=res.primal_bound,
                                      detail=res)
        return FeasibilityOutcome("failed", alpha, delta, dual=res.dual, detail=res)

    return solver


def reduce_to_positive_b(instance, r=None):
    """Record turning ``instance`` into one with every ``b_i >= 1``.

    Positive ``b`` is rescaled by ``1 / min b``; otherwise the embedding into
    one extra dimension needs the dual size bound ``r`` (argument or ``instance.r``).
    """
    b = instance.b
    if np.all(b >= 1):
        return identity_record(instance)
    if np.all(b > 0):
        return scale_b(instance, 1.0 / float(np.min(b)))
    r = r if r is not None else instance.r
    if r is None:
        raise PreconditionError("instance has b_i <= 0; supply a dual size bound r")
    return extend_to_positive_b(instance, r)


@dataclass
class OptimizeResult:
    opt_estimate: float
    lower_bound: float
    upper_bound: float
    dual: DualVector
    record: object
    search: object

    @property
    def calls(self):
        return self.search.calls


def optimize(instance, delta, *, r=None, solver_factory=None, **solver_kw):
    """Estimate the optimum within additive ``delta`` and return a feasible dual.

    The search runs on the reduced instance with the accuracy mapped by the
    reduction; the dual and the bounds are mapped back.
    """
    record = reduce_to_positive_b(instance, r)
    work = record.transformed
    d = record.delta_map(delta)
    # With solver accuracy d/(4R) and a final bracket of width d/2 the best dual
    # is within (hi - lo) + d_s (hi + lo) <= d of the optimum.
    R = max(1.0, work.R)
    factory = solver_factory or classical_feasibility
    search = binary_search_opt(work, d / (2 * R), factory(work, d / (4 * R), **solver_kw),
                               gap_tol=d)
    dual = search.best_dual
    if dual is None:
        # A_1 = I makes lambda_max(C)^+ e_1 feasible; the bisection never reached opt
        y = np.zeros(work.m)
        y[0] = max(0.0, max_eigenvalue(work.C_dense))
        dual = DualVector.from_y(work, y)
    dual = map_back(record, dual) if record.keep is not None else DualVector.from_y(instance, dual.y)
    lower = record.objective_back(search.lower_bound)
    upper = min(record.objective_back(search.upper_bound), dual.objective)
    return OptimizeResult(opt_estimate=(lower + upper) / 2, lower_bound=lower,
                          upper_bound=upper, dual=dual, record=record, search=search)

