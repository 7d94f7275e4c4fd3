"""Estimator-style front ends: configure in ``__init__``, run in ``fit``, read ``*_`` attributes."""

import numbers

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_scalar

from .model import SdpInstance, check_instance
from .qsim import run_quantum_sim
from .solve import optimize


def _instance(X):
    if not isinstance(X, SdpInstance):
        raise TypeError(f"fit expects an SdpInstance, got {type(X).__name__}")
    return check_instance(X)


class MmwSdpSolver(BaseEstimator):
    """Classical MMW optimizer.

    ``fit`` sets ``opt_estimate_``, ``lower_bound_``, ``upper_bound_``,
    ``dual_`` and ``n_calls_``.
    """

    def __init__(self, delta=0.1, r=None, oracle="lp", polish=True):
        self.delta = delta
        self.r = r
        self.oracle = oracle
        self.polish = polish

    def fit(self, X, y=None):
        inst = _instance(X)
        check_scalar(self.delta, "delta", numbers.Real, min_val=0, include_boundaries="neither")
        if self.oracle not in ("lp", "grid"):
            raise ValueError(f"oracle must be 'lp' or 'grid', got {self.oracle!r}")
        res = optimize(inst, self.delta, r=self.r, oracle=self.oracle, polish=self.polish)
        self.result_ = res
        self.opt_estimate_ = res.opt_estimate
        self.lower_bound_ = res.lower_bound
        self.upper_bound_ = res.upper_bound
        self.dual_ = res.dual
        self.n_calls_ = res.calls
        return self

    def score(self, X, y=None):
        """Negative certified gap ``lower - upper``; closer to zero is better."""
        check_is_fitted(self, "opt_estimate_")
        return self.lower_bound_ - self.upper_bound_


class QsimSdpSolver(BaseEstimator):
    """One simulated sampling run at a fixed guess ``alpha``.

    ``fit`` sets ``status_`` (``"dual"``, ``"larger"`` or ``"failed"``),
    ``dual_``, ``primal_bound_``, ``ledger_`` and ``rounds_``.
    """

    def __init__(self, alpha=1.0, delta=0.1, xi=1.0, profile="practical", random_state=0):
        self.alpha = alpha
        self.delta = delta
        self.xi = xi
        self.profile = profile
        self.random_state = random_state

    def fit(self, X, y=None):
        inst = _instance(X)
        for name in ("alpha", "delta", "xi"):
            check_scalar(getattr(self, name), name, numbers.Real, min_val=0,
                         include_boundaries="neither")
        res = run_quantum_sim(inst, self.alpha, self.delta, self.xi, self.profile,
                              seed=self.random_state)
        self.result_ = res
        self.status_ = res.status
        self.dual_ = res.dual
        self.primal_bound_ = res.primal_bound
        self.ledger_ = res.ledger
        self.rounds_ = res.rounds
        return self

    def sample(self, size, seed=None):
        """Constraint indices drawn from the normalized dual."""
        check_is_fitted(self, "status_")
        return self.result_.sample(size, seed)
