"""Classical stand-ins for the quantum subroutines, each with its cost."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import SparsificationError
from ..linalg import (DensityMatrix, SparseHermitian, _eigh, as_hermitian, gibbs_distribution,
                      max_eigenvalue, min_eigenvalue, operator_norm, trace_inner)
from .params import measurement_cost, sampler_cost

SPECTRAL_TOL = 1e-9


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def round_half_away(x, h):
    """Nearest multiple of ``h``; exact halves go away from zero."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) / h + 0.5) * h


@dataclass(frozen=True)
class HbarHamiltonian:
    raw: np.ndarray
    rounded: np.ndarray
    h_precision: float
    corrupted: np.ndarray

    @property
    def m(self):
        return self.raw.size

    def distribution(self):
        return gibbs_distribution(self.rounded)


def build_hbar(expectations, b, lam, mu, h_precision, p_e=0.0, *, rng=None, inject_faults=False):
    """Diagonal ``r_i = lam e_i + mu b_i`` rounded to multiples of ``h_precision``.

    With ``inject_faults`` each entry independently moves to an adjacent
    bucket with probability ``p_e``, modelling a wrong oracle answer.
    """
    e = np.asarray(expectations, dtype=float)
    raw = lam * e + mu * np.asarray(b, dtype=float)
    rounded = round_half_away(raw, h_precision)
    corrupted = np.zeros(raw.size, dtype=bool)
    if inject_faults and p_e > 0:
        rng = _rng(rng)
        corrupted = rng.random(raw.size) < p_e
        step = np.where(rng.random(raw.size) < 0.5, -h_precision, h_precision)
        rounded = np.where(corrupted, rounded + step, rounded)
    return HbarHamiltonian(raw=raw, rounded=rounded, h_precision=h_precision, corrupted=corrupted)


def perturb_probabilities(q, nu):
    """Move ``min(nu/2, q_min)`` mass from the least to the most likely outcome."""
    q = np.array(q, dtype=float)
    if nu <= 0 or q.size < 2:
        return q
    hi = int(np.argmax(q))
    order = np.argsort(q, kind="stable")
    lo = int(order[0]) if order[0] != hi else int(order[1])
    move = min(nu / 2, q[lo])
    q[hi] += move
    q[lo] -= move
    return q


def perturb_state(rho, nu):
    """Move ``nu/2`` weight from the smallest to the largest eigenvector.

    Returns ``(state, eigenvalues, eigenvectors)`` of the perturbed state, which
    is within ``nu`` of ``rho`` in trace distance.
    """
    w, v = _eigh(as_hermitian(rho))
    w = np.clip(w, 0.0, None)
    w = perturb_probabilities(w / w.sum(), nu)
    return (v * w) @ v.conj().T, w, v


@dataclass
class SampleRecord:
    samples: np.ndarray
    distribution: np.ndarray
    cost: int
    preparations: int


class GibbsSamplerSim:
    """Samples from a distribution within ``nu`` of the exact Gibbs one.

    The error is adversarial rather than random: mass moves between the two
    extreme outcomes. Each preparation is charged ``cost_model(dim, s, beta, nu)``.
    """

    def __init__(self, nu, *, p_e=0.0, cost_model=sampler_cost):
        if nu < 0:
            raise ValueError("sampler accuracy nu must be nonnegative")
        self.nu, self.p_e, self.cost_model = float(nu), float(p_e), cost_model

    def distribution(self, h):
        h = np.asarray(h, dtype=float)
        q = perturb_probabilities(gibbs_distribution(h), self.nu)
        assert np.abs(q - gibbs_distribution(h)).sum() <= self.nu + 1e-12
        return q

    def preparation_cost(self, dim, sparsity, beta):
        if self.nu == 0:
            return 0
        return self.cost_model(dim, sparsity, beta, self.nu)

    def sample(self, h, count, rng, *, sparsity=1, beta=1.0):
        q = self.distribution(h)
        samples = _rng(rng).choice(q.size, size=count, p=q)
        per = self.preparation_cost(q.size, sparsity, beta)
        return SampleRecord(samples=samples, distribution=q, cost=per * count, preparations=count)


def simulated_gibbs_sample(h, nu, count, seed, *, sparsity=1, beta=1.0, cost_model=sampler_cost):
    """``count`` draws from a ``nu``-perturbed Gibbs distribution of ``h``.

    A vector or diagonal matrix is a classical Hamiltonian over its indices;
    a general Hermitian matrix is sampled in its eigenbasis.
    """
    h = np.asarray(h)
    if h.ndim == 2:
        h = as_hermitian(h)
        if np.any(h - np.diag(np.diag(h))):
            w = np.linalg.eigvalsh(h)
        else:
            w = np.real(np.diag(h))
    else:
        w = h
    return GibbsSamplerSim(nu, cost_model=cost_model).sample(w, count, seed, sparsity=sparsity,
                                                             beta=beta)


def estimate_expectation(A, rho, accuracy, p_e, seed, *, n=None, s=None, inject_faults=False):
    """``tr(A rho) + u`` with ``|u| <= accuracy``, plus its query cost.

    With ``inject_faults`` the answer is replaced, with probability ``p_e``, by
    an arbitrary value in ``[-1, 1]``.
    """
    if accuracy <= 0:
        raise ValueError("accuracy must be positive")
    rng = _rng(seed)
    exact = trace_inner(A, rho)
    value = exact + rng.uniform(-accuracy, accuracy)
    if inject_faults and rng.random() < p_e:
        value = rng.uniform(-1.0, 1.0)
    rho_arr = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho)
    n = n if n is not None else rho_arr.shape[0]
    if s is None:
        s = A.s if isinstance(A, SparseHermitian) else int(max(1, np.max(np.count_nonzero(np.asarray(A), axis=1))))
    cost = measurement_cost(s, accuracy, n, p_e) if p_e > 0 else 0
    return float(value), cost


def exact_payoff(instance, y, alpha):
    """``(sum_i y_i A_i - C + 2 alpha I) / (4 alpha)``."""
    return (instance.slack(y) + 2 * alpha * np.eye(instance.n)) / (4 * alpha)


def sparsify_payoff(counts, norm, instance, alpha, *, exact=None, tolerance=None, mode="raise"):
    """Payoff from ``Q`` sampled constraint indices, given as per-index counts.

    ``M = (norm / Q * sum_j A_{i_j} - C + 2 alpha I) / (4 alpha)``. The spectrum
    must stay within ``[-tolerance, 1 + tolerance]``. When ``exact`` (the
    un-sampled payoff) is given, a deviation above ``tolerance`` raises in
    ``mode="raise"``; in ``"record"`` mode it is only reported.

    Returns ``(M, deviation)``; ``deviation`` is ``None`` without ``exact``.
    """
    counts = np.asarray(counts)
    Q = int(counts.sum())
    if Q < 1:
        raise ValueError("need at least one sample")
    weights = norm * counts / Q
    M = exact_payoff(instance, weights, alpha)
    tol = 0.0 if tolerance is None else tolerance
    lo, hi = min_eigenvalue(M), max_eigenvalue(M)
    if lo < -tol - SPECTRAL_TOL or hi > 1 + tol + SPECTRAL_TOL:
        raise SparsificationError(f"sampled payoff spectrum [{lo:.4g}, {hi:.4g}] leaves [0, 1] "
                                  f"by more than {tol:.3g}")
    deviation = None
    if exact is not None:
        deviation = operator_norm(M - exact)
        if mode == "raise" and tolerance is not None and deviation > tolerance + SPECTRAL_TOL:
            raise SparsificationError(f"sampled payoff deviates by {deviation:.4g} "
                                      f"> {tolerance:.4g} from its expectation")
    return M, deviation
