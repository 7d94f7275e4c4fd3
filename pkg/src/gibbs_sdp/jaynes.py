"""ORACLE by Gibbs distributions over the constraint index set.

The candidate dual vectors are ``y = kappa * N * q_k`` where ``q_k`` is a Gibbs
distribution over ``[m]`` with energies ``lambda_k e_i + mu_k b_i``. The grid
over ``(k, N)`` is scanned in lexicographic order (``k`` outer, ``N`` inner).

Sign convention: the oracle needs ``q`` to lean towards constraints with a
large ``e_i = tr(A_i rho)`` and a small ``b_i``, so by default
``lambda_k = +c k`` and ``mu_k = -c (gamma - k)``. ``lambda_sign=-1`` gives the
family with both coefficients negative.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import PreconditionError
from .linalg import gibbs_distribution


@dataclass(frozen=True)
class ConstraintGibbs:
    weights: np.ndarray
    lam: float
    mu: float
    e: np.ndarray
    b: np.ndarray

    @property
    def m(self):
        return self.weights.size

    def mean_e(self):
        return float(self.weights @ self.e)

    def mean_b(self):
        return float(self.weights @ self.b)

    def sample(self, size, rng):
        return rng.choice(self.m, size=size, p=self.weights)


def constraint_gibbs(e, b, lam, mu):
    """``q(i) = exp(lam e_i + mu b_i) / Z`` computed with a max shift."""
    e = np.asarray(e, dtype=float)
    b = np.asarray(b, dtype=float)
    return ConstraintGibbs(weights=gibbs_distribution(lam * e + mu * b),
                           lam=float(lam), mu=float(mu), e=e, b=b)


def jaynes_gamma(kappa, m, R):
    """``ceil(8 / kappa^2 * ln(m) * R^2)``, at least one."""
    return max(1, math.ceil(8.0 / kappa ** 2 * math.log(m) * R ** 2))


@dataclass(frozen=True)
class JaynesGrid:
    kappa: float
    R: float
    m: int
    alpha: float = None
    coefficient: float = None   # defaults to kappa / (4 R^2)
    lambda_sign: int = 1
    gamma_override: int = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.lambda_sign not in (1, -1):
            raise ValueError("lambda_sign must be +1 or -1")

    @property
    def gamma(self):
        if self.gamma_override is not None:
            return int(self.gamma_override)
        return jaynes_gamma(self.kappa, self.m, self.R)

    @property
    def n_max(self):
        if self.alpha is None:
            raise ValueError("grid has no alpha, so N_max is undefined")
        return max(1, math.ceil(self.alpha / self.kappa - 1e-12))

    @property
    def c(self):
        return self.coefficient if self.coefficient is not None else self.kappa / (4 * self.R ** 2)

    def parameters(self, k):
        if not 1 <= k <= self.gamma:
            raise ValueError(f"k = {k} outside 1..{self.gamma}")
        return self.lambda_sign * self.c * k, -self.c * (self.gamma - k)


def gibbs_k(e, b, k, grid):
    lam, mu = grid.parameters(k)
    return constraint_gibbs(e, b, lam, mu)


def perturb_distribution(q, nu):
    """Move ``nu / 2`` mass from the least to the most likely outcome.

    The result is within ``nu`` of ``q`` in l1 distance; ties resolve to the
    lowest index for the receiver and the next-lowest for the donor.
    """
    q = np.array(q, dtype=float)
    if nu <= 0 or q.size < 2:
        return q
    hi = int(np.argmax(q))
    rest = np.delete(np.arange(q.size), hi)
    lo = int(rest[np.argmin(q[rest])])
    move = min(nu / 2, q[lo])
    q[hi] += move
    q[lo] -= move
    return q


@dataclass
class GridAcceptance:
    """An accepted grid point: ``y = norm * q`` with ``norm = kappa * N``."""

    k: int
    N: int
    norm: float
    gibbs: ConstraintGibbs
    weights: np.ndarray
    visited: int

    @property
    def y(self):
        return self.norm * self.weights

    def sample(self, size, rng):
        return rng.choice(self.weights.size, size=size, p=self.weights)


def _split_expectations(e, m):
    e = np.asarray(e, dtype=float)
    if e.shape != (m + 1,):
        raise ValueError(f"expected {m + 1} expectations (A_1..A_m then C), got {e.shape}")
    return e[:m], float(e[m])


def _check_oracle_args(b, kappa, alpha):
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if np.any(np.asarray(b) < 1):
        raise PreconditionError("the Gibbs oracle assumes b_i >= 1")


def _make_grid(b, alpha, kappa, R, grid):
    m = len(b)
    if grid is None:
        R = float(np.max(np.abs(b))) if R is None else R
        grid = JaynesGrid(kappa=kappa, R=R, m=m, alpha=alpha)
    return grid


def grid_oracle(e, b, alpha, kappa, nu, M, seed, *, R=None, grid=None, sampler_noise=0.0):
    """Sampled ORACLE: the first ``(k, N)`` whose empirical tests pass, else ``None``.

    ``e`` holds estimates of ``tr(A_1 rho), ..., tr(A_m rho), tr(C rho)`` within
    ``nu``. Each grid point draws ``M`` fresh indices from the (optionally
    perturbed) ``q_k`` and accepts when the sample mean of ``e`` is at least
    ``e_{m+1} / (kappa N) - (kappa + nu)`` and the sample mean of ``b`` is at
    most ``alpha / (kappa N) + R (kappa + nu)``.
    """
    b = np.asarray(b, dtype=float)
    _check_oracle_args(b, kappa, alpha)
    if M < 1:
        raise ValueError(f"sample count M must be at least 1, got {M}")
    m = b.size
    ei, f = _split_expectations(e, m)
    grid = _make_grid(b, alpha, kappa, R, grid)
    R = grid.R
    rng = np.random.default_rng(seed)
    slack = kappa + nu
    Ns = np.arange(1, grid.n_max + 1)
    e_thresh = f / (kappa * Ns) - slack
    b_thresh = alpha / (kappa * Ns) + R * slack
    visited = 0
    for k in range(1, grid.gamma + 1):
        g = gibbs_k(ei, b, k, grid)
        q = perturb_distribution(g.weights, sampler_noise)
        counts = rng.multinomial(M, q, size=Ns.size)
        e_mean = counts @ ei / M
        b_mean = counts @ b / M
        ok = (e_mean >= e_thresh) & (b_mean <= b_thresh)
        if ok.any():
            idx = int(np.argmax(ok))
            visited += idx + 1
            return GridAcceptance(k=k, N=int(Ns[idx]), norm=kappa * int(Ns[idx]),
                                  gibbs=g, weights=q, visited=visited)
        visited += Ns.size
    return None


def exact_grid_oracle(e, b, alpha, kappa, nu=0.0, *, R=None, grid=None):
    """Deterministic twin of :func:`grid_oracle` using exact means under ``q_k``."""
    b = np.asarray(b, dtype=float)
    _check_oracle_args(b, kappa, alpha)
    m = b.size
    ei, f = _split_expectations(e, m)
    grid = _make_grid(b, alpha, kappa, R, grid)
    R = grid.R
    slack = kappa + nu
    Ns = np.arange(1, grid.n_max + 1)
    e_thresh = f / (kappa * Ns) - slack
    b_thresh = alpha / (kappa * Ns) + R * slack
    visited = 0
    for k in range(1, grid.gamma + 1):
        g = gibbs_k(ei, b, k, grid)
        ok = (g.mean_e() >= e_thresh) & (g.mean_b() <= b_thresh)
        if ok.any():
            idx = int(np.argmax(ok))
            visited += idx + 1
            return GridAcceptance(k=k, N=int(Ns[idx]), norm=kappa * int(Ns[idx]),
                                  gibbs=g, weights=g.weights, visited=visited)
        visited += Ns.size
    return None


def jaynes_discrepancy(pi, q, e, b):
    """One-sided dual norm of ``q - pi`` over ``{-diag(e), diag(b)}``.

    Small values mean ``q`` loses little of ``pi``'s ``e``-mass and adds little
    ``b``-mass, which is the direction the ORACLE relies on.
    """
    d = np.asarray(pi, dtype=float) - np.asarray(q, dtype=float)
    return max(float(d @ e), float(-(d @ b)))


def jaynes_witness(pi, e, b, kappa, R=None, *, lambda_sign=1):
    """First ``k`` in ``1..gamma`` whose Gibbs distribution is ``kappa``-close to ``pi``.

    Returns ``None`` when no ``k`` qualifies.
    """
    pi = np.asarray(pi, dtype=float)
    e = np.asarray(e, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(pi < -1e-12) or abs(pi.sum() - 1) > 1e-9:
        raise ValueError("pi must be a probability vector")
    spread = float(max(np.max(np.abs(e)), np.max(np.abs(b))))
    R = spread if R is None else R
    if spread > R + 1e-12:
        raise PreconditionError(f"max(|e|, |b|) = {spread:g} exceeds R = {R:g}")
    grid = JaynesGrid(kappa=kappa, R=R, m=pi.size, lambda_sign=lambda_sign)
    for k in range(1, grid.gamma + 1):
        if jaynes_discrepancy(pi, gibbs_k(e, b, k, grid).weights, e, b) <= kappa:
            return k
    return None


def closed_form_sample_count(R, n, m, eps, xi):
    """``ceil(80 ln^{1+xi}(8 R^2 n m / eps) / eps^2)``."""
    return math.ceil(80 * math.log(8 * R ** 2 * n * m / eps) ** (1 + xi) / eps ** 2)


def mmw_grid_oracle(b, alpha, kappa, *, R=None, nu=0.0):
    """Adapter: the exact grid oracle in the ``oracle(e, f)`` form used by ``mmw``."""
    b = np.asarray(b, dtype=float)
    grid = _make_grid(b, alpha, kappa, R, None)

    def oracle(e, f):
        hit = exact_grid_oracle(np.append(e, f), b, alpha, kappa, nu, grid=grid)
        return None if hit is None else hit.y

    return oracle


def grid_oracle_width(alpha, R, kappa, nu=0.0):
    """Width bound ``alpha (1 + 2R(kappa + nu)) + 1`` covering the oracle's slack."""
    return alpha * (1 + 2 * R * (kappa + nu)) + 1
