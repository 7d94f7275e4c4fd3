"""Parameters of the sampling-based SDP loop and its closed-form cost model.

All logarithms are natural. Counts that the loop must realize as integers
(``T``, ``gamma``, ``M``, ``L``, ``Q``, ``C_t``) are rounded up.
"""

import math
from decimal import ROUND_CEILING, Decimal, localcontext
from dataclasses import dataclass, field, replace

import numpy as np

PROFILES = ("paper", "practical")
SELECTIONS = ("first", "last")


def iceil(x):
    """``ceil`` that does not jump a whole unit on float noise just above an integer."""
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise OverflowError(f"cannot round {x!r} to an integer")
        return int(x.to_integral_value(rounding=ROUND_CEILING))
    if not math.isfinite(x):
        raise OverflowError(f"cannot round {x!r} to an integer")
    r = round(x)
    if abs(x - r) <= 1e-12 * max(1.0, abs(x)):
        return int(r)
    return int(math.ceil(x))


# The closed forms below run in 60-digit decimal arithmetic on the exact binary
# value of each input, so integer counts far beyond 2^53 are still exact.
PRECISION = 60


def _exact(fn):
    def wrapped(*args):
        with localcontext() as ctx:
            ctx.prec = PRECISION
            return fn(*[a if isinstance(a, Decimal) else Decimal(a) for a in args])
    wrapped.__name__, wrapped.__doc__ = fn.__name__, fn.__doc__
    return wrapped


@_exact
def eps_exact(delta, R):
    return delta / (28 * R ** 2)


def eps_of(delta, R):
    return float(eps_exact(delta, R))


def eps_prime_of(eps):
    return -math.log1p(-float(eps))


@_exact
def rounds_of(R, n, delta):
    return iceil(500 * R ** 3 * n.ln() / delta ** 2)


@_exact
def gamma_of(eps, m, R):
    return max(1, iceil(8 / eps ** 2 * m.ln() * R ** 2))


@_exact
def sample_count_of(R, n, m, eps, xi):
    """``M = 80 ln^{1+xi}(8 R^2 n m / eps) / eps^2``."""
    return iceil(80 * (8 * R ** 2 * n * m / eps).ln() ** (1 + xi) / eps ** 2)


@_exact
def copies_of(n, m, eps, xi):
    """``L = 80 ln^{1+xi}(n m) / eps^2``."""
    return iceil(80 * (n * m).ln() ** (1 + xi) / eps ** 2)


@_exact
def sparsifier_count_of(R, n, m, delta, xi):
    """``Q = 10^6 R^6 ln^{2+xi}(n m) / delta^4``."""
    return iceil(10 ** 6 * R ** 6 * (n * m).ln() ** (2 + xi) / delta ** 4)


@_exact
def _h_precision(delta, R):
    return delta / (56 * R ** 2)


def h_precision_of(delta, R):
    return float(_h_precision(delta, R))


def failure_probability_of(n, m, xi):
    return math.exp(-math.log(n * m) ** xi)


@dataclass(frozen=True)
class QsimConfig:
    """Derived constants for one ``(instance size, alpha, delta, xi)``.

    The ``*_full`` properties always follow the closed forms. ``T``, ``M``,
    ``L``, ``Q`` and ``k_values`` are what the loop actually uses: equal to the
    closed forms in the full-scale ``"paper"`` profile, scaled down in ``"practical"``.
    """

    delta: float
    xi: float
    alpha: float
    R: float
    n: int
    m: int
    s: int = 1
    profile: str = "practical"
    T_override: int = None
    M_override: int = None
    L_override: int = None
    Q_override: int = None
    k_grid: int = 16            # practical profile: number of k values kept
    selection: str = "first"
    lambda_sign: int = 1
    hbar_scale: float = 1.0     # multiplies the eps / (8 R^2) exponent coefficient
    early_stop: bool = None
    adaptive_shift: bool = None
    deviation_check: str = None  # "raise", "record" or "off"
    inject_faults: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}, got {self.selection!r}")
        for name in ("delta", "xi", "alpha", "R"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n < 2 or self.m < 1:
            raise ValueError(f"need n >= 2 and m >= 1, got n = {self.n}, m = {self.m}")
        if self.lambda_sign not in (1, -1):
            raise ValueError("lambda_sign must be +1 or -1")
        if self.deviation_check not in (None, "raise", "record", "off"):
            raise ValueError(f"unknown deviation_check {self.deviation_check!r}")

    @classmethod
    def for_instance(cls, instance, alpha, delta, xi=1.0, profile="practical", **kw):
        return cls(delta=delta, xi=xi, alpha=alpha, R=instance.R, n=instance.n,
                   m=instance.m, s=instance.s, profile=profile, **kw)

    def with_(self, **kw):
        return replace(self, **kw)

    @property
    def full_scale(self):
        return self.profile == "paper"

    # closed forms
    @property
    def eps_exact(self):
        return eps_exact(self.delta, self.R)

    @property
    def eps(self):
        return float(self.eps_exact)

    @property
    def eps_prime(self):
        return eps_prime_of(self.eps)

    @property
    def T_full(self):
        return rounds_of(self.R, self.n, self.delta)

    @property
    def gamma(self):
        return gamma_of(self.eps_exact, self.m, self.R)

    @property
    def M_full(self):
        return sample_count_of(self.R, self.n, self.m, self.eps_exact, self.xi)

    @property
    def L_full(self):
        return copies_of(self.n, self.m, self.eps_exact, self.xi)

    @property
    def Q_full(self):
        return sparsifier_count_of(self.R, self.n, self.m, self.delta, self.xi)

    @property
    def h_precision(self):
        return h_precision_of(self.delta, self.R)

    @property
    def p_e(self):
        return failure_probability_of(self.n, self.m, self.xi)

    @property
    def n_max(self):
        return max(1, iceil(self.alpha / self.eps))

    @property
    def hbar_coefficient(self):
        return self.hbar_scale * self.eps / (8 * self.R ** 2)

    @property
    def sampler_noise(self):
        return self.eps / 4

    # values used by the loop
    def _pick(self, override, full, practical):
        if override is not None:
            return int(override)
        return full if self.full_scale else practical

    @property
    def T(self):
        return self._pick(self.T_override, self.T_full, min(self.T_full, 200))

    @property
    def M(self):
        return self._pick(self.M_override, self.M_full, 200)

    @property
    def L(self):
        return self._pick(self.L_override, self.L_full, 50)

    @property
    def Q(self):
        return self._pick(self.Q_override, self.Q_full, 400)

    @property
    def k_values(self):
        g = self.gamma
        if self.full_scale or self.k_grid is None or self.k_grid >= g:
            return np.arange(1, g + 1)
        return np.unique(np.rint(np.linspace(1, g, self.k_grid)).astype(np.int64))

    @property
    def gamma_eff(self):
        g = self.gamma
        if self.full_scale or self.k_grid is None or self.k_grid >= g:
            return g
        return int(self.k_values.size)

    @property
    def stop_early(self):
        return (not self.full_scale) if self.early_stop is None else bool(self.early_stop)

    @property
    def shift_adaptively(self):
        return (not self.full_scale) if self.adaptive_shift is None else bool(self.adaptive_shift)

    @property
    def deviation_mode(self):
        if self.deviation_check is not None:
            return self.deviation_check
        return "raise" if self.full_scale else "record"

    def hbar_parameters(self, k):
        c = self.hbar_coefficient
        return self.lambda_sign * c * k, -c * (self.gamma - k)

    def summary(self):
        return {"profile": self.profile, "delta": self.delta, "xi": self.xi, "alpha": self.alpha,
                "R": self.R, "n": self.n, "m": self.m, "s": self.s, "eps": self.eps,
                "eps_prime": self.eps_prime, "T": self.T, "T_full": self.T_full,
                "gamma": self.gamma, "gamma_eff": self.gamma_eff, "M": self.M, "L": self.L,
                "Q": self.Q, "h_precision": self.h_precision, "p_e": self.p_e,
                "selection": self.selection, "lambda_sign": self.lambda_sign}


# --- cost model -------------------------------------------------------------

def sampler_cost(dim, sparsity, beta, nu):
    """Oracle calls of one Gibbs-state preparation, ``ceil(sqrt(dim) beta s' / nu)``."""
    if nu <= 0:
        raise ValueError("sampler accuracy nu must be positive")
    return iceil(math.sqrt(dim) * beta * sparsity / nu)


def measurement_cost(s, accuracy, n, p_e):
    """Query units to estimate ``tr(A rho)``: ``s * ceil(ln^4(n s / (p_e acc))) / acc^2``."""
    polylog = iceil(math.log(n * s / (p_e * accuracy)) ** 4)
    return iceil(s * polylog / accuracy ** 2)


def hbar_sampler_cost(cfg, cost_model=sampler_cost):
    """``G_hbar``: diagonal Hamiltonian over ``m`` outcomes, ``beta = 1/eps``, sparsity one."""
    return cost_model(cfg.m, 1, 1 / cfg.eps, cfg.sampler_noise)


def payoff_sampler_cost(cfg, cost_model=sampler_cost):
    """``G_M``: ``beta = eps' T`` and sparsity ``T Q s``, with ``T s`` calls per entry."""
    sparsity = cfg.T * cfg.Q * cfg.s
    return cost_model(cfg.n, sparsity, cfg.eps_prime * cfg.T, cfg.sampler_noise) * cfg.T * cfg.s


def cost_Ct(cfg, G_hbar_t):
    """Copies of the state consumed in one round,
    ``(10 ln m / eps^2)(gamma alpha / eps M + Q) G_hbar + (2 gamma alpha / eps) M L``.

    ``gamma`` is the number of ``k`` values actually scanned.
    """
    return _round_cost(cfg.eps_exact, cfg.gamma_eff, cfg.alpha, cfg.m, cfg.M, cfg.Q, cfg.L,
                       G_hbar_t)


@_exact
def _round_cost(eps, gamma, alpha, m, M, Q, L, G_hbar_t):
    first = (10 * m.ln() / eps ** 2) * (gamma * alpha / eps * M + Q) * G_hbar_t
    second = (2 * gamma * alpha / eps) * M * L
    return iceil(first + second)


@dataclass(frozen=True)
class CostReport:
    G_hbar_bound: float
    G_M_bound: float
    total_bound: float
    headline_bound: float
    ledger_ratio: float = None


def theoretical_cost_report(n, m, s, R, delta, *, T_meas=None, ledger=None):
    """Closed-form bounds with polylog factors dropped.

    ``G_hbar ~ sqrt(m) R^2 / delta``, ``G_M ~ sqrt(n) s^2 R^9 / delta^6``, the
    total ``R^21 / delta^11 G_hbar G_M + R^13 / delta^5 T_meas`` and the
    headline ``sqrt(n m) s^2 R^32 / delta^18``. With a ledger the ratio of its
    total to the headline bound is included.
    """
    for name, v in (("n", n), ("m", m), ("s", s), ("R", R), ("delta", delta)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    g_h = math.sqrt(m) * R ** 2 / delta
    g_m = math.sqrt(n) * s ** 2 * R ** 9 / delta ** 6
    tm = T_meas if T_meas is not None else s / delta ** 2
    total = R ** 21 / delta ** 11 * g_h * g_m + R ** 13 / delta ** 5 * tm
    headline = math.sqrt(n * m) * s ** 2 * R ** 32 / delta ** 18
    ratio = None
    if ledger is not None:
        ratio = ledger.total / headline
    return CostReport(G_hbar_bound=g_h, G_M_bound=g_m, total_bound=total,
                      headline_bound=headline, ledger_ratio=ratio)
