"""Matrix multiplicative weights (Arora-Kale) feasibility solver.

For a guess ``alpha`` the solver either returns a dual vector ``ybar`` with
``b.ybar <= (1 + delta) alpha`` and ``sum ybar_j A_j >= C``, or a density
matrix on which the ORACLE failed, which certifies that the optimum exceeds
``alpha`` up to the oracle's slack.

An ORACLE is any callable ``oracle(e, f) -> y | None`` receiving the
expectations ``e_j = tr(A_j rho)`` and ``f = tr(C rho)`` of the current
state. It returns ``y >= 0`` with ``b.y <= alpha`` and ``sum_j y_j e_j >= f``,
or ``None`` to signal failure.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exceptions import OracleError, PreconditionError, WidthError
from .linalg import DensityMatrix, gibbs_state, max_eigenvalue, min_eigenvalue
from .model import DualVector, verify_dual

SPECTRAL_TOL = 1e-9
REGRET_TOL = 1e-9


@dataclass(frozen=True)
class MmwConfig:
    alpha: float
    delta: float
    R: float
    n: int
    T: int = None
    T_cap: int = None
    omega: float = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 0 < self.eps < 0.5:
            raise ValueError(f"step eps = delta*alpha/(2R^2) = {self.eps:g} must lie in (0, 1/2)")
        if self.omega is not None and self.omega < 1:
            raise ValueError(f"width omega must be at least 1, got {self.omega}")

    @classmethod
    def for_instance(cls, instance, alpha, delta, **kw):
        return cls(alpha=alpha, delta=delta, R=instance.R, n=instance.n, **kw)

    @property
    def eps(self):
        return self.delta * self.alpha / (2 * self.R ** 2)

    @property
    def eps_prime(self):
        return -math.log1p(-self.eps)

    @property
    def T_theory(self):
        return max(1, math.ceil(16 * self.R ** 4 * math.log(self.n) / (self.alpha ** 2 * self.delta ** 2)))

    @property
    def rounds(self):
        t = self.T if self.T is not None else self.T_theory
        if self.T_cap is not None:
            t = min(t, self.T_cap)
        return max(1, int(t))


def width_bound(instance, alpha):
    """``alpha + 1``, valid when every ``b_i >= 1``."""
    if np.any(instance.b < 1 - 1e-12):
        raise PreconditionError("width bound alpha + 1 needs b_i >= 1 for every constraint")
    return alpha + 1.0


def payoff_matrix(instance, y, omega, *, check=True):
    """``(sum_j y_j A_j - C + omega I) / (2 omega)``, asserted to lie in ``[0, I]``."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("payoff needs y >= 0")
    m = (instance.slack(y) + omega * np.eye(instance.n)) / (2 * omega)
    if check:
        lo, hi = min_eigenvalue(m), max_eigenvalue(m)
        if lo < -SPECTRAL_TOL or hi > 1 + SPECTRAL_TOL:
            raise WidthError(f"payoff spectrum [{lo:.3g}, {hi:.3g}] leaves [0, 1]; "
                             f"omega = {omega:g} underestimates the width")
    return m


def mmw_state(payoff_sum, eps_prime):
    """``exp(-eps' * sum M) / tr(...)``."""
    return gibbs_state(-eps_prime * np.asarray(payoff_sum))


@dataclass
class MmwTrace:
    """Per-iteration history: gains ``tr(M rho)``, oracle outputs, payoffs."""

    gains: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    expectations: list = field(default_factory=list)
    payoffs: list = field(default_factory=list)
    states: list = field(default_factory=list)
    payoff_sum: np.ndarray = None

    def __len__(self):
        return len(self.gains)

    @classmethod
    def from_sequence(cls, payoffs, states):
        """Build a trace from explicit payoff matrices and the states they met."""
        payoffs = [np.asarray(p) for p in payoffs]
        states = [np.asarray(s) for s in states]
        gains = [float(np.real(np.sum(p * s.T))) for p, s in zip(payoffs, states)]
        return cls(gains=gains, payoffs=payoffs, states=states, payoff_sum=sum(payoffs))


def check_regret(trace, eps, eps_prime, n):
    """The MMW regret bound ``sum tr(M rho) <= (1+eps) lambda_min(sum M) + ln(n)/eps``.

    ``eps_prime`` is only used to confirm it matches ``-ln(1 - eps)``.
    """
    if eps_prime is not None and not math.isclose(eps_prime, -math.log1p(-eps), rel_tol=1e-12):
        raise ValueError("eps_prime must equal -ln(1 - eps)")
    lhs = float(np.sum(trace.gains))
    total = np.asarray(trace.payoff_sum)
    lam = float(np.min(total)) if total.ndim == 1 else min_eigenvalue(total)
    rhs = (1 + eps) * lam + math.log(n) / eps
    return lhs <= rhs + REGRET_TOL


class LpOracle:
    """Exact ORACLE for ``max_{y in D_alpha} sum_j y_j e_j``: one coordinate suffices.

    The optimum over the polytope puts all weight on ``j* = argmax e_j / b_j``.
    ``scale="max"`` returns ``(alpha / b_j*) e_j*``; ``scale="min"`` returns the
    smallest multiple of ``e_j*`` meeting ``sum y_j e_j >= f``.
    """

    def __init__(self, b, alpha, *, scale="max"):
        b = np.asarray(b, dtype=float)
        if np.any(b <= 0):
            raise PreconditionError("lp_oracle needs b > 0")
        if scale not in ("max", "min"):
            raise ValueError(f"unknown scale {scale!r}")
        self.b, self.alpha, self.scale = b, float(alpha), scale

    def __call__(self, e, f):
        ratio = np.asarray(e) / self.b
        j = int(np.argmax(ratio))
        y = np.zeros_like(self.b)
        if self.alpha * ratio[j] < f:
            return None
        if self.scale == "max":
            if ratio[j] > 0:
                y[j] = self.alpha / self.b[j]
        elif f > 0:
            y[j] = f / e[j]
        return y


def lp_oracle(b, alpha, *, scale="max"):
    return LpOracle(b, alpha, scale=scale)


def primal_value_from_state(e, f, b):
    """Objective of the feasible primal ``X = rho / max_j(e_j / b_j)`` (``b > 0``)."""
    top = float(np.max(np.asarray(e) / np.asarray(b)))
    if top <= 0:
        return math.inf if f > 0 else 0.0
    return f / top


@dataclass
class MmwResult:
    status: str                 # "dual", "witness" or "unconverged"
    iterations: int
    config: MmwConfig
    dual: DualVector = None
    certificate: object = None
    witness: DensityMatrix = None
    primal_bound: float = None
    trace: MmwTrace = None
    queries: int = 0

    @property
    def is_dual(self):
        return self.status == "dual"


def _run_compiled(inst, config, oracle, omega, shift, early_stop, adaptive, oracle_handle):
    n, m = inst.n, inst.m
    alpha, delta = config.alpha, config.delta
    D = np.ascontiguousarray(inst.diag_A)
    c = np.ascontiguousarray(inst.diag_C, dtype=float)
    b = np.ascontiguousarray(inst.b, dtype=float)
    nnz_A = np.array([a.nnz for a in inst.A], dtype=np.int64)
    nnz_all = int(nnz_A.sum()) + inst.C.nnz
    payoff_sum, ysum, ycomb = np.zeros(n), np.zeros(m), np.zeros(n)
    p = np.full(n, 1.0 / n)
    e = np.zeros(m)
    T = config.rounds
    t0, queries = 1, 0

    def finish(status, t, **kw):
        if oracle_handle is not None:
            oracle_handle.charge(queries)
        return MmwResult(status=status, iterations=t, config=config,
                         trace=MmwTrace(payoff_sum=payoff_sum), queries=queries, **kw)

    while True:
        code, t, f, use, q = _kernels.diag_lp_steps(
            D, c, b, nnz_A, nnz_all, alpha, oracle.scale == "min", float(omega),
            config.eps_prime, float(shift), delta, bool(adaptive), bool(early_stop),
            t0, T, payoff_sum, ysum, ycomb, p, e)
        queries += q
        if code == _kernels.WITNESS:
            return finish("witness", t, witness=DensityMatrix.from_diagonal(p.copy()),
                          primal_bound=primal_value_from_state(e, f, b))
        if code == _kernels.WIDTH_EXCEEDED:
            raise WidthError(f"iteration {t}: oracle output exceeds width omega = {omega:g}")
        ybar = ysum / t
        ybar[0] += use
        dual = DualVector.from_y(inst, ybar)
        ok, cert = verify_dual(inst, dual, alpha, delta)
        if ok:
            return finish("dual", t, dual=dual, certificate=cert)
        if code == _kernels.EXHAUSTED or t >= T:
            return finish("unconverged", t, dual=dual, certificate=cert)
        t0 = t + 1


def _diag_state(s, eps_prime):
    x = -eps_prime * s
    w = np.exp(x - x.max())
    return w / w.sum()


def run_arora_kale(instance, config, oracle, *, shift=None, early_stop=True,
                   adaptive_shift=False, record_trace=False, oracle_handle=None,
                   compiled=True):
    """Run the MMW loop for at most ``config.rounds`` iterations.

    ``shift`` is the coefficient on ``e_1`` in the assembled dual and defaults
    to ``delta * alpha / R``. With ``early_stop`` the run returns as soon as the
    running dual ``shift e_1 + (1/t) sum_{tau<=t} y^(tau)`` is feasible; that
    vector obeys the same objective bound as the full-length one.

    ``adaptive_shift`` replaces the fixed shift by the smallest one making the
    running average feasible whenever that keeps the objective within
    ``(1 + delta) alpha``. Both variants return only verified duals.

    Diagonal instances driven by :class:`LpOracle` run in a compiled loop
    unless ``compiled=False``; traces are not recorded there.
    """
    inst = instance
    n, m = inst.n, inst.m
    alpha, delta = config.alpha, config.delta
    omega = config.omega if config.omega is not None else width_bound(inst, alpha)
    eps_prime = config.eps_prime
    if shift is None:
        shift = delta * alpha / inst.R
    diag = inst.is_diagonal
    nnz_A = np.array([a.nnz for a in inst.A])
    nnz_all = int(nnz_A.sum()) + inst.C.nnz

    trace = MmwTrace()
    ysum = np.zeros(m)
    if diag:
        payoff_sum = np.zeros(n)
        ycomb = np.zeros(n)
        p = np.full(n, 1.0 / n)
    else:
        payoff_sum = np.zeros((n, n))
        ycomb = np.zeros((n, n))
        rho = np.eye(n) / n
        eye = np.eye(n)
    queries = 0
    T = config.rounds

    def finish(status, t, **kw):
        trace.payoff_sum = payoff_sum
        if oracle_handle is not None:
            oracle_handle.charge(queries)
        return MmwResult(status=status, iterations=t, config=config,
                         trace=trace, queries=queries, **kw)

    if diag and compiled and not record_trace and isinstance(oracle, LpOracle) \
            and np.array_equal(oracle.b, inst.b):
        return _run_compiled(inst, config, oracle, omega, shift, early_stop, adaptive_shift,
                             oracle_handle)

    for t in range(1, T + 1):
        if diag:
            e, f = inst.diag_A @ p, float(inst.diag_C @ p)
        else:
            e, f = inst.expectations(rho)
        queries += nnz_all
        try:
            y = oracle(e, f)
        except Exception as exc:
            trace.payoff_sum = payoff_sum
            raise OracleError(f"oracle raised at iteration {t}: {exc!r}", trace) from exc
        if y is None:
            state = DensityMatrix.from_diagonal(p) if diag else DensityMatrix(rho)
            return finish("witness", t, witness=state,
                          primal_bound=primal_value_from_state(e, f, inst.b))
        y = np.asarray(y, dtype=float)
        if y.shape != (m,) or y.min() < 0:
            raise OracleError(f"oracle returned an invalid vector at iteration {t}", trace)
        if y.sum() + 1 > omega * (1 + SPECTRAL_TOL):
            raise WidthError(f"iteration {t}: ||y||_1 + 1 = {y.sum() + 1:.6g} exceeds omega = {omega:g}")
        queries += int(nnz_A @ (y > 0))

        gain = (float(y @ e) - f + omega) / (2 * omega)
        if diag:
            comb = inst.diag_A.T @ y
            payoff = (comb - inst.diag_C + omega) / (2 * omega)
        else:
            comb = inst.combination(y) if y.any() else np.zeros((n, n))
            payoff = (comb - inst.C_dense + omega * eye) / (2 * omega)
        trace.gains.append(gain)
        if record_trace:
            trace.ys.append(y)
            trace.expectations.append((e, f))
            trace.payoffs.append(np.diag(payoff) if diag else payoff)
            trace.states.append(np.diag(p) if diag else rho)
        payoff_sum = payoff_sum + payoff
        ysum += y
        ycomb = ycomb + comb

        if early_stop or t == T:
            if diag:
                lam = float(np.min(ycomb / t - inst.diag_C))
            else:
                lam = min_eigenvalue(ycomb / t - inst.C_dense)
            use = shift
            if adaptive_shift:
                need = max(0.0, -lam)
                if float(inst.b @ ysum) / t + inst.b[0] * need <= (1 + delta) * alpha:
                    use = need
            if lam + use >= 0 or t == T:
                ybar = ysum / t
                ybar[0] += use
                dual = DualVector.from_y(inst, ybar)
                ok, cert = verify_dual(inst, dual, alpha, delta)
                if ok:
                    return finish("dual", t, dual=dual, certificate=cert)
                if t == T:
                    return finish("unconverged", t, dual=dual, certificate=cert)

        if diag:
            p = _diag_state(payoff_sum, eps_prime)
        else:
            rho = mmw_state(payoff_sum, eps_prime).matrix
    raise AssertionError("unreachable")
