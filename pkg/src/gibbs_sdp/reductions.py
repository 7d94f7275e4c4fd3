"""Problem transformations and the binary search from optimization to feasibility."""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .exceptions import PreconditionError, SolverContractError
from .linalg import SparseHermitian
from .model import FEASIBILITY_TOL, OBJECTIVE_TOL, DualVector, SdpInstance, check_instance


@dataclass(frozen=True, eq=False)
class ReductionRecord:
    """A transformed instance plus the maps between the two problems.

    ``delta_map`` sends the accuracy wanted on the original to the accuracy to
    request on the transformed instance. ``y_scale`` and ``objective_scale``
    describe the inverse map: original ``y`` is ``y_scale`` times the (truncated)
    transformed ``y`` and original objectives are ``objective_scale`` times
    transformed ones (up to ``objective_offset``).
    """

    kind: str
    original: SdpInstance
    transformed: SdpInstance
    delta_factor: float = 1.0
    y_scale: float = 1.0
    objective_scale: float = 1.0
    objective_offset: float = 0.0
    keep: int = None
    params: dict = field(default_factory=dict)

    def delta_map(self, delta):
        return delta * self.delta_factor

    def objective_back(self, value):
        return self.objective_scale * value + self.objective_offset

    @property
    def description(self):
        keep = self.keep if self.keep is not None else self.transformed.m
        return (f"{self.kind}: y = {self.y_scale:g} * y'[:{keep}], "
                f"objective = {self.objective_scale:g} * obj' + {self.objective_offset:g}, "
                f"delta' = {self.delta_factor:g} * delta")


def identity_record(instance, kind="identity"):
    return ReductionRecord(kind=kind, original=instance, transformed=instance)


def _block(mat, corner):
    csr = sp.bmat([[mat.csr, None], [None, sp.csr_matrix([[corner]])]], format="csr")
    return SparseHermitian(csr, check=False)


def extend_to_positive_b(instance, r):
    """Embed into dimension ``n + 1`` with ``m + 1`` constraints and every ``b' >= 1``.

    ``b'_i = b_i + R + 1`` for ``i <= m`` and ``b'_{m+1} = R + 1``; the
    constraints become ``[A_i 0; 0 1]`` and ``[0 0; 0 1]`` and the objective
    ``[C 0; 0 r] / max(1, r)``. When ``r`` bounds the l1 norm of an optimal
    dual, ``opt' = (opt + (R + 1) r) / max(1, r)``.
    """
    if not r > 0:
        raise ValueError(f"dual size bound r must be positive, got {r}")
    inst = instance
    R = inst.R
    scale = max(1.0, float(r))
    A = [_block(a, 1.0) for a in inst.A]
    A.append(SparseHermitian(sp.csr_matrix(([1.0], ([inst.n], [inst.n])),
                                           shape=(inst.n + 1, inst.n + 1))))
    C = SparseHermitian(_block(inst.C, float(r)).csr / scale)
    b = np.concatenate([inst.b + R + 1, [R + 1]])
    R_new = float(np.max(np.abs(b)))
    if abs(R_new - (2 * R + 1)) > 1e-12:
        raise AssertionError(f"extended size parameter {R_new} differs from 2R+1 = {2 * R + 1}")
    ext = SdpInstance(n=inst.n + 1, m=inst.m + 1, s=max(inst.s, 1), C=C, A=A, b=b, R=R_new,
                      norm_waiver=inst.norm_waiver, name=f"{inst.name or 'instance'}+extended")
    check_instance(ext)
    return ReductionRecord(kind="extend_to_positive_b", original=inst, transformed=ext,
                           delta_factor=1.0 / scale, y_scale=scale, objective_scale=scale,
                           objective_offset=-(R + 1) * r, keep=inst.m, params={"r": float(r)})


def map_back(record, y_ext):
    """Original dual from a feasible dual of the transformed instance."""
    ext = record.transformed
    dual = y_ext if isinstance(y_ext, DualVector) else DualVector.from_y(ext, y_ext)
    if dual.min_slack < -FEASIBILITY_TOL:
        raise SolverContractError(
            f"dual is infeasible for the transformed instance (min slack {dual.min_slack:.3g})")
    keep = record.keep if record.keep is not None else record.original.m
    return DualVector.from_y(record.original, record.y_scale * np.asarray(dual.y)[:keep])


def rescale_for_alpha(instance, alpha):
    """Scale ``b`` by ``1/alpha`` for ``0 < alpha < 1``; identity for ``alpha >= 1``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if alpha >= 1:
        return identity_record(instance, "rescale_for_alpha")
    if np.any(instance.b < 1 - 1e-12):
        raise PreconditionError("rescale_for_alpha expects b_i >= 1")
    rec = scale_b(instance, 1.0 / alpha)
    return ReductionRecord(kind="rescale_for_alpha", original=instance,
                           transformed=rec.transformed, delta_factor=alpha,
                           objective_scale=alpha, params={"alpha": float(alpha)})


def scale_b(instance, factor):
    """Multiply ``b`` (and ``R``) by ``factor > 0``; optima scale by the same factor."""
    if not factor > 0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    inst = instance
    out = SdpInstance(n=inst.n, m=inst.m, s=inst.s, C=inst.C, A=inst.A, b=inst.b * factor,
                      R=inst.R * factor, norm_waiver=inst.norm_waiver, name=inst.name)
    return ReductionRecord(kind="scale_b", original=inst, transformed=out,
                           delta_factor=factor, objective_scale=1.0 / factor,
                           params={"factor": float(factor)})


def multiplicative_to_additive(delta_add, alpha):
    """Multiplicative accuracy giving additive error ``delta_add`` at ``alpha >= 1``."""
    if alpha < 1:
        raise PreconditionError(f"conversion assumes alpha >= 1, got {alpha}")
    return delta_add / alpha


def dual_size_bound(instance, alpha):
    """``alpha / min_i b_i``, a bound on the l1 norm of a dual with value ``alpha``."""
    bmin = float(np.min(instance.b))
    if bmin <= 0:
        raise PreconditionError("some b_i <= 0: a dual size bound r must be supplied externally")
    return alpha / bmin


# --- binary search ----------------------------------------------------------

@dataclass
class FeasibilityOutcome:
    """What a feasibility solver reports for one guess ``alpha``.

    ``status`` is ``"dual"`` (``dual`` has objective at most ``(1 + delta) alpha``),
    ``"larger"`` (the optimum exceeds ``(1 - delta) alpha``; ``primal_bound``
    optionally certifies a primal value) or ``"failed"``.
    """

    status: str
    alpha: float
    delta: float
    dual: DualVector = None
    primal_bound: float = None
    detail: object = None


@dataclass
class BinarySearchResult:
    opt_estimate: float
    lo: float
    hi: float
    lower_bound: float
    upper_bound: float
    dual: DualVector
    best_dual: DualVector
    witness: object
    calls: int
    history: list


def binary_search_calls_bound(R, delta):
    return max(1, math.ceil(math.log2(R / delta))) + 1


def binary_search_opt(instance, delta, solver, *, gap_tol=None, max_calls=None):
    """Bisect ``[0, R]`` with ``solver(alpha) -> FeasibilityOutcome``.

    Stops when ``hi - lo <= delta * max(1, lo)``. Alongside the bracket it
    keeps the tightest bounds the outcomes imply: dual objectives bound the
    optimum from above and Larger verdicts from below. The estimate is the
    midpoint of those bounds. With ``gap_tol`` the search also stops once
    those bounds are within ``gap_tol`` of each other.
    """
    lo, hi = 0.0, float(instance.R)
    lower, upper = 0.0, float(instance.R)
    last_dual = best_dual = witness = None
    history = []
    limit = max_calls or binary_search_calls_bound(instance.R, delta) + 1
    while hi - lo > delta * max(1.0, lo):
        if len(history) >= limit:
            raise SolverContractError(f"binary search exceeded {limit} solver calls")
        alpha = (lo + hi) / 2
        out = solver(alpha)
        history.append(out)
        if out.status == "dual":
            bound = (1 + out.delta) * alpha
            if out.dual is None or out.dual.objective > bound + OBJECTIVE_TOL:
                raise SolverContractError(
                    f"dual at alpha = {alpha:g} has objective "
                    f"{getattr(out.dual, 'objective', None)} above (1 + delta) alpha = {bound:g}")
            if out.dual.min_slack < -FEASIBILITY_TOL:
                raise SolverContractError(f"dual at alpha = {alpha:g} is infeasible "
                                          f"(min slack {out.dual.min_slack:.3g})")
            hi = alpha
            last_dual = out.dual
            if best_dual is None or out.dual.objective < best_dual.objective:
                best_dual = out.dual
            upper = min(upper, out.dual.objective)
        elif out.status == "larger":
            lo = alpha
            witness = out
            implied = (1 - out.delta) * alpha
            if out.primal_bound is not None and math.isfinite(out.primal_bound):
                implied = max(implied, out.primal_bound)
            lower = max(lower, implied)
        else:
            raise SolverContractError(f"feasibility solver failed at alpha = {alpha:g}: {out.detail!r}")
        if lower > upper + 1e-9:
            raise SolverContractError(
                f"bracket crossed: lower bound {lower:.6g} above dual objective {upper:.6g}")
        if gap_tol is not None and best_dual is not None and upper - lower <= gap_tol:
            break
    return BinarySearchResult(opt_estimate=(lower + upper) / 2, lo=lo, hi=hi,
                              lower_bound=lower, upper_bound=upper, dual=last_dual,
                              best_dual=best_dual, witness=witness, calls=len(history),
                              history=history)
