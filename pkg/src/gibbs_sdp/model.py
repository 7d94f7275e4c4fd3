"""SDP instances, the sparse-entry oracle, dual vectors and the JSON format.

The primal is ``max tr(CX) s.t. tr(A_j X) <= b_j, X >= 0`` and the dual is
``min b.y s.t. sum_j y_j A_j >= C, y >= 0``. Matrices are normalized to
operator norm at most one, ``A_1 = I`` and ``b_1 = R = max_i |b_i|``.
"""

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .exceptions import DimensionError, InvalidInstanceError
from .linalg import SparseHermitian, min_eigenvalue, operator_norm

NORM_TOL = 1e-9
B_TOL = 1e-12
FEASIBILITY_TOL = 1e-6
OBJECTIVE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SdpInstance:
    n: int
    m: int
    s: int
    C: SparseHermitian
    A: tuple
    b: np.ndarray
    R: float
    r: float = None
    norm_waiver: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        b = np.array(self.b, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @classmethod
    def build(cls, C, A, b, R=None, r=None, s=None, **kw):
        """Assemble an instance from dense/sparse matrices, inferring sizes."""
        C = C if isinstance(C, SparseHermitian) else SparseHermitian.from_dense(C)
        A = [a if isinstance(a, SparseHermitian) else SparseHermitian.from_dense(a) for a in A]
        b = np.asarray(b, dtype=float)
        if R is None:
            R = float(np.max(np.abs(b)))
        if s is None:
            s = max([C.s] + [a.s for a in A])
        return cls(n=C.n, m=len(A), s=int(s), C=C, A=tuple(A), b=b, R=float(R), r=r, **kw)

    def matrix(self, j):
        """``A_j`` for ``j`` in ``1..m`` and ``C`` for ``j = m + 1``."""
        if j == self.m + 1:
            return self.C
        if 1 <= j <= self.m:
            return self.A[j - 1]
        raise IndexError(f"matrix index {j} outside 1..{self.m + 1}")

    @cached_property
    def is_diagonal(self):
        return self.C.is_diagonal() and all(a.is_diagonal() for a in self.A)

    @cached_property
    def stacked(self):
        """Sparse ``m x n^2`` operator mapping ``vec(rho^T)`` to ``tr(A_j rho)``."""
        rows = [a.csr.reshape(1, self.n * self.n) for a in self.A]
        return sp.vstack(rows, format="csr") if rows else sp.csr_matrix((0, self.n * self.n))

    @cached_property
    def diag_A(self):
        """``m x n`` array of diagonals; meaningful only for diagonal instances."""
        return np.array([a.diagonal() for a in self.A]).reshape(self.m, self.n)

    @cached_property
    def diag_C(self):
        return self.C.diagonal()

    @cached_property
    def C_dense(self):
        return self.C.toarray()

    def expectations(self, rho):
        """``(tr(A_j rho))_j`` and ``tr(C rho)`` for a dense matrix ``rho``."""
        rho = np.asarray(rho)
        if self.is_diagonal:
            d = np.real(np.diag(rho))
            return self.diag_A @ d, float(self.diag_C @ d)
        vec = rho.T.reshape(-1)
        e = np.real(self.stacked @ vec)
        f = float(np.real(np.sum(self.C_dense * rho.T)))
        return e, f

    def combination(self, y):
        """Dense ``sum_j y_j A_j`` accumulated in index order."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.m,):
            raise DimensionError(f"dual vector has shape {y.shape}, expected ({self.m},)")
        if self.is_diagonal:
            return np.diag(self.diag_A.T @ y)
        vec = self.stacked.T @ y
        return np.asarray(vec).reshape(self.n, self.n)

    def slack(self, y):
        """``sum_j y_j A_j - C``."""
        return self.combination(y) - self.C_dense

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"SdpInstance{tag}(n={self.n}, m={self.m}, s={self.s}, R={self.R:g})"


def validate(instance):
    """Every violated normalization invariant, as readable strings."""
    report = []
    inst = instance
    if len(inst.A) != inst.m:
        report.append(f"A has {len(inst.A)} matrices but m = {inst.m}")
    if inst.b.shape != (inst.m,):
        report.append(f"b has shape {inst.b.shape} but m = {inst.m}")
    mats = [("C", inst.C)] + [(f"A_{j + 1}", a) for j, a in enumerate(inst.A)]
    bad_dim = False
    for label, mat in mats:
        if mat.n != inst.n:
            report.append(f"{label} has dimension {mat.n}, expected {inst.n}")
            bad_dim = True
        elif mat.s > inst.s:
            report.append(f"{label} has a row with {mat.s} nonzeros, above s = {inst.s}")
    if bad_dim:
        return report
    c_norm = operator_norm(inst.C)
    if c_norm > 1 + NORM_TOL:
        report.append(f"||C|| = {c_norm:.6g} exceeds 1")
    for j, a in enumerate(inst.A):
        a_norm = operator_norm(a)
        if a_norm > 1 + NORM_TOL and not inst.norm_waiver:
            report.append(f"||A_{j + 1}|| = {a_norm:.6g} exceeds 1")
    if inst.m >= 1:
        a1 = inst.A[0].toarray()
        if a1.shape == (inst.n, inst.n) and np.max(np.abs(a1 - np.eye(inst.n))) > NORM_TOL:
            report.append("A_1 is not the identity (convention A_1 = I)")
        if inst.b.shape == (inst.m,) and abs(inst.b[0] - inst.R) > B_TOL:
            report.append(f"b_1 = {inst.b[0]:g} differs from R = {inst.R:g}")
    else:
        report.append("instance has no constraints (A_1 = I is required)")
    if inst.b.size and abs(np.max(np.abs(inst.b)) - inst.R) > B_TOL:
        report.append(f"max |b_i| = {np.max(np.abs(inst.b)):g} differs from R = {inst.R:g}")
    if not np.all(np.isfinite(inst.b)):
        report.append("b has non-finite entries")
    if inst.r is not None and not inst.r > 0:
        report.append(f"dual size bound r = {inst.r} must be positive")
    return report


def check_instance(instance):
    """Raise :class:`InvalidInstanceError` unless ``validate`` is clean."""
    report = validate(instance)
    if report:
        raise InvalidInstanceError(report)
    return instance


class EntryOracle:
    """Counting access to ``(A_1, ..., A_m, A_{m+1} = C)`` entry by entry.

    Indices follow the 1-based ``[m+1] x [n] x [s]`` convention and returned
    column indices are 1-based too.
    """

    def __init__(self, instance):
        self.instance = instance
        self._queries = 0

    @property
    def queries(self):
        return self._queries

    def charge(self, count):
        """Record ``count`` queries made on the caller's behalf."""
        count = int(count)
        if count < 0:
            raise ValueError("query charge must be nonnegative")
        self._queries += count

    def entry(self, j, k, l):
        inst = self.instance
        if not 1 <= j <= inst.m + 1:
            raise IndexError(f"matrix index {j} outside 1..{inst.m + 1}")
        if not 1 <= k <= inst.n:
            raise IndexError(f"row {k} outside 1..{inst.n}")
        if not 1 <= l <= inst.s:
            raise IndexError(f"position {l} outside 1..{inst.s}")
        self._queries += 1
        hit = inst.matrix(j).row_entry(k - 1, l - 1)
        if hit is None:
            return None
        col, val = hit
        return col + 1, complex(val)


def oracle_entry(handle, j, k, l):
    return handle.entry(j, k, l)


@dataclass(frozen=True, eq=False)
class DualVector:
    y: np.ndarray
    objective: float
    min_slack: float

    @classmethod
    def from_y(cls, instance, y):
        y = np.array(y, dtype=float)
        if y.shape != (instance.m,):
            raise DimensionError(f"dual vector has shape {y.shape}, expected ({instance.m},)")
        if np.any(y < 0):
            raise ValueError("dual vector has negative components")
        y.setflags(write=False)
        objective = float(instance.b @ y)
        return cls(y=y, objective=objective, min_slack=min_eigenvalue(instance.slack(y)))

    @property
    def norm1(self):
        return float(self.y.sum())

    def consistent_with(self, instance, tol=1e-8):
        fresh = DualVector.from_y(instance, self.y)
        return (abs(fresh.objective - self.objective) <= tol
                and abs(fresh.min_slack - self.min_slack) <= tol)


@dataclass(frozen=True)
class DualCertificate:
    feasible: bool
    objective: float
    min_slack: float
    bound: float
    objective_ok: bool
    slack_ok: bool


def verify_dual(instance, y, alpha, delta):
    """Check ``sum y_j A_j >= C`` and ``b.y <= (1 + delta) alpha``."""
    dual = y if isinstance(y, DualVector) else DualVector.from_y(instance, y)
    bound = (1 + delta) * alpha
    slack_ok = dual.min_slack >= -FEASIBILITY_TOL
    objective_ok = dual.objective <= bound + OBJECTIVE_TOL
    cert = DualCertificate(feasible=slack_ok and objective_ok, objective=dual.objective,
                           min_slack=dual.min_slack, bound=bound,
                           objective_ok=objective_ok, slack_ok=slack_ok)
    return cert.feasible, cert


# --- JSON instance format -------------------------------------------------

def instance_to_dict(instance):
    out = {"n": instance.n, "m": instance.m, "s": instance.s, "R": instance.R}
    if instance.r is not None:
        out["r"] = instance.r
    out["b"] = [float(v) for v in instance.b]
    out["C"] = {"triplets": instance.C.upper_triplets()}
    out["A"] = [{"triplets": a.upper_triplets()} for a in instance.A]
    if instance.norm_waiver:
        out["norm_waiver"] = True
    if instance.name:
        out["name"] = instance.name
    return out


def instance_from_dict(data, *, validate_instance=True):
    try:
        n, m, s = int(data["n"]), int(data["m"]), int(data["s"])
        C = SparseHermitian.from_triplets(n, data["C"]["triplets"])
        A = [SparseHermitian.from_triplets(n, entry["triplets"]) for entry in data["A"]]
        inst = SdpInstance(n=n, m=m, s=s, C=C, A=tuple(A), b=np.asarray(data["b"], dtype=float),
                           R=float(data["R"]), r=data.get("r"),
                           norm_waiver=bool(data.get("norm_waiver", False)),
                           name=str(data.get("name", "")))
    except (KeyError, TypeError) as exc:
        raise InvalidInstanceError([f"malformed instance document: {exc!r}"]) from exc
    if validate_instance:
        check_instance(inst)
    return inst


def dumps_instance(instance):
    return json.dumps(instance_to_dict(instance), sort_keys=True, separators=(",", ":"))


def loads_instance(text, **kw):
    return instance_from_dict(json.loads(text), **kw)


def save_instance(instance, path):
    with open(path, "w") as fh:
        fh.write(dumps_instance(instance))
        fh.write("\n")


def load_instance(path, **kw):
    with open(path) as fh:
        return loads_instance(fh.read(), **kw)
