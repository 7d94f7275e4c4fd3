"""Instance generators. Every output passes ``validate``."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import SparseHermitian, operator_norm
from .model import SdpInstance, check_instance

KINDS = ("lower_bound_case1", "lower_bound_case2", "lower_bound_case1_normalized",
         "random_dense", "random_sparse", "diagonal_lp", "diagonal_lp_mixed")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    m: int
    s: int = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; choose from {KINDS}")


@dataclass(frozen=True)
class LowerBoundAnswer:
    """The hidden marked row and constraint, both 0-based."""

    case: int
    row: int
    constraint: int
    optimum: float

    def to_dict(self):
        return {"case": self.case, "row": self.row, "constraint": self.constraint,
                "optimum": self.optimum}


def _diag(n, entries):
    d = np.zeros(n)
    for k, v in entries:
        d[k] = v
    return SparseHermitian(sp.diags(d, format="csr"))


def gen_lower_bound(case, n, m, seed, *, normalized=False):
    """Single-spike instances with ``R = 1``, ``A_1 = I`` and ``b_j = 1``.

    Case 2 sets ``C_ii = 1`` and leaves ``A_2..A_m`` zero (optimum 1). Case 1
    also sets ``(A_j)_ii = 2`` for a random ``j >= 2`` (optimum 1/2); that entry
    exceeds the unit norm, so the instance carries ``norm_waiver``. With
    ``normalized`` the entry is 1 and ``b_j = 1/2`` instead, same optimum.

    Returns ``(instance, answer)``.
    """
    if case not in (1, 2):
        raise ValueError(f"case must be 1 or 2, got {case}")
    if n < 2 or m < 2:
        raise ValueError("lower-bound instances need n, m >= 2")
    rng = np.random.default_rng(seed)
    i = int(rng.integers(n))
    j = int(rng.integers(1, m))
    b = np.ones(m)
    A = [SparseHermitian.identity(n)] + [SparseHermitian.zeros(n) for _ in range(m - 1)]
    waiver = False
    if case == 1:
        if normalized:
            A[j] = _diag(n, [(i, 1.0)])
            b[j] = 0.5
        else:
            A[j] = _diag(n, [(i, 2.0)])
            waiver = True
    name = f"lower_bound_case{case}{'_normalized' if normalized and case == 1 else ''}"
    inst = SdpInstance(n=n, m=m, s=1, C=_diag(n, [(i, 1.0)]), A=A, b=b, R=1.0,
                       norm_waiver=waiver, name=name)
    check_instance(inst)
    return inst, LowerBoundAnswer(case=case, row=i, constraint=j,
                                  optimum=0.5 if case == 1 else 1.0)


def _sparse_pattern(n, s, rng):
    """Symmetric off-diagonal pattern with at most ``s - 1`` entries per row."""
    deg = np.zeros(n, dtype=int)
    pairs = set()
    for _ in range(max(0, s - 1)):
        perm = rng.permutation(n)
        for a, c in zip(perm[::2], perm[1::2]):
            a, c = int(min(a, c)), int(max(a, c))
            if (a, c) in pairs or deg[a] >= s - 1 or deg[c] >= s - 1:
                continue
            pairs.add((a, c))
            deg[a] += 1
            deg[c] += 1
    return sorted(pairs)


def _random_hermitian(n, s, rng, *, complex_entries=True):
    if s >= n:
        a = rng.normal(size=(n, n))
        if complex_entries:
            a = a + 1j * rng.normal(size=(n, n))
        h = (a + a.conj().T) / 2
    else:
        h = np.diag(rng.normal(size=n)).astype(complex if complex_entries else float)
        for a, c in _sparse_pattern(n, s, rng):
            v = rng.normal() + (1j * rng.normal() if complex_entries else 0)
            h[a, c] = v
            h[c, a] = np.conj(v)
    norm = operator_norm(h)
    if norm > 0:
        h = h * (rng.uniform(0.5, 1.0) / norm)
    if complex_entries and not np.any(np.imag(h)):
        h = np.real(h)
    return SparseHermitian.from_dense(h)


def gen_random(n, m, s, seed, *, kind="random_sparse"):
    """Random ``s``-sparse Hermitian constraints with ``b_i`` uniform in ``[1, 2]``."""
    if s > n or s < 1:
        raise ValueError(f"need 1 <= s <= n, got s = {s}, n = {n}")
    if kind == "random_dense":
        s = n
    rng = np.random.default_rng(seed)
    C = _random_hermitian(n, s, rng)
    A = [SparseHermitian.identity(n)] + [_random_hermitian(n, s, rng) for _ in range(m - 1)]
    b = rng.uniform(1.0, 2.0, size=m)
    R = float(np.max(b))
    b[0] = R
    s_eff = max([C.s] + [a.s for a in A])
    inst = SdpInstance(n=n, m=m, s=s_eff, C=C, A=A, b=b, R=R, name=kind)
    check_instance(inst)
    return inst


def gen_diagonal_lp(n, m, seed, *, mixed_sign=False):
    """Diagonal instance (an LP in disguise).

    Constraint diagonals are uniform in ``[0, 1]`` and ``b_i`` uniform in
    ``[1, 2]``. With ``mixed_sign`` the diagonals are uniform in ``[-1, 1]``
    and ``b_i = <a_i, x0> + slack`` for a hidden nonnegative ``x0``, so ``b``
    takes both signs while the primal stays feasible.
    """
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1.0, 1.0, size=n)
    if mixed_sign:
        D = rng.uniform(-1.0, 1.0, size=(m, n))
        x0 = rng.dirichlet(np.ones(n)) * rng.uniform(0.5, 1.0)
        b = D @ x0 + rng.uniform(0.0, 0.3, size=m)
        R = max(1.0, float(np.max(np.abs(b[1:]))) if m > 1 else 1.0)
    else:
        D = rng.uniform(0.0, 1.0, size=(m, n))
        b = rng.uniform(1.0, 2.0, size=m)
        R = float(np.max(b))
    D[0] = 1.0
    b[0] = R
    A = [SparseHermitian(sp.diags(row, format="csr")) for row in D]
    inst = SdpInstance(n=n, m=m, s=1, C=SparseHermitian(sp.diags(c, format="csr")),
                       A=A, b=b, R=R, name="diagonal_lp_mixed" if mixed_sign else "diagonal_lp")
    check_instance(inst)
    return inst


def generate(spec):
    """Dispatch a :class:`GeneratorSpec`; returns ``(instance, answer or None)``."""
    k = spec.kind
    if k.startswith("lower_bound"):
        case = 1 if "case1" in k else 2
        return gen_lower_bound(case, spec.n, spec.m, spec.seed, normalized=k.endswith("normalized"))
    if k in ("random_dense", "random_sparse"):
        s = spec.n if k == "random_dense" else (spec.s or min(3, spec.n))
        return gen_random(spec.n, spec.m, s, spec.seed, kind=k), None
    return gen_diagonal_lp(spec.n, spec.m, spec.seed, mixed_sign=k == "diagonal_lp_mixed"), None
