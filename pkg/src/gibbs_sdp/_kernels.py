"""Compiled inner loop for diagonal instances driven by the exact LP oracle."""

import numpy as np
from numba import njit

DUAL_CANDIDATE = 0
WITNESS = 1
EXHAUSTED = 2
WIDTH_EXCEEDED = 3


@njit(cache=True)
def diag_lp_steps(D, c, b, nnz_A, nnz_all, alpha, scale_min, omega, eps_prime, shift, delta,
                  adaptive, early_stop, t0, T, payoff_sum, ysum, ycomb, p, e_out):
    """Advance the MMW loop from round ``t0``; arrays are updated in place.

    Returns ``(code, t, f, shift_used, queries)``. On ``WITNESS`` the state
    ``p`` is the one the oracle failed on and ``e_out`` holds its expectations.
    On ``DUAL_CANDIDATE`` the state has already moved on, so a caller whose
    verification fails can resume at ``t + 1``.
    """
    m, n = D.shape
    queries = 0
    f = 0.0
    use = shift
    bound = (1.0 + delta) * alpha
    for t in range(t0, T + 1):
        f = 0.0
        for k in range(n):
            f += c[k] * p[k]
        best = -np.inf
        j = 0
        for i in range(m):
            s = 0.0
            for k in range(n):
                s += D[i, k] * p[k]
            e_out[i] = s
            r = s / b[i]
            if r > best:
                best = r
                j = i
        queries += nnz_all
        if alpha * best < f:
            return WITNESS, t, f, use, queries
        yj = 0.0
        if scale_min:
            if f > 0:
                yj = f / e_out[j]
        elif best > 0:
            yj = alpha / b[j]
        if yj + 1.0 > omega * (1.0 + 1e-9):
            return WIDTH_EXCEEDED, t, f, use, queries
        if yj > 0:
            queries += nnz_A[j]
        ysum[j] += yj
        for k in range(n):
            ycomb[k] += yj * D[j, k]
            payoff_sum[k] += (yj * D[j, k] - c[k] + omega) / (2.0 * omega)
        xmax = -np.inf
        for k in range(n):
            x = -eps_prime * payoff_sum[k]
            if x > xmax:
                xmax = x
        z = 0.0
        for k in range(n):
            p[k] = np.exp(-eps_prime * payoff_sum[k] - xmax)
            z += p[k]
        for k in range(n):
            p[k] /= z
        if early_stop or t == T:
            lam = np.inf
            for k in range(n):
                v = ycomb[k] / t - c[k]
                if v < lam:
                    lam = v
            use = shift
            if adaptive:
                need = max(0.0, -lam)
                obj = 0.0
                for i in range(m):
                    obj += b[i] * ysum[i]
                if obj / t + b[0] * need <= bound:
                    use = need
            if lam + use >= 0:
                return DUAL_CANDIDATE, t, f, use, queries
            if t == T:
                return EXHAUSTED, t, f, use, queries
    return EXHAUSTED, T, f, use, queries
