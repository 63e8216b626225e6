"""Compiled inner loops.

Every kernel is written with explicit loops so numba can compile it in
nopython mode. Kernels never raise: failures are reported through an integer
status (0 on success, otherwise 1 + the offending row) and the calling service
turns that into a typed error.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def chol_rank_one(L, x, sign, start):  # pragma: no cover - compiled
    """In-place update (sign=+1) or downdate (sign=-1) of a lower Cholesky factor.

    After the call L Lᵀ equals the old L Lᵀ + sign·x xᵀ. ``x`` is used as
    scratch space. Columns before ``start`` are untouched, so callers may pass
    the index of the first nonzero entry of x.

    Returns:
        0 on success, or 1 + k when the pivot of column k would become
        non-positive (L is then partially modified)
    """
    p = L.shape[0]
    for k in range(start, p):
        xk = x[k]
        if xk == 0.0:
            continue
        d = L[k, k]
        r_squared = d * d + sign * xk * xk
        if r_squared <= 0.0:
            return k + 1
        r = np.sqrt(r_squared)
        c = r / d
        s = xk / d
        L[k, k] = r
        for i in range(k + 1, p):
            L[i, k] = (L[i, k] + sign * s * x[i]) / c
            x[i] = c * x[i] - s * L[i, k]
    return 0


@njit(cache=True)
def ldl_factorize(C, Z, eps, neg_tol):  # pragma: no cover - compiled
    """Factor diag(C) + Z Zᵀ = L(Z, B) diag(Delta) L(Z, B)ᵀ.

    Row j uses the running k×k matrix M = I − Σ_{i<j} Δ_i b_i b_iᵀ:
    t = M z_j, Δ_j = C_j + z_jᵀ t and b_j = t / Δ_j. Pivots at or below
    ``eps`` are set to zero with b_j = 0.

    Returns:
        (B, Delta, status) where status is 1 + j for the first pivot below
        ``-neg_tol``
    """
    p, k = Z.shape
    M = np.eye(k)
    B = np.zeros((p, k))
    Delta = np.zeros(p)
    t = np.empty(k)
    for j in range(p):
        delta = C[j]
        for a in range(k):
            acc = 0.0
            for b in range(k):
                acc += M[a, b] * Z[j, b]
            t[a] = acc
            delta += Z[j, a] * acc
        if delta < -neg_tol:
            return B, Delta, j + 1
        if delta > eps:
            Delta[j] = delta
            for a in range(k):
                B[j, a] = t[a] / delta
            for a in range(k):
                for b in range(k):
                    M[a, b] -= t[a] * t[b] / delta
    return B, Delta, 0


@njit(cache=True)
def ldl_multiply(Z, B, Delta, V):  # pragma: no cover - compiled
    """Return L(Z, B) diag(√Delta) V for a p×n block of columns.

    Runs one pass over the rows with the running buffer
    w = Σ_{i<j} b_i √Δ_i v_i per column.
    """
    p, k = Z.shape
    n = V.shape[1]
    out = np.empty((p, n))
    W = np.zeros((k, n))
    for j in range(p):
        root = np.sqrt(Delta[j])
        for c in range(n):
            scaled = root * V[j, c]
            acc = scaled
            for a in range(k):
                acc += Z[j, a] * W[a, c]
            out[j, c] = acc
            if scaled != 0.0:
                for a in range(k):
                    W[a, c] += scaled * B[j, a]
    return out


@njit(cache=True)
def sample_low_rank(C, Z, V, eps, neg_tol):  # pragma: no cover - compiled
    """Fused factorize-and-multiply pass for a p×n block of noise columns.

    Rows of B and Delta are produced on the fly and discarded, so the working
    memory is O(k² + k n) besides the output.

    Returns:
        (out, status) with the same status convention as ``ldl_factorize``
    """
    p, k = Z.shape
    n = V.shape[1]
    out = np.zeros((p, n))
    M = np.eye(k)
    W = np.zeros((k, n))
    t = np.empty(k)
    b_row = np.empty(k)
    for j in range(p):
        delta = C[j]
        for a in range(k):
            acc = 0.0
            for b in range(k):
                acc += M[a, b] * Z[j, b]
            t[a] = acc
            delta += Z[j, a] * acc
        if delta < -neg_tol:
            return out, j + 1
        if delta > eps:
            for a in range(k):
                b_row[a] = t[a] / delta
            for a in range(k):
                for b in range(k):
                    M[a, b] -= t[a] * t[b] / delta
            root = np.sqrt(delta)
        else:
            for a in range(k):
                b_row[a] = 0.0
            root = 0.0
        for c in range(n):
            scaled = root * V[j, c]
            acc = scaled
            for a in range(k):
                acc += Z[j, a] * W[a, c]
            out[j, c] = acc
            if scaled != 0.0:
                for a in range(k):
                    W[a, c] += scaled * b_row[a]
    return out, 0
