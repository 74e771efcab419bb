"""Vectorized numpy implementations of the hot kernels.

Each function here has a loop-form twin in ``_numba`` with the same
signature. Inputs are expected as contiguous float64 arrays.
"""

import math

import numpy as np


def filter_down(ext, lo, hi, start, m):
    """Filter each row of ``ext`` with ``lo``/``hi`` and keep every other sample.

    Output sample ``i`` is the full-convolution value at index ``start + 2*i``.
    """
    rows = ext.shape[0]
    a = np.zeros((rows, m))
    d = np.zeros((rows, m))
    for k in range(lo.shape[0]):
        s = start - k
        window = ext[:, s:s + 2 * m - 1:2]
        a += lo[k] * window
        d += hi[k] * window
    return a, d


def upsample_filter(a, d, lo_r, hi_r):
    """Upsample rows by two and convolve with the synthesis filters (full length)."""
    rows, m = a.shape
    L = lo_r.shape[0]
    z = np.zeros((rows, 2 * m + L - 1))
    for k in range(L):
        z[:, k:k + 2 * m - 1:2] += lo_r[k] * a + hi_r[k] * d
    return z


def jacobi_eigh(a, tol, max_sweeps):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps)``; eigenvalues are unsorted
    and eigenvectors are the columns of the second array. ``sweeps`` is -1
    when the off-diagonal mass never fell below tolerance.
    """
    A = np.array(a, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    fro = math.sqrt(float(np.sum(A * A)))
    limit = tol * max(1.0, fro)
    offdiag = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(float(np.sum(A[offdiag] ** 2)))
        if off < limit:
            return np.diag(A).copy(), V, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q]
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :]
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V, -1


def _layout(sizes):
    n_layers = sizes.shape[0] - 1
    woff = np.empty(n_layers, dtype=np.int64)
    boff = np.empty(n_layers, dtype=np.int64)
    pos = 0
    for j in range(n_layers):
        woff[j] = pos
        pos += sizes[j + 1] * sizes[j]
        boff[j] = pos
        pos += sizes[j + 1]
    return woff, boff


def train_epoch(params, velocity, sizes, X, T, order, lr, momentum):
    """One online pass of backprop with momentum, updating ``params`` in place.

    ``params``/``velocity`` use the flat layout of ``classifier.pack``. Returns
    the summed squared output error seen before each update.
    """
    n_layers = sizes.shape[0] - 1
    woff, boff = _layout(sizes)
    W, B, VW, VB = [], [], [], []
    for j in range(n_layers):
        nout, nin = int(sizes[j + 1]), int(sizes[j])
        W.append(params[woff[j]:woff[j] + nout * nin].reshape(nout, nin))
        B.append(params[boff[j]:boff[j] + nout])
        VW.append(velocity[woff[j]:woff[j] + nout * nin].reshape(nout, nin))
        VB.append(velocity[boff[j]:boff[j] + nout])

    sse = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for idx in order:
            acts = [X[idx]]
            for j in range(n_layers):
                acts.append(1.0 / (1.0 + np.exp(-(W[j] @ acts[-1] + B[j]))))
            out = acts[-1]
            err = out - T[idx]
            sse += float(err @ err)
            deltas = [None] * n_layers
            deltas[-1] = err * out * (1.0 - out)
            for j in range(n_layers - 1, 0, -1):
                a = acts[j]
                deltas[j - 1] = (W[j].T @ deltas[j]) * a * (1.0 - a)
            for j in range(n_layers):
                VW[j][...] = -lr * np.outer(deltas[j], acts[j]) + momentum * VW[j]
                VB[j][...] = -lr * deltas[j] + momentum * VB[j]
                W[j] += VW[j]
                B[j] += VB[j]
    return sse
