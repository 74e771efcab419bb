"""Loop-form kernels compiled with numba.

Same contracts as the numpy versions in ``_numpy``; written as explicit
loops because that is what numba compiles well.
"""

import math

import numba
import numpy as np

_jit = numba.njit(cache=True, nogil=True)


@_jit
def filter_down(ext, lo, hi, start, m):
    rows = ext.shape[0]
    L = lo.shape[0]
    a = np.empty((rows, m))
    d = np.empty((rows, m))
    for r in range(rows):
        for i in range(m):
            t = start + 2 * i
            sa = 0.0
            sd = 0.0
            for k in range(L):
                v = ext[r, t - k]
                sa += lo[k] * v
                sd += hi[k] * v
            a[r, i] = sa
            d[r, i] = sd
    return a, d


@_jit
def upsample_filter(a, d, lo_r, hi_r):
    rows, m = a.shape
    L = lo_r.shape[0]
    z = np.zeros((rows, 2 * m + L - 1))
    for r in range(rows):
        for i in range(m):
            ai = a[r, i]
            di = d[r, i]
            for k in range(L):
                z[r, 2 * i + k] += lo_r[k] * ai + hi_r[k] * di
    return z


@_jit
def _off_norm(A):
    n = A.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += A[i, j] * A[i, j]
    return math.sqrt(s)


@_jit
def jacobi_eigh(a, tol, max_sweeps):
    A = a.copy()
    n = A.shape[0]
    V = np.eye(n)
    fro = math.sqrt(np.sum(A * A))
    limit = tol * max(1.0, fro)
    for sweep in range(max_sweeps + 1):
        if _off_norm(A) < limit:
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
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    return np.diag(A).copy(), V, -1


@_jit
def train_epoch(params, velocity, sizes, X, T, order, lr, momentum):
    n_layers = sizes.shape[0] - 1
    woff = np.empty(n_layers, dtype=np.int64)
    boff = np.empty(n_layers, dtype=np.int64)
    aoff = np.empty(n_layers + 1, dtype=np.int64)
    pos = 0
    apos = 0
    for j in range(n_layers):
        woff[j] = pos
        pos += sizes[j + 1] * sizes[j]
        boff[j] = pos
        pos += sizes[j + 1]
        aoff[j] = apos
        apos += sizes[j]
    aoff[n_layers] = apos
    apos += sizes[n_layers]
    acts = np.empty(apos)
    deltas = np.empty(apos)

    sse = 0.0
    for s in range(order.shape[0]):
        idx = order[s]
        for i in range(sizes[0]):
            acts[i] = X[idx, i]
        for j in range(n_layers):
            nin = sizes[j]
            nout = sizes[j + 1]
            for i in range(nout):
                z = params[boff[j] + i]
                row = woff[j] + i * nin
                for k in range(nin):
                    z += params[row + k] * acts[aoff[j] + k]
                acts[aoff[j + 1] + i] = 1.0 / (1.0 + math.exp(-z)) if z > -700.0 else 0.0

        out = aoff[n_layers]
        for i in range(sizes[n_layers]):
            o = acts[out + i]
            e = o - T[idx, i]
            sse += e * e
            deltas[out + i] = e * o * (1.0 - o)
        for j in range(n_layers - 1, 0, -1):
            nin = sizes[j]
            nout = sizes[j + 1]
            for k in range(nin):
                g = 0.0
                for i in range(nout):
                    g += params[woff[j] + i * nin + k] * deltas[aoff[j + 1] + i]
                a = acts[aoff[j] + k]
                deltas[aoff[j] + k] = g * a * (1.0 - a)

        for j in range(n_layers):
            nin = sizes[j]
            nout = sizes[j + 1]
            for i in range(nout):
                dl = deltas[aoff[j + 1] + i]
                row = woff[j] + i * nin
                for k in range(nin):
                    p = row + k
                    v = -lr * (dl * acts[aoff[j] + k]) + momentum * velocity[p]
                    velocity[p] = v
                    params[p] += v
                p = boff[j] + i
                v = -lr * dl + momentum * velocity[p]
                velocity[p] = v
                params[p] += v
    return sse
