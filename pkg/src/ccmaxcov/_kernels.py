"""Hot loops: coverage counting and the inner-solver evaluation loop.

Every kernel exists twice. The ``*_nb`` variants are numba-compiled and use
incremental bookkeeping; the ``*_np`` variants are plain numpy and recompute
everything from scratch per evaluation. Both consume the same pre-drawn random
streams, so for a fixed stream they walk the same trajectory (up to rounding
ties on the feasibility boundary).
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# infeasible solutions always score at most this far below zero
MIN_PENALTY = 1e-12

# incremental cost sums are recomputed exactly this often
_RESYNC_EVERY = 64


def _beta(e, v, budget):
    if v <= 0.0 and e <= budget:
        return 0.0
    if e >= budget:
        return 1.0
    d = budget - e
    return v / (v + d * d)


def _load(e, v, alpha):
    if v <= 0.0:
        return e
    return e + math.sqrt((1.0 - alpha) / alpha * v)


def _penalized(cov, e, v, budget, alpha):
    if _beta(e, v, budget) <= alpha:
        return float(cov)
    return min(budget - _load(e, v, alpha), -MIN_PENALTY)


_beta_nb = njit(cache=True)(_beta)
_load_nb = njit(cache=True)(_load)


@njit(cache=True)
def _penalized_nb(cov, e, v, budget, alpha):
    if _beta_nb(e, v, budget) <= alpha:
        return float(cov)
    return min(budget - _load_nb(e, v, alpha), -MIN_PENALTY)


# ---------------------------------------------------------------- coverage


@njit(cache=True)
def coverage_nb(indptr, indices, x):
    n = x.shape[0]
    mark = np.zeros(n, np.uint8)
    c = 0
    for i in range(n):
        if x[i]:
            if mark[i] == 0:
                mark[i] = 1
                c += 1
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if mark[j] == 0:
                    mark[j] = 1
                    c += 1
    return c


def coverage_np(indptr, indices, x):
    sel = np.asarray(x, dtype=bool)
    covered = sel.copy()
    rows = np.repeat(sel, np.diff(indptr))
    covered[indices[rows]] = True
    return int(np.count_nonzero(covered))


# ------------------------------------------------------------- solver loop


@njit(cache=True)
def _toggle_nb(i, x, cnt, indptr, indices):
    """Flip bit i, update closed-neighbourhood counts, return coverage delta."""
    delta = 0
    if x[i]:
        x[i] = 0
        cnt[i] -= 1
        if cnt[i] == 0:
            delta -= 1
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            cnt[j] -= 1
            if cnt[j] == 0:
                delta -= 1
    else:
        x[i] = 1
        if cnt[i] == 0:
            delta += 1
        cnt[i] += 1
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if cnt[j] == 0:
                delta += 1
            cnt[j] += 1
    return delta


@njit(cache=True, nogil=True)
def solve_nb(indptr, indices, mu, sigma2, budget, alpha,
             counts, uniforms, scan, accept_u, temps, trace):
    n = mu.shape[0]
    steps = trace.shape[0]
    anneal = temps.shape[0] > 0
    x = np.zeros(n, np.uint8)
    cnt = np.zeros(n, np.int64)
    perm = np.arange(n)
    flips = np.empty(max(n, 1), np.int64)
    cov = 0
    e = 0.0
    v = 0.0
    f = _penalized_nb(cov, e, v, budget, alpha)
    best_f = f
    best_x = x.copy()
    trace[0] = best_f
    u_pos = 0
    for t in range(1, steps):
        if scan:
            k = 1
            flips[0] = (t - 1) % n
        else:
            k = counts[t - 1]
            for j in range(k):
                r = j + int(uniforms[u_pos] * (n - j))
                u_pos += 1
                if r >= n:
                    r = n - 1
                tmp = perm[j]
                perm[j] = perm[r]
                perm[r] = tmp
                flips[j] = perm[j]

        old_cov = cov
        old_e = e
        old_v = v
        for j in range(k):
            i = flips[j]
            cov += _toggle_nb(i, x, cnt, indptr, indices)
            if x[i]:
                e += mu[i]
                v += sigma2[i]
            else:
                e -= mu[i]
                v -= sigma2[i]
        if t % _RESYNC_EVERY == 0:
            e = 0.0
            v = 0.0
            for i in range(n):
                if x[i]:
                    e += mu[i]
                    v += sigma2[i]
        fy = _penalized_nb(cov, e, v, budget, alpha)

        if anneal:
            delta = fy - f
            accept = delta >= 0.0 or accept_u[t - 1] < math.exp(delta / temps[t - 1])
        else:
            accept = fy >= f
        if accept:
            f = fy
            if f > best_f:
                best_f = f
                best_x[:] = x
        else:
            for j in range(k):
                _toggle_nb(flips[j], x, cnt, indptr, indices)
            cov = old_cov
            e = old_e
            v = old_v
        trace[t] = best_f
    return best_f, best_x


def solve_np(closed, mu, sigma2, budget, alpha,
             counts, uniforms, scan, accept_u, temps, trace):
    """Reference loop: full re-evaluation of every offspring.

    ``closed`` is the dense boolean closed-neighbourhood matrix.
    """
    n = mu.shape[0]
    steps = trace.shape[0]
    anneal = temps.shape[0] > 0
    x = np.zeros(n, dtype=bool)
    perm = np.arange(n)
    f = _penalized(0, 0.0, 0.0, budget, alpha)
    best_f = f
    best_x = x.copy()
    trace[0] = best_f
    u_pos = 0
    for t in range(1, steps):
        if scan:
            flips = np.array([(t - 1) % n])
        else:
            k = int(counts[t - 1])
            for j in range(k):
                r = min(j + int(uniforms[u_pos] * (n - j)), n - 1)
                u_pos += 1
                perm[j], perm[r] = perm[r], perm[j]
            flips = perm[:k].copy()
        y = x.copy()
        y[flips] ^= True
        cov = int(np.count_nonzero(closed[y].any(axis=0)))
        fy = _penalized(cov, float(mu[y].sum()), float(sigma2[y].sum()), budget, alpha)
        if anneal:
            delta = fy - f
            accept = delta >= 0.0 or accept_u[t - 1] < math.exp(delta / temps[t - 1])
        else:
            accept = fy >= f
        if accept:
            x, f = y, fy
            if f > best_f:
                best_f = f
                best_x = x.copy()
        trace[t] = best_f
    return best_f, best_x.astype(np.uint8)


if USE_NUMBA:
    coverage_kernel = coverage_nb
else:
    coverage_kernel = coverage_np
