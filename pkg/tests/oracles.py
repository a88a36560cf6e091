"""Independent reference implementations used only by the tests.

Nothing here imports the package's numerical code paths.
"""

import itertools

import numpy as np


def embed_by_hand(values, d, lag):
    values = list(values)
    rows = []
    for n in range((d - 1) * lag, len(values)):
        rows.append([values[n - i * lag] for i in range(d)])
    return np.array(rows, dtype=float)


def fnn_fraction_bruteforce(values, d, lag=1, r_tol=15.0, a_tol=2.0):
    values = np.asarray(values, dtype=float)
    pts = embed_by_hand(values, d + 1, lag)
    inner, extra = pts[:, :d], pts[:, d]
    spread = values.std()
    false = 0
    for i in range(len(pts)):
        dist = np.sqrt(((inner - inner[i]) ** 2).sum(axis=1))
        dist[i] = np.inf
        j = int(np.argmin(dist))
        rd = dist[j]
        gap = abs(extra[i] - extra[j])
        if rd > 0:
            ratio = gap / rd
        else:
            ratio = np.inf if gap > 0 else 0.0
        r_next = np.sqrt(rd**2 + gap**2)
        if ratio > r_tol or (spread > 0 and r_next / spread > a_tol):
            false += 1
    return false / len(pts)


def fnn_dimension_bruteforce(values, d_max, lag=1, r_tol=15.0, a_tol=2.0, threshold=0.01):
    for d in range(1, d_max):
        if fnn_fraction_bruteforce(values, d, lag, r_tol, a_tol) < threshold:
            return d, False
    return d_max, True


def nondecreasing_tuples(d, k):
    """All non-decreasing k-tuples over 1..d, by filtering the full product."""
    return [t for t in itertools.product(range(1, d + 1), repeat=k) if list(t) == sorted(t)]


def gram_triple_loop(w):
    m, n = len(w), len(w[0])
    g = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(m):
                s += w[k][i] * w[k][j]
            g[i][j] = s
    return np.array(g)


def min_norm_solution_dense(w, y, rcond):
    """Minimum-norm least squares from a full (not economy) SVD."""
    u, s, vt = np.linalg.svd(w, full_matrices=True)
    cut = rcond * s[0]
    x = np.zeros(w.shape[1])
    for i, sv in enumerate(s):
        if sv > cut:
            x += (u[:, i] @ y) / sv * vt[i]
    return x


def central_diff(f, x, k, h):
    xp, xm = x.copy(), x.copy()
    xp[k] += h
    xm[k] -= h
    return (f(xp) - f(xm)) / (2 * h)


def second_central_diff(f, x, k, h):
    xp, xm = x.copy(), x.copy()
    xp[k] += h
    xm[k] -= h
    return (f(xp) - 2 * f(x) + f(xm)) / h**2
