"""Hot loops: pairwise L1 distances and the QT candidate search.

Each kernel exists twice, a numba ``@njit`` version and a numpy/Python
version with identical semantics.  The numba path is used when numba
imports and ``ROUTINEMAP_DISABLE_NUMBA`` is not set to a truthy value.
``benchmarks/bench_kernels.py`` times both.
"""

from __future__ import annotations

import os

import numpy as np

GROWTH_EXACT = 0
GROWTH_GREEDY = 1

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    nb = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ROUTINEMAP_DISABLE_NUMBA", "").strip().lower() not in (
    "1",
    "true",
    "yes",
    "on",
)


# ---------------------------------------------------------------- numpy path


def pairwise_l1_numpy(X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    D = np.zeros((n, n))
    if X.shape[1] == 0:
        return D
    for i in range(n - 1):
        # cumsum adds left to right like the jitted loop; .sum() would not
        d = np.cumsum(np.abs(X[i + 1 :] - X[i]), axis=1)[:, -1]
        D[i, i + 1 :] = d
        D[i + 1 :, i] = d
    return D


def _lex_less(a, b) -> bool:
    return list(a) < list(b)


def _best_clique_py(S, A, seed, avail, ordered):
    """Largest threshold clique containing ``seed`` among ``avail`` nodes;
    ties prefer the higher minimum pairwise similarity, then the
    lexicographically smallest sorted member list."""
    best = {"size": 0, "min": -1.0, "members": ()}
    cand0 = [j for j in ordered if avail[j] and j != seed and A[seed, j]]

    def consider(members, m):
        size = len(members)
        key = tuple(sorted(members))
        if (
            size > best["size"]
            or (size == best["size"] and m > best["min"])
            or (size == best["size"] and m == best["min"] and _lex_less(key, best["members"]))
        ):
            best.update(size=size, min=m, members=key)

    def expand(members, m, cand):
        consider(members, m)
        for i, v in enumerate(cand):
            rest = cand[i + 1 :]
            if len(members) + 1 + len(rest) < best["size"]:
                return
            nxt = [w for w in rest if A[v, w]]
            if len(members) + 1 + len(nxt) < best["size"]:
                continue
            m2 = min(m, min(S[u, v] for u in members))
            expand(members + [v], m2, nxt)

    expand([seed], 1.0, cand0)
    return np.array(best["members"], dtype=np.int64)


def _greedy_grow_py(S, threshold, seed, avail):
    n = S.shape[0]
    members = [seed]
    open_ = avail.copy()
    open_[seed] = False
    minsim = S[seed].copy()
    while True:
        ok = open_ & (minsim >= threshold)
        if not ok.any():
            break
        idx = np.flatnonzero(ok)
        j = int(idx[np.argmax(minsim[idx])])  # argmax returns the first maximum
        members.append(j)
        open_[j] = False
        minsim = np.minimum(minsim, S[j])
    return np.array(sorted(members), dtype=np.int64)


def qt_labels_numpy(S: np.ndarray, threshold: float, growth: int = GROWTH_EXACT) -> np.ndarray:
    S = np.ascontiguousarray(S, dtype=np.float64)
    n = S.shape[0]
    A = S >= threshold
    labels = np.full(n, -1, dtype=np.int64)
    avail = np.ones(n, dtype=bool)
    ordered = list(range(n))
    k = 0
    while avail.any():
        best = None
        deg = (A & avail[None, :] & avail[:, None]).sum(axis=1) - 1
        for s in np.flatnonzero(avail):
            if best is not None and 1 + deg[s] <= len(best):
                continue
            if growth == GROWTH_EXACT:
                cand = _best_clique_py(S, A, int(s), avail, ordered)
            else:
                cand = _greedy_grow_py(S, threshold, int(s), avail)
            if best is None or len(cand) > len(best):
                best = cand
        labels[best] = k
        avail[best] = False
        k += 1
    return labels


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:
    _jit = nb.njit(cache=True, nogil=True)

    @_jit
    def pairwise_l1_numba(X):
        n, m = X.shape
        D = np.zeros((n, n))
        for i in range(n - 1):
            for j in range(i + 1, n):
                s = 0.0
                for k in range(m):
                    s += abs(X[j, k] - X[i, k])
                D[i, j] = s
                D[j, i] = s
        return D

    @_jit
    def _sorted_less(a, na, b, nb_):
        # a and b are already sorted; compare as sequences
        for i in range(min(na, nb_)):
            if a[i] < b[i]:
                return True
            if a[i] > b[i]:
                return False
        return na < nb_

    @_jit
    def _best_clique_nb(S, A, seed, avail):
        n = S.shape[0]
        R = np.empty(n, np.int64)
        P = np.empty((n + 1, n), np.int64)
        plen = np.zeros(n + 1, np.int64)
        ptr = np.zeros(n + 1, np.int64)
        rmin = np.ones(n + 1)
        best = np.empty(n, np.int64)
        sorted_r = np.empty(n, np.int64)
        best_size = 0
        best_min = -1.0

        R[0] = seed
        cnt = 0
        for j in range(n):
            if avail[j] and j != seed and A[seed, j]:
                P[1, cnt] = j
                cnt += 1
        plen[1] = cnt
        level = 1

        # record the singleton
        best[0] = seed
        best_size = 1
        best_min = 1.0

        while level >= 1:
            if ptr[level] >= plen[level]:
                level -= 1
                continue
            v = P[level, ptr[level]]
            ptr[level] += 1
            rest = plen[level] - ptr[level]
            if level + 1 + rest < best_size:
                ptr[level] = plen[level]
                continue
            cnt = 0
            for idx in range(ptr[level], plen[level]):
                w = P[level, idx]
                if A[v, w]:
                    P[level + 1, cnt] = w
                    cnt += 1
            if level + 1 + cnt < best_size:
                continue
            m = rmin[level]
            for u in range(level):
                if S[R[u], v] < m:
                    m = S[R[u], v]
            R[level] = v
            level += 1
            plen[level] = cnt
            ptr[level] = 0
            rmin[level] = m

            # consider R[:level]; R[1:] is ascending, so insert the seed
            pos = 0
            placed = False
            for u in range(1, level):
                if not placed and seed < R[u]:
                    sorted_r[pos] = seed
                    pos += 1
                    placed = True
                sorted_r[pos] = R[u]
                pos += 1
            if not placed:
                sorted_r[pos] = seed
            better = False
            if level > best_size:
                better = True
            elif level == best_size:
                if m > best_min:
                    better = True
                elif m == best_min and _sorted_less(sorted_r, level, best, best_size):
                    better = True
            if better:
                best_size = level
                best_min = m
                for u in range(level):
                    best[u] = sorted_r[u]
        return best[:best_size].copy()

    @_jit
    def _greedy_grow_nb(S, threshold, seed, avail):
        n = S.shape[0]
        open_ = avail.copy()
        open_[seed] = False
        minsim = S[seed].copy()
        members = np.empty(n, np.int64)
        members[0] = seed
        size = 1
        while True:
            j = -1
            bv = -1.0
            for c in range(n):
                if open_[c] and minsim[c] >= threshold and minsim[c] > bv:
                    bv = minsim[c]
                    j = c
            if j < 0:
                break
            members[size] = j
            size += 1
            open_[j] = False
            for c in range(n):
                if S[j, c] < minsim[c]:
                    minsim[c] = S[j, c]
        return np.sort(members[:size])

    @_jit
    def qt_labels_numba(S, threshold, growth):
        n = S.shape[0]
        A = S >= threshold
        labels = np.full(n, -1, np.int64)
        avail = np.ones(n, np.bool_)
        deg = np.zeros(n, np.int64)
        k = 0
        remaining = n
        while remaining > 0:
            for i in range(n):
                d = 0
                if avail[i]:
                    for j in range(n):
                        if j != i and avail[j] and A[i, j]:
                            d += 1
                deg[i] = d
            best = np.empty(0, np.int64)
            have = False
            for s in range(n):
                if not avail[s]:
                    continue
                if have and 1 + deg[s] <= best.shape[0]:
                    continue
                if growth == 0:
                    cand = _best_clique_nb(S, A, s, avail)
                else:
                    cand = _greedy_grow_nb(S, threshold, s, avail)
                if not have or cand.shape[0] > best.shape[0]:
                    best = cand
                    have = True
            for u in best:
                labels[u] = k
                avail[u] = False
            remaining -= best.shape[0]
            k += 1
        return labels

else:  # pragma: no cover
    pairwise_l1_numba = None
    qt_labels_numba = None


def pairwise_l1(X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if USE_NUMBA:
        return pairwise_l1_numba(X)
    return pairwise_l1_numpy(X)


def qt_labels(S: np.ndarray, threshold: float, growth: int = GROWTH_EXACT) -> np.ndarray:
    """Cluster index per row, in QT selection order, before any size floor."""
    S = np.ascontiguousarray(S, dtype=np.float64)
    if S.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    if USE_NUMBA:
        return qt_labels_numba(S, float(threshold), int(growth))
    return qt_labels_numpy(S, float(threshold), int(growth))
