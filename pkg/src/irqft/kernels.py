"""Hot inner loops, each with a numba version and a vectorized numpy version.

The public names at the bottom of the module are bound to one implementation
according to :data:`irqft._backend.USE_NUMBA`.  Both implementations are kept
importable (``*_numba`` / ``*_numpy``) so that tests and the benchmark can
compare them directly.
"""

import numpy as np

from ._backend import USE_NUMBA, njit

# --------------------------------------------------------------------------
# sup-norm distance to a coordinate-aligned ("box type") cone
# kinds: 0 = free axis, 1 = x >= 0, -1 = x <= 0, 2 = x == 0


def _box_distance_loops(points, kinds):
    n, k = points.shape
    out = np.zeros(n)
    for i in range(n):
        best = 0.0
        for a in range(k):
            x = points[i, a]
            kd = kinds[a]
            if kd == 1:
                v = -x if x < 0.0 else 0.0
            elif kd == -1:
                v = x if x > 0.0 else 0.0
            elif kd == 2:
                v = abs(x)
            else:
                v = 0.0
            if v > best:
                best = v
        out[i] = best
    return out


def box_distance_numpy(points, kinds):
    points = np.asarray(points, dtype=float)
    kinds = np.asarray(kinds)
    per = np.zeros_like(points)
    per = np.where(kinds == 1, np.maximum(-points, 0.0), per)
    per = np.where(kinds == -1, np.maximum(points, 0.0), per)
    per = np.where(kinds == 2, np.abs(points), per)
    if per.shape[1] == 0:
        return np.zeros(points.shape[0])
    return per.max(axis=1)


box_distance_numba = njit(cache=True)(_box_distance_loops)

# --------------------------------------------------------------------------
# complex multivariate polynomial evaluation: sum_m c_m prod_a w_a^e_ma


def _poly_eval_loops(exps, coefs, W):
    n, k = W.shape
    m = exps.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        acc = 0j
        for t in range(m):
            term = coefs[t]
            for a in range(k):
                w = W[i, a]
                for _ in range(exps[t, a]):
                    term = term * w
            acc += term
        out[i] = acc
    return out


def poly_eval_numpy(exps, coefs, W):
    W = np.asarray(W, dtype=complex)
    if exps.shape[0] == 0:
        return np.zeros(W.shape[0], dtype=complex)
    out = np.empty(W.shape[0], dtype=complex)
    step = max(1, 200_000 // max(1, exps.size))
    for s in range(0, W.shape[0], step):
        blk = W[s : s + step]
        mon = np.prod(blk[:, None, :] ** exps[None, :, :], axis=2)
        out[s : s + step] = mon @ coefs
    return out


poly_eval_numba = njit(cache=True)(_poly_eval_loops)

# --------------------------------------------------------------------------
# brute-force perfect matchings of labelled legs, no intra-vertex pairs.
# counts[code(K)] accumulates the number of matchings producing K, where
# code(K) = sum_s K_s * base**s over the pair slots s.


def _matching_counts_loops(owner, slot, n_slots, base):
    L = owner.shape[0]
    size = 1
    for _ in range(n_slots):
        size *= base
    counts = np.zeros(size, dtype=np.int64)
    if L == 0:
        counts[0] = 1
        return counts
    if L % 2 == 1:
        return counts
    half = L // 2
    powers = np.ones(n_slots, dtype=np.int64)
    for s in range(1, n_slots):
        powers[s] = powers[s - 1] * base
    used = np.zeros(L, dtype=np.bool_)
    firsts = np.zeros(half, dtype=np.int64)
    cands = np.zeros(half, dtype=np.int64)
    code = 0
    level = 0
    used[0] = True
    firsts[0] = 0
    cands[0] = 1
    while level >= 0:
        f = firsts[level]
        j = cands[level]
        while j < L and (used[j] or owner[j] == owner[f]):
            j += 1
        if j >= L:
            used[f] = False
            level -= 1
            if level >= 0:
                f2 = firsts[level]
                j2 = cands[level] - 1
                used[j2] = False
                code -= powers[slot[owner[f2], owner[j2]]]
            continue
        used[j] = True
        code += powers[slot[owner[f], owner[j]]]
        cands[level] = j + 1
        if level == half - 1:
            counts[code] += 1
            used[j] = False
            code -= powers[slot[owner[f], owner[j]]]
            continue
        nf = 0
        while used[nf]:
            nf += 1
        used[nf] = True
        level += 1
        firsts[level] = nf
        cands[level] = nf + 1
    return counts


matching_counts_numba = njit(cache=True)(_matching_counts_loops)
# The enumeration is inherently sequential; the fallback runs the same loop
# in the interpreter.
matching_counts_numpy = _matching_counts_loops

# --------------------------------------------------------------------------
# for each direction e: min over pair differences of |<e, delta>|


def _maxmin_loops(dirs, deltas):
    m = dirs.shape[0]
    p, d = deltas.shape
    out = np.empty(m)
    for i in range(m):
        best = np.inf
        for s in range(p):
            acc = 0.0
            for a in range(d):
                acc += dirs[i, a] * deltas[s, a]
            acc = abs(acc)
            if acc < best:
                best = acc
        out[i] = best
    return out


def min_projection_numpy(dirs, deltas):
    return np.abs(np.asarray(dirs) @ np.asarray(deltas).T).min(axis=1)


min_projection_numba = njit(cache=True)(_maxmin_loops)

# --------------------------------------------------------------------------
# exponential sums out[i] = sum_j g_j exp(sum_a c_a P_ia X_ja)


def _exp_sum_loops(P, X, c, g):
    n, k = P.shape
    m = X.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        acc = 0j
        for j in range(m):
            z = 0j
            for a in range(k):
                z += c[a] * P[i, a] * X[j, a]
            acc += g[j] * np.exp(z)
        out[i] = acc
    return out


def exp_sum_numpy(P, X, c, g):
    P = np.asarray(P, dtype=float)
    X = np.asarray(X, dtype=float)
    out = np.empty(P.shape[0], dtype=complex)
    step = max(1, 4_000_000 // max(1, X.shape[0]))
    Xc = (X * c[None, :]).T
    for s in range(0, P.shape[0], step):
        out[s : s + step] = np.exp(P[s : s + step] @ Xc) @ g
    return out


exp_sum_numba = njit(cache=True)(_exp_sum_loops)

# --------------------------------------------------------------------------

IMPLEMENTATIONS = {
    "box_distance": (box_distance_numba, box_distance_numpy),
    "poly_eval": (poly_eval_numba, poly_eval_numpy),
    "matching_counts": (matching_counts_numba, matching_counts_numpy),
    "min_projection": (min_projection_numba, min_projection_numpy),
    "exp_sum": (exp_sum_numba, exp_sum_numpy),
}

_pick = 0 if USE_NUMBA else 1


def _contig(a, dtype):
    return np.ascontiguousarray(a, dtype=dtype)


def box_distance(points, kinds):
    fn = IMPLEMENTATIONS["box_distance"][_pick]
    return fn(_contig(points, np.float64), _contig(kinds, np.int64))


def poly_eval(exps, coefs, W):
    fn = IMPLEMENTATIONS["poly_eval"][_pick]
    return fn(_contig(exps, np.int64), _contig(coefs, np.complex128), _contig(W, np.complex128))


def matching_counts(owner, slot, n_slots, base):
    fn = IMPLEMENTATIONS["matching_counts"][_pick]
    return fn(_contig(owner, np.int64), _contig(slot, np.int64), int(n_slots), int(base))


def min_projection(dirs, deltas):
    fn = IMPLEMENTATIONS["min_projection"][_pick]
    return fn(_contig(dirs, np.float64), _contig(deltas, np.float64))


def exp_sum(P, X, c, g):
    fn = IMPLEMENTATIONS["exp_sum"][_pick]
    return fn(
        _contig(P, np.float64),
        _contig(X, np.float64),
        _contig(c, np.complex128),
        _contig(g, np.complex128),
    )
