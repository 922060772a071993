"""Pure-Python reference kernels (mirrored by the compiled extension).

Both implementations must follow identical candidate orderings and
rounding conventions so results agree across builds.
"""

import numpy as np

IMPLEMENTATION = "pure"


def _round_away(v: float) -> float:
    # round half away from zero
    return np.floor(abs(v) + 0.5) * (1.0 if v >= 0 else -1.0)


def round_gaussian(z: complex) -> complex:
    """Round real and imaginary parts to nearest integers, ties away
    from zero."""
    return complex(_round_away(z.real), _round_away(z.imag))


def clll_kernel(q: np.ndarray, r: np.ndarray, t: np.ndarray,
                delta: float, max_iters: int) -> int:
    """In-place complex LLL reduction of QR factors.

    q: m x n with orthonormal columns, r: n x n upper triangular with
    real nonnegative diagonal, t: n x n identity on entry. Returns the
    number of while-loop iterations, or -1 if max_iters was exceeded
    (factors left in their partial state).
    """
    n = r.shape[0]
    k = 1
    iters = 0
    while k < n:
        iters += 1
        if iters > max_iters:
            return -1
        for i in range(k - 1, -1, -1):
            u = round_gaussian(r[i, k] / r[i, i])
            if u != 0:
                r[: i + 1, k] -= u * r[: i + 1, i]
                t[:, k] -= u * t[:, i]
        if delta * abs(r[k - 1, k - 1]) ** 2 \
                > abs(r[k, k]) ** 2 + abs(r[k - 1, k]) ** 2:
            r[:, [k - 1, k]] = r[:, [k, k - 1]]
            t[:, [k - 1, k]] = t[:, [k, k - 1]]
            a = r[k - 1, k - 1]
            b = r[k, k - 1]
            nrm = np.hypot(abs(a), abs(b))
            al = a / nrm
            be = b / nrm
            # rotation [[al*, be], [-be, al]]; be stays real because the
            # swapped-in subdiagonal entry is a previous (real) diagonal
            row_hi = al.conjugate() * r[k - 1, k - 1:] + be * r[k, k - 1:]
            row_lo = -be * r[k - 1, k - 1:] + al * r[k, k - 1:]
            r[k - 1, k - 1:] = row_hi
            r[k, k - 1:] = row_lo
            r[k, k - 1] = 0.0
            col_hi = q[:, k - 1] * al + q[:, k] * np.conj(be)
            col_lo = -q[:, k - 1] * np.conj(be) + q[:, k] * np.conj(al)
            q[:, k - 1] = col_hi
            q[:, k] = col_lo
            k = max(k - 1, 1)
        else:
            k += 1
    return iters


def sphere_search(r: np.ndarray, y: np.ndarray, re_levels: np.ndarray,
                  im_levels: np.ndarray):
    """Depth-first sphere search on upper-triangular factors.

    Schnorr-Euchner child ordering (distance ascending, candidate index
    breaking ties), infinite initial radius, radius shrink at each leaf.
    Returns (index vector, nodes visited); index i_c encodes the point
    re_levels[i_c // len(im_levels)] + 1j*im_levels[i_c % len(im_levels)],
    which is lexicographic (real, imag) order for ascending level arrays.
    Ties between equal-distance leaves resolve to the lexicographically
    smallest index vector, matching exhaustive first-minimum enumeration.
    """
    n = r.shape[0]
    n_im = len(im_levels)
    cand = (np.asarray(re_levels, dtype=float)[:, None]
            + 1j * np.asarray(im_levels, dtype=float)[None, :]).ravel()
    m_cand = cand.size

    order = np.zeros((n, m_cand), dtype=np.int64)
    dist = np.zeros((n, m_cand), dtype=float)
    pos = np.zeros(n, dtype=np.int64)
    pd = np.zeros(n, dtype=float)
    chosen = np.zeros(n, dtype=np.int64)
    best_idx = np.zeros(n, dtype=np.int64)
    best = np.inf
    nodes = 0

    def enter_layer(k: int, parent_dist: float):
        resid = y[k] - r[k, k + 1:] @ cand[chosen[k + 1:]]
        d = np.abs(resid - r[k, k] * cand) ** 2
        dist[k] = d
        order[k] = np.lexsort((np.arange(m_cand), d))
        pos[k] = 0
        pd[k] = parent_dist

    k = n - 1
    enter_layer(k, 0.0)
    while True:
        if pos[k] >= m_cand:
            k += 1
            if k >= n:
                break
            continue
        c = order[k, pos[k]]
        pos[k] += 1
        d = pd[k] + dist[k, c]
        if d > best:
            # children are distance-sorted: the rest fail too
            k += 1
            if k >= n:
                break
            continue
        nodes += 1
        chosen[k] = c
        if k == 0:
            if d < best:
                best = d
                best_idx[:] = chosen
            elif d == best:
                for i in range(n):
                    if chosen[i] != best_idx[i]:
                        if chosen[i] < best_idx[i]:
                            best_idx[:] = chosen
                        break
        else:
            k -= 1
            enter_layer(k, d)
    return best_idx.copy(), nodes
