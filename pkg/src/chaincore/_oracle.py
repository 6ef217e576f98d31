"""Compiled full-grid enumeration used by the brute-force oracle.

Written as plain scalar loops, separate from the vectorised objective in
``optimizer`` so the two can check each other. Knot tables are flat arrays
with per-function offsets: function ``f`` occupies
``xs[off[f]:off[f + 1]]``.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _pl(xs, ys, lo, hi, q):
    if q >= xs[hi - 1]:
        return ys[hi - 1]
    k = lo
    while xs[k + 1] < q:
        k += 1
    return ys[k] + (ys[k + 1] - ys[k]) * ((q - xs[k]) / (xs[k + 1] - xs[k]))


@njit(cache=True)
def grid_max(axes, nr, m, pxs, pys, poff, wxs, wys, woff, cxs, cys, in_s, qstar):
    """Maximum of the coalition objective over the Cartesian grid ``axes``.

    Returns (best value, flat row-major index of the first maximiser).
    Points whose row sums exceed ``qstar`` are skipped. The last coordinate
    is swept in an inner loop with every other term held fixed.
    """
    d = nr * m
    res = axes.shape[1]
    nc = cxs.shape[0]
    last_row = nr - 1
    last_col = m - 1
    last_in_s = in_s[last_col]
    idx = np.zeros(d, np.int64)
    q = np.empty(d)
    for k in range(d):
        q[k] = axes[k, 0]
    any_s = False
    for j in range(m):
        if in_s[j]:
            any_s = True

    best = -np.inf
    best_t = -1
    t = 0
    while True:
        # fixed part: everything except the last coordinate
        feasible = True
        base = 0.0
        for i in range(last_row):
            x = 0.0
            for j in range(m):
                x += q[i * m + j]
            if x > qstar[i]:
                feasible = False
            base += _pl(pxs, pys, poff[i], poff[i + 1], x) * x
        xr = 0.0
        for j in range(last_col):
            xr += q[last_row * m + j]
        shared = 0.0
        for j in range(last_col):
            y = 0.0
            for i in range(nr):
                y += q[i * m + j]
            if in_s[j]:
                shared += y
            else:
                base -= _pl(wxs, wys, woff[j], woff[j + 1], y) * y
        ycol = 0.0
        for i in range(last_row):
            ycol += q[i * m + last_col]

        if feasible:
            qs = qstar[last_row]
            lo, hi = poff[last_row], poff[last_row + 1]
            wlo, whi = woff[last_col], woff[last_col + 1]
            for a in range(res):
                z = axes[d - 1, a]
                x = xr + z
                if x > qs:
                    continue
                total = base + _pl(pxs, pys, lo, hi, x) * x
                y = ycol + z
                if last_in_s:
                    ys = shared + y
                    total -= _pl(cxs, cys, 0, nc, ys) * ys
                else:
                    total -= _pl(wxs, wys, wlo, whi, y) * y
                    if any_s:
                        total -= _pl(cxs, cys, 0, nc, shared) * shared
                if total > best:
                    best = total
                    best_t = t + a

        # advance the odometer over the first d - 1 coordinates
        t += res
        k = d - 2
        while k >= 0:
            idx[k] += 1
            if idx[k] < res:
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            break
        for kk in range(k, d - 1):
            q[kk] = axes[kk, idx[kk]]
    return best, best_t
