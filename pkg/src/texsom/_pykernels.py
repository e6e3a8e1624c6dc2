"""Pure numpy versions of the compiled kernels.

Operation order mirrors ``_kernels.pyx`` exactly: distances accumulate one
dimension at a time and updates are ``w + coef * (x - w)``, so the two
backends agree bit for bit.
"""

import numpy as np


def glcm_counts(q, levels, dr, dc):
    h, w = q.shape
    a = q[max(0, -dr):min(h, h - dr), max(0, -dc):min(w, w - dc)]
    b = q[max(0, dr):min(h, h + dr), max(0, dc):min(w, w + dc)]
    flat = a.ravel() * levels + b.ravel()
    return np.bincount(flat, minlength=levels * levels).reshape(levels, levels).astype(np.int64)


def _sq_dists(W, x):
    d = np.zeros(W.shape[0])
    for k in range(W.shape[1]):
        diff = W[:, k] - x[k]
        d = d + diff * diff
    return d


def bmu(W, x):
    d = _sq_dists(W, x)
    b = int(np.argmin(d))
    return b, float(d[b])


def _pull(W, x, idx, coef):
    rows = W[idx]
    W[idx] = rows + coef[:, None] * (x - rows)


def som_step(W, x, H, cutoff, eta):
    b, _ = bmu(W, x)
    hrow = H[b]
    idx = np.flatnonzero(hrow >= cutoff)
    _pull(W, x, idx, eta * hrow[idx])
    return b, len(idx)


def som_epoch(W, X, order, H, cutoff, eta):
    total = 0
    for k in order:
        total += som_step(W, X[k], H, cutoff, eta)[1]
    return total


def _targets(wcc, b, c, match_bmu):
    if match_bmu:
        row = wcc[b]
        top = row.max()
        if top > 0:
            return np.flatnonzero(row == top)
    return np.array([c])


def isom_step(W, wcc, x, c, H, cutoff, eta, match_bmu, inc_selected):
    b, _ = bmu(W, x)
    hrow = H[b]
    cand = np.flatnonzero(hrow >= cutoff)
    cand = cand[cand != b]
    target = _targets(wcc, b, c, match_bmu)
    rows = wcc[cand]
    top = rows.max(axis=1, keepdims=True)
    sel = cand[(rows[:, target] == top).any(axis=1)]
    idx = np.concatenate(([b], sel))
    _pull(W, x, idx, eta * hrow[idx])
    wcc[b, c] += 1
    if inc_selected:
        wcc[sel, c] += 1
    return b, sel


def isom_epoch(W, wcc, X, y, order, H, cutoff, eta, match_bmu, inc_selected):
    updates = increments = 0
    for k in order:
        _, sel = isom_step(W, wcc, X[k], int(y[k]), H, cutoff, eta, match_bmu, inc_selected)
        updates += 1 + len(sel)
        increments += 1 + (len(sel) if inc_selected else 0)
    return updates, increments
