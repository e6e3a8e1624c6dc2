"""Class-constrained self-organizing map (iSOM).

Each node carries, next to its weights, one winning-class counter per class.
When an instance of class ``c`` is presented, the BMU is found as usual, but
only neighbours whose counters currently peak at ``c`` (or that have not been
claimed at all) are pulled towards it. The BMU and the pulled neighbours then
have their class-``c`` counter incremented.
"""

import numpy as np

from ._backend import kernels
from .errors import InvalidParameterError, UntrainedModelError
from .som import SomGrid, TrainConfig, UpdateStats, _as_matrix, _as_vector, epoch_schedule, init_grid

UNCLAIMED = frozenset()


class IsomGrid(SomGrid):
    """A :class:`SomGrid` whose nodes also hold winning-class counters."""

    kind = "isom"

    def __init__(self, rows, cols, weights, wcc):
        super().__init__(rows, cols, weights)
        wcc = np.ascontiguousarray(wcc, dtype=np.int64)
        if wcc.ndim != 2 or wcc.shape[0] != self.n_nodes or wcc.shape[1] < 1:
            raise InvalidParameterError(f"counters of shape {wcc.shape} do not fit the map")
        if np.any(wcc < 0):
            raise InvalidParameterError("class counters must be non-negative")
        self.wcc = wcc

    @property
    def n_classes(self):
        return self.wcc.shape[1]

    def copy(self):
        return IsomGrid(self.rows, self.cols, self.weights.copy(), self.wcc.copy())


def init_isom_grid(rows, cols, dim, n_classes, seed=0):
    """Random weights as :func:`init_grid`, all counters zero."""
    if n_classes < 1:
        raise InvalidParameterError(f"n_classes must be >= 1, got {n_classes}")
    base = init_grid(rows, cols, dim, seed)
    return IsomGrid(rows, cols, base.weights, np.zeros((rows * cols, n_classes), dtype=np.int64))


def node_class(wcc_row):
    """Set of classes at the counter maximum; empty when the node is unclaimed.

    A single-element set is a unique claim, more than one element is a tie.
    """
    row = np.asarray(wcc_row)
    top = row.max()
    if top == 0:
        return UNCLAIMED
    return frozenset(np.flatnonzero(row == top).tolist())


def is_eligible(wcc_row, classes):
    """True when the node is unclaimed or one of ``classes`` ties its maximum."""
    row = np.asarray(wcc_row)
    return any(row[c] == row.max() for c in classes)


def match_targets(grid, bmu, c, match_rule="instance"):
    if match_rule == "bmu":
        claim = node_class(grid.wcc[bmu])
        if claim:
            return sorted(claim)
    return [c]


def eligible_neighbors(grid, bmu, H, cutoff, c, match_rule="instance"):
    """Nodes (other than the BMU) that the constrained update may move.

    ``H`` is the epoch's kernel matrix; a node is in the neighbourhood when
    ``H[bmu, i] >= cutoff``.
    """
    if not 0 <= c < grid.n_classes:
        raise InvalidParameterError(f"class {c} outside [0, {grid.n_classes})")
    targets = match_targets(grid, bmu, c, match_rule)
    return [
        i
        for i in range(grid.n_nodes)
        if i != bmu and H[bmu, i] >= cutoff and is_eligible(grid.wcc[i], targets)
    ]


def _check_labels(y, n_classes, n):
    y = np.ascontiguousarray(y, dtype=np.int64)
    if y.shape != (n,):
        raise InvalidParameterError(f"expected {n} labels, got shape {y.shape}")
    if np.any(y < 0) or np.any(y >= n_classes):
        raise InvalidParameterError(f"labels must lie in [0, {n_classes})")
    return y


def train_isom(grid, X, y, cfg, on_epoch=None, trace=None):
    """Train ``grid`` in place with the constrained update. Returns :class:`UpdateStats`.

    ``trace(t, k, bmu, selected)`` is called after every instance when given;
    that path steps through instances one at a time instead of per epoch, and
    produces exactly the same weights.
    """
    X = _as_matrix(X, grid.dim)
    y = _check_labels(y, grid.n_classes, len(X))
    match_bmu = cfg.match_rule == "bmu"
    inc_selected = cfg.increment_rule == "selected"
    stats = UpdateStats()
    for t, eta, H, order in epoch_schedule(grid, cfg, len(X)):
        if cfg.reset_wcc_each_epoch:
            grid.wcc[:] = 0
        if trace is None:
            updates, incs = kernels.isom_epoch(
                grid.weights, grid.wcc, X, y, order, H, cfg.cutoff, eta, match_bmu, inc_selected
            )
        else:
            updates = incs = 0
            for k in order:
                b, sel = kernels.isom_step(
                    grid.weights, grid.wcc, X[k], int(y[k]), H, cfg.cutoff, eta,
                    match_bmu, inc_selected,
                )
                updates += 1 + len(sel)
                incs += 1 + (len(sel) if inc_selected else 0)
                trace(t, int(k), int(b), np.asarray(sel))
        stats.add_epoch(updates, incs)
        if on_epoch is not None:
            on_epoch(t, grid)
    return stats


def _unique_claims(wcc):
    top = wcc.max(axis=1)
    n_top = (wcc == top[:, None]).sum(axis=1)
    return np.flatnonzero((top > 0) & (n_top == 1))


def predict_isom(grid, x):
    """Class of the BMU if it holds a unique claim, else of the nearest uniquely claimed node."""
    x = _as_vector(x, grid.dim)
    b = kernels.bmu(grid.weights, x)[0]
    claim = node_class(grid.wcc[b])
    if len(claim) == 1:
        return next(iter(claim))
    claimed = _unique_claims(grid.wcc)
    if len(claimed) == 0:
        raise UntrainedModelError("no node holds a unique class claim")
    W = np.ascontiguousarray(grid.weights[claimed])
    nearest = claimed[kernels.bmu(W, x)[0]]
    return int(np.argmax(grid.wcc[nearest]))


class IsomClassifier:
    kind = "isom"

    def __init__(self, rows=10, cols=10, cfg=None, n_classes=None):
        self.rows = rows
        self.cols = cols
        self.cfg = cfg if cfg is not None else TrainConfig()
        self.n_classes = n_classes
        self.grid = None
        self.update_stats = None

    def fit(self, X, y, on_epoch=None, trace=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if self.n_classes is None:
            self.n_classes = max(int(y.max()) + 1, 2)
        self.grid = init_isom_grid(self.rows, self.cols, X.shape[1], self.n_classes, self.cfg.seed)
        self.update_stats = train_isom(self.grid, X, y, self.cfg, on_epoch, trace)
        return self

    def predict(self, X):
        return np.array([predict_isom(self.grid, x) for x in np.asarray(X, dtype=float)])
