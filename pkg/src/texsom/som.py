"""Classical Kohonen self-organizing map used as the baseline classifier."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._backend import kernels
from .errors import InvalidParameterError, UntrainedModelError

UNLABELED = -1


@dataclass
class TrainConfig:
    """Training schedule shared by the classical and class-constrained maps.

    Both the learning rate and the neighbourhood width decay once per epoch:
    ``eta(t) = eta0 * exp(-t / epochs)`` and ``sigma(t) = radius0 * exp(-t / epochs)``.
    ``radius0=None`` means half the longer side of the map.
    """

    epochs: int = 100
    eta0: float = 0.5
    radius0: Optional[float] = None
    seed: int = 0
    shuffle: bool = True
    cutoff: float = 1e-3
    # class-constrained map only
    match_rule: str = "instance"
    increment_rule: str = "bmu_only"
    reset_wcc_each_epoch: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidParameterError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.eta0 <= 1.0:
            raise InvalidParameterError(f"eta0 must be in (0, 1], got {self.eta0}")
        if self.radius0 is not None and not self.radius0 > 0:
            raise InvalidParameterError(f"radius0 must be > 0, got {self.radius0}")
        if not 0.0 < self.cutoff < 1.0:
            raise InvalidParameterError(f"cutoff must be in (0, 1), got {self.cutoff}")
        if self.match_rule not in ("instance", "bmu"):
            raise InvalidParameterError(f"match_rule must be 'instance' or 'bmu', got {self.match_rule!r}")
        if self.increment_rule not in ("selected", "bmu_only"):
            raise InvalidParameterError(
                f"increment_rule must be 'selected' or 'bmu_only', got {self.increment_rule!r}"
            )

    def radius_for(self, rows, cols):
        return self.radius0 if self.radius0 is not None else max(rows, cols) / 2.0


@dataclass
class UpdateStats:
    """Work done by a training run.

    ``weight_updates`` counts node-weight update events (one per node moved
    per presented instance); ``per_epoch`` holds ``(updates, increments)``.
    """

    weight_updates: int = 0
    counter_increments: int = 0
    per_epoch: list = field(default_factory=list)

    def add_epoch(self, updates, increments=0):
        self.weight_updates += int(updates)
        self.counter_increments += int(increments)
        self.per_epoch.append((int(updates), int(increments)))


class SomGrid:
    """Rectangular lattice of weight vectors; node ``i`` sits at ``divmod(i, cols)``."""

    kind = "som"

    def __init__(self, rows, cols, weights):
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        if rows < 1 or cols < 1:
            raise InvalidParameterError("map must have at least one row and column")
        if weights.ndim != 2 or weights.shape[0] != rows * cols or weights.shape[1] < 1:
            raise InvalidParameterError(
                f"weights of shape {weights.shape} do not fit a {rows}x{cols} map"
            )
        self.rows = rows
        self.cols = cols
        self.weights = weights

    @property
    def n_nodes(self):
        return self.rows * self.cols

    @property
    def dim(self):
        return self.weights.shape[1]

    @property
    def locations(self):
        idx = np.arange(self.n_nodes)
        return np.stack([idx // self.cols, idx % self.cols], axis=1)

    def lattice_sq_dists(self):
        loc = self.locations.astype(float)
        diff = loc[:, None, :] - loc[None, :, :]
        return (diff ** 2).sum(axis=2)

    def copy(self):
        return SomGrid(self.rows, self.cols, self.weights.copy())


def init_grid(rows, cols, dim, seed=0):
    """Map with weights drawn i.i.d. uniform on [0, 1]."""
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    return SomGrid(rows, cols, rng.uniform(0.0, 1.0, size=(rows * cols, dim)))


def _as_vector(x, dim):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) != dim:
        raise InvalidParameterError(f"input has dim {x.shape}, map expects {dim}")
    return x


def _as_matrix(X, dim):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise InvalidParameterError("training data must be a non-empty 2-D array")
    if X.shape[1] != dim:
        raise InvalidParameterError(f"data has dim {X.shape[1]}, map expects {dim}")
    return X


def find_bmu(grid, x):
    """Index of the node nearest to ``x`` (lowest index on ties)."""
    return kernels.bmu(grid.weights, _as_vector(x, grid.dim))[0]


def sigma_at(t, epochs, radius0):
    return radius0 * math.exp(-t / epochs)


def learning_rate(t, cfg):
    return cfg.eta0 * math.exp(-t / cfg.epochs)


def neighborhood(bmu_loc, node_loc, t, cfg, radius0=None):
    """Gaussian lattice kernel ``exp(-d^2 / (2 sigma(t)^2))``."""
    if radius0 is None:
        if cfg.radius0 is None:
            raise InvalidParameterError("radius0 must be given when cfg.radius0 is None")
        radius0 = cfg.radius0
    d2 = float((bmu_loc[0] - node_loc[0]) ** 2 + (bmu_loc[1] - node_loc[1]) ** 2)
    s = sigma_at(t, cfg.epochs, radius0)
    return math.exp(-d2 / (2.0 * s * s))


def kernel_matrix(sq_dists, sigma):
    """Neighbourhood weights between every pair of nodes for one epoch."""
    return np.ascontiguousarray(np.exp(-sq_dists / (2.0 * sigma * sigma)))


def update_weight(w, x, eta, h):
    w = np.asarray(w, dtype=float)
    return w + (eta * h) * (np.asarray(x, dtype=float) - w)


def epoch_schedule(grid, cfg, n):
    """Yield ``(t, eta, H, order)`` for each epoch; the order rng is seeded by ``cfg.seed``."""
    rng = np.random.default_rng(cfg.seed)
    sq = grid.lattice_sq_dists()
    radius0 = cfg.radius_for(grid.rows, grid.cols)
    for t in range(cfg.epochs):
        H = kernel_matrix(sq, sigma_at(t, cfg.epochs, radius0))
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        yield t, learning_rate(t, cfg), H, np.ascontiguousarray(order, dtype=np.int64)


def train_som(grid, X, cfg, on_epoch=None):
    """Unsupervised training in place. Returns the :class:`UpdateStats`.

    ``on_epoch(t, grid)`` is called after every epoch.
    """
    X = _as_matrix(X, grid.dim)
    stats = UpdateStats()
    for t, eta, H, order in epoch_schedule(grid, cfg, len(X)):
        stats.add_epoch(kernels.som_epoch(grid.weights, X, order, H, cfg.cutoff, eta))
        if on_epoch is not None:
            on_epoch(t, grid)
    return stats


def bmu_indices(grid, X):
    X = _as_matrix(X, grid.dim)
    return np.array([kernels.bmu(grid.weights, x)[0] for x in X], dtype=np.int64)


def quantization_error(grid, X):
    """Mean Euclidean distance from each input to its BMU weights."""
    X = _as_matrix(X, grid.dim)
    dists = [math.sqrt(kernels.bmu(grid.weights, x)[1]) for x in X]
    return float(np.mean(dists))


def label_nodes(grid, X, y, n_classes=None):
    """Majority training class per node, ``UNLABELED`` for nodes never hit."""
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    votes = np.zeros((grid.n_nodes, n_classes), dtype=np.int64)
    np.add.at(votes, (bmu_indices(grid, X), y), 1)
    labels = np.argmax(votes, axis=1)
    labels[votes.sum(axis=1) == 0] = UNLABELED
    return labels


def _nearest_among(grid, x, candidates):
    W = grid.weights[candidates]
    return candidates[kernels.bmu(np.ascontiguousarray(W), x)[0]]


def predict_som(grid, labeling, x):
    """Label of the BMU, or of the nearest labeled node when the BMU has none."""
    x = _as_vector(x, grid.dim)
    labeling = np.asarray(labeling)
    b = kernels.bmu(grid.weights, x)[0]
    if labeling[b] != UNLABELED:
        return int(labeling[b])
    labeled = np.flatnonzero(labeling != UNLABELED)
    if len(labeled) == 0:
        raise UntrainedModelError("no node carries a label")
    return int(labeling[_nearest_among(grid, x, labeled)])


def topology_gap(grid, rng=None, n_pairs=2000):
    """(mean weight distance of lattice neighbours, mean over random node pairs)."""
    rng = np.random.default_rng(rng)
    W = grid.weights
    loc = grid.locations
    adj = []
    for i in range(grid.n_nodes):
        r, c = loc[i]
        if c + 1 < grid.cols:
            adj.append((i, i + 1))
        if r + 1 < grid.rows:
            adj.append((i, i + grid.cols))
    adj = np.array(adj)
    near = np.linalg.norm(W[adj[:, 0]] - W[adj[:, 1]], axis=1).mean()
    a = rng.integers(grid.n_nodes, size=n_pairs)
    b = rng.integers(grid.n_nodes, size=n_pairs)
    keep = a != b
    far = np.linalg.norm(W[a[keep]] - W[b[keep]], axis=1).mean()
    return float(near), float(far)


class SomClassifier:
    """Classical map trained without labels, nodes labeled afterwards by majority."""

    kind = "som"

    def __init__(self, rows=10, cols=10, cfg=None):
        self.rows = rows
        self.cols = cols
        self.cfg = cfg if cfg is not None else TrainConfig()
        self.grid = None
        self.labeling = None
        self.n_classes = None
        self.update_stats = None

    def fit(self, X, y, on_epoch=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        self.n_classes = max(int(y.max()) + 1, 2)
        self.grid = init_grid(self.rows, self.cols, X.shape[1], self.cfg.seed)
        self.update_stats = train_som(self.grid, X, self.cfg, on_epoch)
        self.labeling = label_nodes(self.grid, X, y, self.n_classes)
        return self

    def predict(self, X):
        return np.array([predict_som(self.grid, self.labeling, x) for x in np.asarray(X, dtype=float)])
