"""Bloc-wise texture representation of a whole image.

The image is tiled into ``sn`` sub-images, each sub-image into ``m_blocs``
blocs. Every bloc yields a 4-component texture vector; the vectors of one
sub-image are grouped with k-means into ``l_clusters`` clusters, and the
sorted centroids of all sub-images are concatenated into a single
transaction of length ``sn * l_clusters * 4``.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidParameterError, InvalidPartitionError
from .glcm import GlcmConfig, as_gray_image, quantize, texture_vector

TEXTURE_DIM = 4


class Rect(NamedTuple):
    top: int
    left: int
    height: int
    width: int


@dataclass
class BlocGrid:
    sub_images: list
    blocs: list  # blocs[s] holds the Rects of sub-image s, row-major

    @property
    def sn(self):
        return len(self.sub_images)


@dataclass
class ClusterModel:
    centroids: np.ndarray
    labels: np.ndarray
    inertia_history: list
    n_iter: int

    @property
    def k(self):
        return len(self.centroids)

    @property
    def inertia(self):
        return self.inertia_history[-1]


@dataclass
class Transaction:
    values: np.ndarray
    label: Optional[int]
    source_id: str = ""

    @property
    def dim(self):
        return len(self.values)


@dataclass(frozen=True)
class PipelineConfig:
    sn: int = 6
    m_blocs: int = 8
    l_clusters: int = 3
    kmeans_seed: int = 0
    kmeans_max_iter: int = 100
    center_crop: float = 1.0
    glcm: GlcmConfig = field(default_factory=GlcmConfig)

    def __post_init__(self):
        if self.sn < 1 or self.m_blocs < 1:
            raise InvalidParameterError("sn and m_blocs must be >= 1")
        if not 1 <= self.l_clusters <= self.m_blocs:
            raise InvalidParameterError(
                f"l_clusters must be in [1, m_blocs={self.m_blocs}], got {self.l_clusters}"
            )
        if self.kmeans_max_iter < 1:
            raise InvalidParameterError("kmeans_max_iter must be >= 1")
        if not 0.0 < self.center_crop <= 1.0:
            raise InvalidParameterError("center_crop must be in (0, 1]")

    @property
    def dim(self):
        return self.sn * self.l_clusters * TEXTURE_DIM


def grid_shape(count):
    """Near-square (rows, cols) layout for ``count`` cells."""
    rows = math.isqrt(count)
    return rows, -(-count // rows)


def _split(extent, parts):
    base = extent // parts
    sizes = [base] * parts
    sizes[-1] += extent - base * parts
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    return list(zip(starts.tolist(), sizes))


def _tile(rect, count):
    # the last row holds the leftover cells when count is not rows*cols
    rows, cols = grid_shape(count)
    out = []
    for r, (top, height) in enumerate(_split(rect.height, rows)):
        ncells = cols if r < rows - 1 else count - cols * (rows - 1)
        for left, width in _split(rect.width, ncells):
            out.append(Rect(rect.top + top, rect.left + left, height, width))
    return out


def partition(shape, sn, m):
    """Tile an image of ``shape`` (height, width) into sn sub-images of m blocs."""
    if sn < 1 or m < 1:
        raise InvalidPartitionError("sn and m must be >= 1")
    height, width = shape
    subs = _tile(Rect(0, 0, height, width), sn)
    blocs = [_tile(s, m) for s in subs]
    for group in blocs:
        for b in group:
            if b.height < 2 or b.width < 2:
                raise InvalidPartitionError(
                    f"{height}x{width} image is too small for sn={sn}, m={m}: "
                    f"bloc of {b.height}x{b.width} pixels"
                )
    return BlocGrid(subs, blocs)


def bloc_features(grid, img, cfg=GlcmConfig()):
    """One (m, 4) array of texture vectors per sub-image."""
    return [
        np.array([texture_vector(img.crop(*b), cfg) for b in group])
        for group in grid.blocs
    ]


def _sq_dist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _kmeans_pp(X, k, rng):
    n = len(X)
    chosen = [int(rng.integers(n))]
    closest = _sq_dist(X, X[chosen]).min(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dist(X, X[idx:idx + 1])[:, 0])
    return X[chosen].copy()


def _update_centroids(X, labels, k, C):
    C = C.copy()
    labels = labels.copy()
    for j in range(k):
        members = labels == j
        if members.any():
            C[j] = X[members].mean(axis=0)
    for j in range(k):
        if np.any(labels == j):
            continue
        # re-seed an empty cluster with the point farthest from its centroid,
        # taken from a cluster that can spare it
        sizes = np.bincount(labels, minlength=k)
        spare = sizes[labels] > 1
        far = ((X - C[labels]) ** 2).sum(axis=1)
        far[~spare] = -1.0
        p = int(np.argmax(far))
        old = labels[p]
        labels[p] = j
        C[j] = X[p]
        C[old] = X[labels == old].mean(axis=0)
    return C, labels


def kmeans(vectors, k, seed=0, max_iter=100):
    """Lloyd's k-means with seeded k-means++ initialization.

    Stops when an assignment step reproduces the previous assignment, when the
    centroids stop moving, or after ``max_iter`` update steps.
    """
    X = np.asarray(vectors, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise InvalidParameterError("kmeans expects a non-empty 2-D array of vectors")
    if not 1 <= k <= len(X):
        raise InvalidParameterError(f"k must be in [1, {len(X)}], got {k}")
    rng = np.random.default_rng(seed)
    C = _kmeans_pp(X, k, rng)
    labels = np.argmin(_sq_dist(X, C), axis=1)
    history = [float(((X - C[labels]) ** 2).sum())]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        C_new, labels = _update_centroids(X, labels, k, C)
        new_labels = np.argmin(_sq_dist(X, C_new), axis=1)
        history.append(float(((X - C_new[new_labels]) ** 2).sum()))
        settled = np.array_equal(new_labels, labels) or np.array_equal(C_new, C)
        C, labels = C_new, new_labels
        if settled:
            break
    return ClusterModel(C, labels, history, n_iter)


def cluster_representatives(model):
    """Centroids in lexicographic order (first component first)."""
    C = model.centroids
    order = np.lexsort(C.T[::-1])
    return C[order]


def center_crop(img, fraction):
    if fraction >= 1.0:
        return img
    h, w = img.shape
    ch, cw = max(1, round(h * fraction)), max(1, round(w * fraction))
    top, left = (h - ch) // 2, (w - cw) // 2
    return img[top:top + ch, left:left + cw]


def extract_features(img, cfg=PipelineConfig()):
    """Transaction values (length sn * l_clusters * 4) for one grayscale image."""
    gray = center_crop(as_gray_image(img), cfg.center_crop)
    grid = partition(gray.shape, cfg.sn, cfg.m_blocs)
    q = quantize(gray, cfg.glcm.levels)
    parts = []
    for s, vecs in enumerate(bloc_features(grid, q, cfg.glcm)):
        model = kmeans(vecs, cfg.l_clusters, seed=cfg.kmeans_seed + s, max_iter=cfg.kmeans_max_iter)
        parts.append(cluster_representatives(model).ravel())
    return np.concatenate(parts)


def build_transaction(img, label, cfg=PipelineConfig(), source_id=""):
    return Transaction(extract_features(img, cfg), label, source_id)


class MinMaxScaler:
    """Per-attribute min-max scaling fitted on training data only.

    Attributes that are constant in the training data map to 0. Values
    outside the training range are not clamped.
    """

    def __init__(self, data_min=None, data_max=None):
        self.data_min = None if data_min is None else np.asarray(data_min, dtype=float)
        self.data_max = None if data_max is None else np.asarray(data_max, dtype=float)

    def fit(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or len(X) == 0:
            raise InvalidParameterError("scaler needs a non-empty 2-D array")
        self.data_min = X.min(axis=0)
        self.data_max = X.max(axis=0)
        return self

    def transform(self, X):
        if self.data_min is None:
            raise InvalidParameterError("scaler is not fitted")
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != len(self.data_min):
            raise InvalidParameterError(
                f"scaler fitted on dim {len(self.data_min)}, got dim {X.shape[-1]}"
            )
        span = self.data_max - self.data_min
        live = span > 0
        out = np.zeros_like(X)
        out[..., live] = (X[..., live] - self.data_min[live]) / span[live]
        return out

    def fit_transform(self, X):
        return self.fit(X).transform(X)


def normalize_dataset(transactions):
    """Min-max scale a list of transactions; returns (scaled list, fitted scaler)."""
    if len(transactions) < 2:
        raise InvalidParameterError("normalization needs at least 2 transactions")
    X = np.array([t.values for t in transactions])
    scaler = MinMaxScaler().fit(X)
    scaled = scaler.transform(X)
    return [Transaction(v, t.label, t.source_id) for v, t in zip(scaled, transactions)], scaler
