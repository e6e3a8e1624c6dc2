"""Grey-level co-occurrence matrices and the four texture statistics.

Images are 2-D numpy arrays indexed ``[row, col]``. A co-occurrence offset
``(dr, dc)`` pairs pixel ``(r, c)`` with ``(r + dr, c + dc)``.
"""

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import EmptyWindowError, InvalidParameterError

#: right, down, down-right, down-left
DEFAULT_ORIENTATIONS = ((0, 1), (1, 0), (1, 1), (1, -1))
STAT_NAMES = ("dissimilarity", "uniformity", "entropy", "contrast")


@dataclass(frozen=True)
class QuantizedImage:
    pixels: np.ndarray
    levels: int

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.int64)
        if px.ndim != 2 or px.size == 0:
            raise InvalidParameterError("quantized image must be a non-empty 2-D array")
        if self.levels < 2:
            raise InvalidParameterError(f"levels must be >= 2, got {self.levels}")
        if px.min() < 0 or px.max() >= self.levels:
            raise InvalidParameterError(f"pixel values must lie in [0, {self.levels - 1}]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    def crop(self, top, left, height, width):
        return QuantizedImage(self.pixels[top:top + height, left:left + width], self.levels)


@dataclass(frozen=True)
class GlcmConfig:
    """Co-occurrence settings.

    ``orientations`` are unit steps scaled by ``distance``. With ``normalize``
    each orientation's matrix is normalized before averaging; without it the
    raw counts of all orientations are pooled and normalized once.
    """

    levels: int = 32
    distance: int = 1
    orientations: tuple = field(default=DEFAULT_ORIENTATIONS)
    symmetric: bool = True
    normalize: bool = True

    def __post_init__(self):
        if self.levels < 2:
            raise InvalidParameterError(f"levels must be >= 2, got {self.levels}")
        if self.distance < 1:
            raise InvalidParameterError(f"distance must be >= 1, got {self.distance}")
        orients = tuple((int(dr), int(dc)) for dr, dc in self.orientations)
        if not orients or any(o == (0, 0) for o in orients):
            raise InvalidParameterError("orientations must be non-empty and non-zero")
        object.__setattr__(self, "orientations", orients)

    @property
    def offsets(self):
        return [(dr * self.distance, dc * self.distance) for dr, dc in self.orientations]


def as_gray_image(img):
    """Validate a grayscale image array (values 0..255) and return it as uint8."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidParameterError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            raise InvalidParameterError("grayscale pixels must be integers")
    if arr.min() < 0 or arr.max() > 255:
        raise InvalidParameterError("grayscale pixels must lie in [0, 255]")
    return arr.astype(np.uint8)


def quantize(img, levels):
    """Uniformly bin 8-bit intensities into ``levels`` grey levels: floor(p*G/256)."""
    if levels < 2:
        raise InvalidParameterError(f"levels must be >= 2, got {levels}")
    px = as_gray_image(img).astype(np.int64)
    return QuantizedImage((px * levels) // 256, levels)


def compute_glcm(img, offset, symmetric=True, normalize=True):
    """Co-occurrence matrix of ``img`` (a QuantizedImage) at one offset.

    Returns integer counts when ``normalize`` is false, probabilities otherwise.
    """
    dr, dc = int(offset[0]), int(offset[1])
    if abs(dr) >= img.height or abs(dc) >= img.width:
        raise EmptyWindowError(
            f"offset ({dr}, {dc}) leaves no pixel pair in a {img.height}x{img.width} window"
        )
    counts = kernels.glcm_counts(img.pixels, img.levels, dr, dc)
    if symmetric:
        counts = counts + counts.T
    if not normalize:
        return counts
    return counts / counts.sum()


def average_glcm(matrices):
    """Element-wise mean of normalized co-occurrence matrices of equal size."""
    if not matrices:
        raise InvalidParameterError("need at least one matrix to average")
    shape = np.shape(matrices[0])
    for m in matrices:
        if np.shape(m) != shape:
            raise InvalidParameterError(f"mismatched GLCM sizes {shape} and {np.shape(m)}")
        if abs(float(np.sum(m)) - 1.0) > 1e-9:
            raise InvalidParameterError("average_glcm expects normalized matrices")
    return np.mean(np.stack([np.asarray(m, dtype=float) for m in matrices]), axis=0)


def _level_gaps(m):
    g = m.shape[0]
    idx = np.arange(g)
    return np.abs(idx[:, None] - idx[None, :])


def dissimilarity(m):
    m = np.asarray(m, dtype=float)
    return float(np.sum(m * _level_gaps(m)))


def uniformity(m):
    m = np.asarray(m, dtype=float)
    return float(np.sum(m * m))


def entropy(m):
    """Base-2 entropy; zero entries contribute nothing."""
    p = np.asarray(m, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def contrast(m):
    m = np.asarray(m, dtype=float)
    gap = _level_gaps(m)
    return float(np.sum(m * gap * gap))


def texture_stats(m):
    return np.array([dissimilarity(m), uniformity(m), entropy(m), contrast(m)])


def orientation_glcm(img, cfg):
    """The single co-occurrence matrix summarizing all orientations in ``cfg``."""
    if cfg.normalize:
        mats = [compute_glcm(img, off, cfg.symmetric, True) for off in cfg.offsets]
        return average_glcm(mats)
    pooled = sum(compute_glcm(img, off, cfg.symmetric, False) for off in cfg.offsets)
    return pooled / pooled.sum()


def texture_vector(img, cfg=GlcmConfig()):
    """[dissimilarity, uniformity, entropy, contrast] of a quantized window."""
    if img.levels != cfg.levels:
        raise InvalidParameterError(
            f"image has {img.levels} levels but config expects {cfg.levels}"
        )
    return texture_stats(orientation_glcm(img, cfg))
