"""Image, label and feature-table I/O plus the synthetic blob generator."""

import csv
import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError, ParseError
from .features import Transaction

CLASS_NAMES = ("normal", "abnormal")
_WHITESPACE = b" \t\n\r\x0b\x0c"


@dataclass
class LabeledImage:
    source_id: str
    path: Path
    image: np.ndarray
    label: int


class TabularDataset:
    """A list of equal-length transactions."""

    def __init__(self, transactions):
        self.transactions = list(transactions)
        dims = {t.dim for t in self.transactions}
        if len(dims) > 1:
            raise InvalidParameterError(f"transactions have mixed dims {sorted(dims)}")

    def __len__(self):
        return len(self.transactions)

    @property
    def dim(self):
        return self.transactions[0].dim if self.transactions else 0

    @property
    def X(self):
        return np.array([t.values for t in self.transactions], dtype=float).reshape(len(self), self.dim)

    @property
    def y(self):
        return np.array([-1 if t.label is None else t.label for t in self.transactions], dtype=np.int64)

    @property
    def ids(self):
        return [t.source_id for t in self.transactions]

    @property
    def labeled(self):
        return all(t.label is not None for t in self.transactions)

    def class_counts(self):
        counts = {}
        for t in self.transactions:
            if t.label is not None:
                counts[t.label] = counts.get(t.label, 0) + 1
        return dict(sorted(counts.items()))


# -- PGM ------------------------------------------------------------------

class _HeaderReader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def token(self, what):
        data, n = self.data, len(self.data)
        while self.pos < n:
            ch = data[self.pos:self.pos + 1]
            if ch in _WHITESPACE and ch:
                self.pos += 1
            elif ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = n if end < 0 else end + 1
            else:
                break
        start = self.pos
        while self.pos < n and data[self.pos:self.pos + 1] not in _WHITESPACE + b"#":
            self.pos += 1
        if start == self.pos:
            raise ParseError(f"unexpected end of file while reading {what}", start)
        return data[start:self.pos], start

    def integer(self, what, lo, hi):
        tok, at = self.token(what)
        if not tok.isdigit():
            raise ParseError(f"{what} must be a decimal integer, got {tok[:20]!r}", at)
        value = int(tok)
        if not lo <= value <= hi:
            raise ParseError(f"{what} {value} outside [{lo}, {hi}]", at)
        return value


def _ascii_raster(rd, count, maxval):
    body = rd.data[rd.pos:]
    if len(body) < 2 * count - 1:
        raise ParseError(f"truncated raster: {count} values cannot fit in {len(body)} bytes", len(rd.data))
    toks = re.sub(rb"#[^\n]*", b"", body).split()
    if len(toks) >= count and all(t.isdigit() for t in toks[:count]):
        values = [int(t) for t in toks[:count]]
        if max(values) <= maxval:
            return np.array(values, dtype=np.uint8)
    # slow path only to locate the offending token
    for _ in range(count):
        rd.integer("pixel value", 0, maxval)
    raise ParseError("malformed raster", rd.pos)  # pragma: no cover


def parse_pgm(data):
    """Decode a P2 (ASCII) or P5 (binary) graymap with maxval <= 255."""
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("parse_pgm expects bytes")
    data = bytes(data)
    rd = _HeaderReader(data)
    magic, _ = rd.token("magic number")
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"unsupported magic {magic[:8]!r}; expected P2 or P5", 0)
    width = rd.integer("width", 1, 1 << 16)
    height = rd.integer("height", 1, 1 << 16)
    maxval_at = rd.pos
    maxval = rd.integer("maxval", 1, 1 << 16)
    if maxval > 255:
        raise ParseError(f"maxval {maxval} > 255 is not supported", maxval_at)
    count = width * height
    if magic == b"P5":
        if rd.pos >= len(data):
            raise ParseError("missing raster after header", rd.pos)
        if data[rd.pos:rd.pos + 1] not in _WHITESPACE:
            raise ParseError("expected one whitespace byte before the raster", rd.pos)
        start = rd.pos + 1
        raster = data[start:start + count]
        if len(raster) < count:
            raise ParseError(f"truncated raster: expected {count} bytes, found {len(raster)}", start + len(raster))
        pixels = np.frombuffer(raster, dtype=np.uint8)
        if pixels.max() > maxval:
            bad = int(np.argmax(pixels > maxval))
            raise ParseError(f"pixel value {pixels[bad]} exceeds maxval {maxval}", start + bad)
    else:
        pixels = _ascii_raster(rd, count, maxval)
    return pixels.reshape(height, width).copy()


def load_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_pgm(data)
    except ParseError as exc:
        raise ParseError(str(exc), path=path) from None


def save_pgm(path, img, binary=True):
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(img.tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n255\n".encode())
            for row in img:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())


# -- labels ---------------------------------------------------------------

def load_labels(path, class_names=CLASS_NAMES):
    """Map image id -> class index from an ``id,label`` CSV of class names."""
    index = {name.lower(): i for i, name in enumerate(class_names)}
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["id", "label"]:
            raise ParseError(f"expected header 'id,label', got {header!r}", 1, path)
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 columns, got {len(row)}", rowno, path)
            ident, name = row[0].strip(), row[1].strip().lower()
            if name not in index:
                raise ParseError(f"unknown label {row[1]!r}; known: {', '.join(class_names)}", rowno, path)
            if ident in out:
                raise ParseError(f"duplicate id {ident!r}", rowno, path)
            out[ident] = index[name]
    return out


def load_image_dir(directory, labels):
    """All ``*.pgm`` images of ``directory`` in sorted order, paired with labels."""
    directory = Path(directory)
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".pgm")
    entries = []
    for p in paths:
        if p.stem not in labels:
            raise InvalidParameterError(f"no label for image {p.stem!r}")
        entries.append(LabeledImage(p.stem, p, load_pgm(p), labels[p.stem]))
    return entries


# -- synthetic data -------------------------------------------------------

def synth_blobs(n_per_class, dim, separation, spread, seed=0):
    """Two Gaussian classes centred at -/+ separation/2 on the first axis.

    Class 0 sits on the negative side; every axis has standard deviation
    ``spread``.
    """
    if dim < 1 or n_per_class < 1:
        raise InvalidParameterError("dim and n_per_class must be >= 1")
    if separation < 0 or spread < 0:
        raise InvalidParameterError("separation and spread must be >= 0")
    rng = np.random.default_rng(seed)
    out = []
    for label, sign in ((0, -1.0), (1, 1.0)):
        center = np.zeros(dim)
        center[0] = sign * separation / 2.0
        pts = center + spread * rng.standard_normal((n_per_class, dim))
        out.extend(
            Transaction(p, label, f"synth-{label}-{i:05d}") for i, p in enumerate(pts)
        )
    return TabularDataset(out)


# -- feature tables -------------------------------------------------------

def format_features(ds):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"f{i}" for i in range(ds.dim)] + ["label", "source_id"])
    for t in ds.transactions:
        w.writerow(
            [f"{v:.9g}" for v in t.values] + ["" if t.label is None else t.label, t.source_id]
        )
    return buf.getvalue()


def save_features(ds, path):
    with open(path, "w", newline="") as fh:
        fh.write(format_features(ds))


def parse_features(text, path=None):
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header:
        raise ParseError("empty feature file", 1, path)
    if len(header) < 3 or header[-2:] != ["label", "source_id"]:
        raise ParseError("header must end with 'label,source_id'", 1, path)
    dim = len(header) - 2
    if header[:-2] != [f"f{i}" for i in range(dim)]:
        raise ParseError("feature columns must be named f0..f{D-1}", 1, path)
    rows = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != dim + 2:
            raise ParseError(f"expected {dim + 2} columns, got {len(row)}", rowno, path)
        try:
            values = np.array([float(v) for v in row[:dim]])
        except ValueError:
            raise ParseError("non-numeric feature value", rowno, path) from None
        if not np.all(np.isfinite(values)):
            raise ParseError("non-finite feature value", rowno, path)
        label_txt = row[dim].strip()
        if label_txt == "":
            label = None
        elif label_txt.isdigit():
            label = int(label_txt)
        else:
            raise ParseError(f"label must be a non-negative integer, got {label_txt!r}", rowno, path)
        rows.append(Transaction(values, label, row[dim + 1]))
    return TabularDataset(rows)


def load_features(path):
    with open(path, newline="") as fh:
        return parse_features(fh.read(), path)
