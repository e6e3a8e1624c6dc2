"""Plain-text persistence of trained maps.

Layout (one record per line, space separated)::

    texsom-model 1
    kind isom                  # or som
    rows 10
    cols 10
    dim 72
    classes 2
    scaler_min <dim reals>     # both scaler lines, or a single "scaler none"
    scaler_max <dim reals>
    node <row> <col> wcc <classes ints> weights <dim reals>     # isom
    node <row> <col> label <int, -1 = unlabeled> weights <dim reals>   # som
    end

Nodes appear in row-major order. Reals use 9 significant digits.
"""

import numpy as np

from .errors import ParseError
from .features import MinMaxScaler
from .isom import IsomClassifier, IsomGrid
from .som import SomClassifier, SomGrid, UNLABELED

MAGIC = "texsom-model"
VERSION = 1


def _reals(values):
    return " ".join(f"{v:.9g}" for v in values)


def dump_model(model, scaler=None):
    """Serialize a fitted SomClassifier or IsomClassifier (plus optional scaler)."""
    grid = model.grid
    m = model.n_classes
    lines = [
        f"{MAGIC} {VERSION}",
        f"kind {model.kind}",
        f"rows {grid.rows}",
        f"cols {grid.cols}",
        f"dim {grid.dim}",
        f"classes {m}",
    ]
    if scaler is None:
        lines.append("scaler none")
    else:
        lines.append(f"scaler_min {_reals(scaler.data_min)}")
        lines.append(f"scaler_max {_reals(scaler.data_max)}")
    for i, (r, c) in enumerate(grid.locations):
        if model.kind == "isom":
            tag = "wcc " + " ".join(str(int(v)) for v in grid.wcc[i])
        else:
            tag = f"label {int(model.labeling[i])}"
        lines.append(f"node {r} {c} {tag} weights {_reals(grid.weights[i])}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_model(path, model, scaler=None):
    with open(path, "w") as fh:
        fh.write(dump_model(model, scaler))


class _Lines:
    def __init__(self, text, path):
        self.lines = text.splitlines()
        self.pos = 0
        self.path = path

    def fail(self, msg):
        raise ParseError(msg, self.pos, self.path)

    def next(self):
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line.split()
        self.fail("unexpected end of model file")

    def keyed(self, key, n=None):
        toks = self.next()
        if toks[0] != key:
            self.fail(f"expected '{key}', got '{toks[0]}'")
        if n is not None and len(toks) != n + 1:
            self.fail(f"'{key}' expects {n} values, got {len(toks) - 1}")
        return toks[1:]

    def integer(self, key, lo=1):
        (tok,) = self.keyed(key, 1)
        try:
            v = int(tok)
        except ValueError:
            self.fail(f"'{key}' must be an integer")
        if v < lo:
            self.fail(f"'{key}' must be >= {lo}")
        return v

    def floats(self, toks):
        try:
            arr = np.array([float(t) for t in toks])
        except ValueError:
            self.fail("non-numeric value")
        if not np.all(np.isfinite(arr)):
            self.fail("non-finite value")
        return arr


def parse_model(text, path=None):
    """Inverse of :func:`dump_model`; returns ``(model, scaler_or_None)``."""
    rd = _Lines(text, path)
    head = rd.next()
    if head[0] != MAGIC or len(head) != 2:
        rd.fail("not a texsom model file")
    if head[1] != str(VERSION):
        rd.fail(f"unsupported model format version {head[1]}")
    (kind,) = rd.keyed("kind", 1)
    if kind not in ("som", "isom"):
        rd.fail(f"unknown model kind {kind!r}")
    rows, cols, dim, m = (rd.integer(k) for k in ("rows", "cols", "dim", "classes"))
    toks = rd.next()
    scaler = None
    if toks == ["scaler", "none"]:
        pass
    elif toks[0] == "scaler_min" and len(toks) == dim + 1:
        lo = rd.floats(toks[1:])
        hi = rd.floats(rd.keyed("scaler_max", dim))
        scaler = MinMaxScaler(lo, hi)
    else:
        rd.fail("expected 'scaler none' or 'scaler_min' with dim values")
    n = rows * cols
    weights = np.empty((n, dim))
    tags = np.empty((n, m if kind == "isom" else 1), dtype=np.int64)
    tag_key = "wcc" if kind == "isom" else "label"
    width = tags.shape[1]
    for i in range(n):
        toks = rd.keyed("node", 3 + width + 1 + dim)
        if toks[:2] != [str(i // cols), str(i % cols)]:
            rd.fail(f"node {i} out of order")
        if toks[2] != tag_key or toks[3 + width] != "weights":
            rd.fail(f"malformed node record (expected '{tag_key} ... weights ...')")
        try:
            tags[i] = [int(t) for t in toks[3:3 + width]]
        except ValueError:
            rd.fail(f"non-integer {tag_key}")
        weights[i] = rd.floats(toks[4 + width:])
    if rd.next() != ["end"]:
        rd.fail("expected 'end'")
    if kind == "isom":
        if np.any(tags < 0):
            rd.fail("negative class counter")
        model = IsomClassifier(rows, cols, n_classes=m)
        model.grid = IsomGrid(rows, cols, weights, tags)
    else:
        labels = tags[:, 0]
        if np.any((labels < UNLABELED) | (labels >= m)):
            rd.fail("node label out of range")
        model = SomClassifier(rows, cols)
        model.grid = SomGrid(rows, cols, weights)
        model.labeling = labels
        model.n_classes = m
    return model, scaler


def load_model(path):
    with open(path) as fh:
        return parse_model(fh.read(), path)
