"""Precision / recall / F-score, stratified k-fold CV and the map-size comparison."""

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, StratificationError
from .features import MinMaxScaler

POSITIVE_CLASS = 1  # abnormal
REPORT_HEADER = ("map_size", "model", "precision", "recall", "fscore", "updates")


class DegenerateMetricWarning(UserWarning):
    """A metric had a zero denominator and was reported as 0."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other):
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn


def confusion(preds, truth, positive_class=POSITIVE_CLASS):
    preds = np.asarray(preds)
    truth = np.asarray(truth)
    if preds.shape != truth.shape:
        raise InvalidParameterError(
            f"predictions ({preds.shape}) and truth ({truth.shape}) differ in length"
        )
    p = preds == positive_class
    t = truth == positive_class
    return ConfusionCounts(
        tp=int(np.sum(p & t)), fp=int(np.sum(p & ~t)), fn=int(np.sum(~p & t)), tn=int(np.sum(~p & ~t))
    )


def _ratio(num, den, name):
    if den == 0:
        warnings.warn(f"{name} undefined (0/0); reporting 0", DegenerateMetricWarning, stacklevel=3)
        return 0.0
    return num / den


def precision(c):
    return _ratio(c.tp, c.tp + c.fp, "precision")


def recall(c):
    return _ratio(c.tp, c.tp + c.fn, "recall")


def fscore_from(p, r):
    """Harmonic mean 2PR/(P+R); 0 when both are 0."""
    if p + r == 0:
        warnings.warn("F-score undefined (P=R=0); reporting 0", DegenerateMetricWarning, stacklevel=2)
        return 0.0
    return 2.0 * p * r / (p + r)


def fscore(c):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateMetricWarning)
        p, r = precision(c), recall(c)
    if c.tp == 0:
        warnings.warn("F-score undefined (no true positives); reporting 0", DegenerateMetricWarning, stacklevel=2)
        return 0.0
    return fscore_from(p, r)


@dataclass
class MetricsReport:
    per_fold: list  # ConfusionCounts per fold, in fold order
    updates: int = 0
    per_fold_updates: list = field(default_factory=list)

    @property
    def pooled(self):
        total = ConfusionCounts()
        for c in self.per_fold:
            total = total + c
        return total

    def pooled_metrics(self):
        c = self.pooled
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateMetricWarning)
            p, r = precision(c), recall(c)
            f = fscore_from(p, r) if p + r > 0 else 0.0
        return p, r, f

    def fold_metrics(self):
        out = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateMetricWarning)
            for c in self.per_fold:
                p, r = precision(c), recall(c)
                out.append((p, r, fscore_from(p, r) if p + r > 0 else 0.0))
        return out

    def macro_metrics(self):
        """Unweighted mean of the per-fold precision, recall and F-score."""
        return tuple(float(v) for v in np.mean(self.fold_metrics(), axis=0))


def stratified_kfold(y, k, seed=0, strict=True):
    """Split indices into ``k`` stratified folds.

    Each class is shuffled with a seeded generator and dealt round-robin; the
    dealing position carries over from one class to the next so fold sizes
    differ by at most one. With ``strict`` every class must have at least ``k``
    members; ``strict=False`` allows e.g. leave-one-out on mixed classes.
    """
    y = np.asarray(y)
    n = len(y)
    if k < 2:
        raise InvalidParameterError(f"k must be >= 2, got {k}")
    if k > n:
        raise StratificationError(f"cannot make {k} folds from {n} instances")
    classes, counts = np.unique(y, return_counts=True)
    if strict and np.any(counts < k):
        small = {int(c): int(n_c) for c, n_c in zip(classes, counts) if n_c < k}
        raise StratificationError(f"classes with fewer than k={k} members: {small}")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    pos = 0
    for c in classes:
        members = np.flatnonzero(y == c)
        rng.shuffle(members)
        for idx in members:
            folds[pos % k].append(int(idx))
            pos += 1
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def cross_validate(make_model, X, y, k=10, seed=0, positive_class=POSITIVE_CLASS, folds=None):
    """k-fold CV of ``make_model()`` (an object with ``fit``/``predict``).

    The min-max scaler is fitted on each training split only. Returns a
    :class:`MetricsReport` whose pooled counts are the sum over folds.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if folds is None:
        folds = stratified_kfold(y, k, seed)
    per_fold, per_updates = [], []
    all_idx = np.arange(len(y))
    for test in folds:
        train = np.setdiff1d(all_idx, test)
        scaler = MinMaxScaler().fit(X[train])
        model = make_model()
        model.fit(scaler.transform(X[train]), y[train])
        preds = model.predict(scaler.transform(X[test]))
        per_fold.append(confusion(preds, y[test], positive_class))
        stats = getattr(model, "update_stats", None)
        per_updates.append(stats.weight_updates if stats is not None else 0)
    return MetricsReport(per_fold, int(sum(per_updates)), per_updates)


@dataclass
class ComparisonRow:
    map_size: str
    model: str
    precision: float
    recall: float
    fscore: float
    updates: int
    report: MetricsReport = None


def compare_models(X, y, map_sizes, make_model, models=("isom", "som"), k=10, seed=0):
    """Cross-validate every (map size, model kind) pair.

    ``make_model(kind, rows, cols)`` builds a fresh classifier. All pairs share
    one fold plan so their rows are directly comparable.
    """
    folds = stratified_kfold(np.asarray(y), k, seed)
    rows = []
    for size in map_sizes:
        r, c = size
        for kind in models:
            rep = cross_validate(lambda: make_model(kind, r, c), X, y, folds=folds)
            p, rc, f = rep.pooled_metrics()
            rows.append(ComparisonRow(f"{r}x{c}", kind, p, rc, f, rep.updates, rep))
    return rows


def report_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for row in rows:
        w.writerow([
            row.map_size, row.model, f"{row.precision:.9g}", f"{row.recall:.9g}",
            f"{row.fscore:.9g}", row.updates,
        ])
    return buf.getvalue()


def format_table(rows):
    """Text table, one line per map size, models side by side (percentages)."""
    models = list(dict.fromkeys(r.model for r in rows))
    sizes = list(dict.fromkeys(r.map_size for r in rows))
    by_key = {(r.map_size, r.model): r for r in rows}
    width = 38  # 9 + 8 + 8 + 9 digits plus four separating spaces
    head1 = f"{'map size':<10}" + "".join(f"| {m.upper():<{width}}" for m in models)
    head2 = f"{'':<10}" + "".join(
        f"| {'Precision':>9} {'Recall':>8} {'F-score':>8} {'updates':>9} " for _ in models
    )
    lines = [head1, head2, "-" * len(head2)]
    for s in sizes:
        cells = []
        for m in models:
            r = by_key.get((s, m))
            if r is None:
                cells.append(f"| {'':<{width}}")
            else:
                cells.append(
                    f"| {100 * r.precision:9.2f} {100 * r.recall:8.2f} {100 * r.fscore:8.2f} {r.updates:9d} "
                )
        lines.append(f"{s:<10}" + "".join(cells))
    return "\n".join(lines) + "\n"
