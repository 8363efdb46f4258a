"""Dataset loading: PROBEN1 ``.dt`` files and plain CSV."""

import csv
import hashlib
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

PROBEN1_KEYS = (
    "bool_in",
    "real_in",
    "bool_out",
    "real_out",
    "training_examples",
    "validation_examples",
    "test_examples",
)


class DataError(ValueError):
    """Malformed or unusable dataset file."""


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    name: str

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise DataError("features must be N x F with one label per row")
        if np.isnan(self.features).any():
            raise DataError("features contain NaN")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise DataError("labels out of range")
        if self.features.shape[0] < self.class_count:
            raise DataError("fewer examples than classes")

    @property
    def n_examples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]


def fingerprint(path):
    """sha256 of the file bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def bundled(name):
    """Path of a dataset shipped with the package (currently ``"cancer"``)."""
    return resources.files("qcvselect") / "datasets" / f"{name}.dt"


def load_proben1(path, name=None):
    """Parse a PROBEN1 file: ``key=value`` header lines then numeric rows.

    Inputs are the first ``bool_in + real_in`` columns.  The output columns are
    one-hot and decoded by argmax (ties go to the lowest index).  Training,
    validation and test partitions are concatenated.
    """
    path = Path(path)
    header = {}
    rows = []
    width = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if "=" in line:
                if rows:
                    raise DataError(f"{path}:{lineno}: header line after data rows")
                key, _, value = line.partition("=")
                key = key.strip()
                try:
                    header[key] = int(value)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: header {key!r} is not an integer") from None
                continue
            if not rows:
                missing = [k for k in PROBEN1_KEYS if k not in header]
                if missing:
                    raise DataError(f"{path}:{lineno}: header missing key {missing[0]!r}")
                width = sum(header[k] for k in PROBEN1_KEYS[:4])
            tokens = line.split()
            if len(tokens) != width:
                raise DataError(f"{path}:{lineno}: expected {width} values, got {len(tokens)}")
            try:
                rows.append([float(t) for t in tokens])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric token ({exc})") from None
    if not rows:
        raise DataError(f"{path}: no data rows")

    expected = sum(header[k] for k in PROBEN1_KEYS[4:])
    if expected != len(rows):
        raise DataError(f"{path}: header promises {expected} examples, found {len(rows)}")
    table = np.array(rows)
    n_in = header["bool_in"] + header["real_in"]
    outputs = table[:, n_in:]
    return Dataset(
        features=np.ascontiguousarray(table[:, :n_in]),
        labels=np.argmax(outputs, axis=1).astype(np.int64),
        class_count=outputs.shape[1],
        name=name or path.stem,
    )


def load_csv(path, label_column=-1, name=None):
    """Load a CSV with a header row.

    ``label_column`` is a column name or an integer position (negative counts
    from the end).  Label values are mapped to 0, 1, ... in order of first
    appearance; every other column must be numeric.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        body = [r for r in reader if r]
    if not body:
        raise DataError(f"{path}: no data rows")

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if label_column not in head:
            raise DataError(f"{path}: no column named {label_column!r}")
        col = head.index(label_column)
    else:
        col = int(label_column)
        if not -len(head) <= col < len(head):
            raise DataError(f"{path}: label column {col} out of range")
        col %= len(head)

    mapping = {}
    feats, labels = [], []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(head):
            raise DataError(f"{path}:{lineno}: expected {len(head)} fields, got {len(row)}")
        lab = row[col].strip()
        if not lab:
            raise DataError(f"{path}:{lineno}: empty label")
        labels.append(mapping.setdefault(lab, len(mapping)))
        try:
            feats.append([float(v) for i, v in enumerate(row) if i != col])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric feature ({exc})") from None
    return Dataset(
        features=np.array(feats, dtype=float).reshape(len(feats), len(head) - 1),
        labels=np.array(labels, dtype=np.int64),
        class_count=len(mapping),
        name=name or path.stem,
    )


def normalize(dataset):
    """Per-feature z-score over the whole dataset; constant features become 0."""
    X = dataset.features
    mean = X.mean(axis=0)
    # a rounded mean can leave a tiny nonzero std on a constant column, and
    # subnormal spreads can underflow std to 0: vary means both are nonzero
    std = X.std(axis=0)
    varying = (np.ptp(X, axis=0) > 0) & (std > 0)
    Z = np.where(varying, (X - mean) / np.where(varying, std, 1.0), 0.0)
    return replace(dataset, features=np.ascontiguousarray(Z))
