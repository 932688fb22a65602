"""Dataset loading, serialization, and a synthetic overlap generator.

CSV conventions: UTF-8, comma-delimited, optional header (detected by a
non-numeric first row), numeric feature columns, and optionally one
label column holding '|'-separated label tokens.  Coverings are written
as `index,cluster_ids` rows with 1-based '|'-joined cluster ids.

The generator lays out k cluster centers (a regular simplex when the
dimension allows, an axis lattice otherwise), draws Gaussian points per
cluster, and adds doubly-labeled points around the midpoint of each
requested overlap pair.
"""

import csv
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyFile, InvalidSpec, ParseError, RaggedRows
from .evaluation import LabeledCovering


@dataclass(frozen=True)
class DataMatrix:
    """n x p observations, optionally with per-row ground-truth labels."""

    values: np.ndarray
    labels: LabeledCovering | None = None

    def __post_init__(self):
        a = np.asarray(self.values, dtype=float)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D data array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("data values must be finite")
        if self.labels is not None and self.labels.n != a.shape[0]:
            raise ValueError(f"label count {self.labels.n} != row count {a.shape[0]}")
        object.__setattr__(self, "values", a)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of a generated overlapping dataset."""

    k: int
    points_per_cluster: int
    overlap_pairs: tuple = field(default_factory=tuple)
    center_separation: float = 10.0
    noise_scale: float = 1.0
    dimension: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise InvalidSpec(f"k must be >= 1, got {self.k}")
        if self.points_per_cluster < 1:
            raise InvalidSpec("points_per_cluster must be >= 1")
        if not (np.isfinite(self.noise_scale) and self.noise_scale > 0):
            raise InvalidSpec(f"noise_scale must be positive, got {self.noise_scale}")
        if self.dimension < 1:
            raise InvalidSpec("dimension must be >= 1")
        if self.k > 1 and not (np.isfinite(self.center_separation) and self.center_separation > 0):
            raise InvalidSpec("center_separation must be positive for k > 1")
        pairs = tuple(tuple(p) for p in self.overlap_pairs)
        for a, b, m in pairs:
            if not (0 <= a < self.k and 0 <= b < self.k and a != b):
                raise InvalidSpec(f"overlap pair ({a}, {b}) is not two distinct clusters")
            if not (1 <= m <= self.points_per_cluster):
                raise InvalidSpec(
                    f"overlap count {m} must be in 1..points_per_cluster ({self.points_per_cluster})"
                )
        object.__setattr__(self, "overlap_pairs", pairs)


def _atomic_write(path, write_fn):
    # Write to a sibling temp file, then rename: no partial files on failure.
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            write_fn(handle)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _is_float(token):
    try:
        float(token)
        return True
    except ValueError:
        return False


def load_csv(path, label_column=None, label_separator="|") -> DataMatrix:
    """Load a delimited dataset, optionally with a multi-label column.

    `label_column` is None (no labels), 'last', or a 0-based column
    index.  A header row is skipped automatically when any feature cell
    in the first row fails to parse as a number.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise EmptyFile(f"no rows in {path}")

    width = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(f"row {r} has {len(row)} cells, expected {width}")

    if label_column is None:
        label_idx = None
    elif label_column == "last":
        label_idx = width - 1
    else:
        label_idx = int(label_column)
        if not (0 <= label_idx < width):
            raise ValueError(f"label column {label_idx} out of range for width {width}")
    feature_idx = [c for c in range(width) if c != label_idx]
    if not feature_idx:
        raise ValueError("no feature columns left after removing the label column")

    start = 0
    if not all(_is_float(rows[0][c]) for c in feature_idx):
        start = 1
        if len(rows) == 1:
            raise EmptyFile(f"only a header row in {path}")

    values = []
    label_sets = []
    for r in range(start, len(rows)):
        row = rows[r]
        parsed = []
        for c in feature_idx:
            try:
                value = float(row[c])
            except ValueError:
                raise ParseError(f"cell {row[c]!r} is not numeric", row=r, column=c) from None
            if not np.isfinite(value):
                raise ParseError(f"cell {row[c]!r} is not finite", row=r, column=c)
            parsed.append(value)
        values.append(parsed)
        if label_idx is not None:
            tokens = [t for t in row[label_idx].split(label_separator) if t != ""]
            if not tokens:
                raise ParseError("empty label cell", row=r, column=label_idx)
            label_sets.append(frozenset(tokens))

    labels = LabeledCovering(tuple(label_sets)) if label_idx is not None else None
    return DataMatrix(values=np.array(values, dtype=float), labels=labels)


def save_csv(data: DataMatrix, path, label_separator="|"):
    """Write a DataMatrix back out (round-trips through load_csv exactly)."""

    def write(handle):
        writer = csv.writer(handle)
        header = [f"f{c}" for c in range(data.p)]
        if data.labels is not None:
            header.append("label")
        writer.writerow(header)
        for i in range(data.n):
            row = [repr(float(v)) for v in data.values[i]]
            if data.labels is not None:
                row.append(label_separator.join(sorted(data.labels.label_sets[i])))
            writer.writerow(row)

    _atomic_write(path, write)


def save_covering_csv(covering, path):
    """Write a covering as `index,cluster_ids` with 1-based cluster ids."""

    def write(handle):
        writer = csv.writer(handle)
        writer.writerow(["index", "cluster_ids"])
        for i, assigned in enumerate(covering.assignments):
            writer.writerow([i, "|".join(str(c + 1) for c in sorted(assigned))])

    _atomic_write(path, write)


def _simplex_centers(k, dim, sep):
    # k mutually equidistant points with pairwise distance sep; needs dim >= k - 1.
    basis = np.eye(k)
    centered = basis - basis.mean(axis=0)
    q, _ = np.linalg.qr(centered.T)
    coords = (centered @ q[:, : k - 1]) * sep / np.sqrt(2.0)
    out = np.zeros((k, dim))
    out[:, : k - 1] = coords
    return out


def _lattice_centers(k, dim, sep):
    out = np.zeros((k, dim))
    for c in range(k):
        out[c, 0] = c * sep
    return out


def generate_synthetic(spec: SyntheticSpec) -> DataMatrix:
    """Draw a labeled sample with the requested overlap structure.

    Overlap points are drawn around the midpoint of the two cluster
    centers and carry exactly those two labels.  Deterministic in the
    spec's seed.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.k == 1:
        centers = np.zeros((1, spec.dimension))
    elif spec.dimension >= spec.k - 1:
        centers = _simplex_centers(spec.k, spec.dimension, spec.center_separation)
    else:
        centers = _lattice_centers(spec.k, spec.dimension, spec.center_separation)

    blocks = []
    label_sets = []
    for c in range(spec.k):
        blocks.append(rng.normal(centers[c], spec.noise_scale,
                                 (spec.points_per_cluster, spec.dimension)))
        label_sets += [frozenset({f"c{c + 1}"})] * spec.points_per_cluster
    for a, b, m in spec.overlap_pairs:
        midpoint = (centers[a] + centers[b]) / 2.0
        blocks.append(rng.normal(midpoint, spec.noise_scale, (m, spec.dimension)))
        label_sets += [frozenset({f"c{a + 1}", f"c{b + 1}"})] * m

    return DataMatrix(values=np.vstack(blocks), labels=LabeledCovering(tuple(label_sets)))
