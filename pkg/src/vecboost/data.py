"""Dataset ingestion and histogram binning.

Raw feature matrices are mapped onto small integer bin indices once per
training run.  Bin boundaries are placed at midpoints between consecutive
distinct values, thinned to empirical quantiles when a feature has more
distinct values than ``max_bins``.  Intervals are right-closed: value x
falls in bin k iff ``boundary[k-1] < x <= boundary[k]``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

CACHE_MAGIC = b"BMO1"


def _check_finite(arr: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(arr)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise DataError(f"non-finite {what} value at row {i + 1}, column {j + 1}")


@dataclass
class RawDataset:
    """An in-memory dataset: features ``(n, m)`` and targets ``(n, d)``.

    Both arrays are float64 and fully finite.  Classification targets are
    one-hot rows produced at load time.
    """

    features: np.ndarray
    targets: np.ndarray
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.targets = np.ascontiguousarray(self.targets, dtype=np.float64)
        if self.features.ndim != 2 or self.targets.ndim != 2:
            raise DataError("features and targets must be 2-d arrays")
        if self.features.shape[0] != self.targets.shape[0]:
            raise DataError(
                f"row count mismatch: {self.features.shape[0]} feature rows vs "
                f"{self.targets.shape[0]} target rows"
            )
        if self.n == 0 or self.m == 0 or self.d == 0:
            raise DataError("dataset must have at least one row, feature and target")
        _check_finite(self.features, "feature")
        _check_finite(self.targets, "target")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @property
    def d(self) -> int:
        return self.targets.shape[1]


class BinMapper:
    """Immutable per-feature bin boundary tables.

    ``boundaries[j]`` is a strictly increasing float64 array of interior
    boundaries for feature j; a feature with a single distinct value has an
    empty array (one bin).  Feature j has ``len(boundaries[j]) + 1`` bins.
    """

    def __init__(self, boundaries: list[np.ndarray]):
        bnds = []
        for j, b in enumerate(boundaries):
            b = np.asarray(b, dtype=np.float64)
            if b.size > 1 and not np.all(np.diff(b) > 0):
                raise DataError(f"boundaries for feature {j} are not strictly increasing")
            b.setflags(write=False)
            bnds.append(b)
        self._boundaries = tuple(bnds)

    @property
    def n_features(self) -> int:
        return len(self._boundaries)

    def boundaries(self, j: int) -> np.ndarray:
        return self._boundaries[j]

    def n_bins(self, j: int) -> int:
        return self._boundaries[j].size + 1

    @property
    def max_n_bins(self) -> int:
        return max(self.n_bins(j) for j in range(self.n_features))

    def upper_boundary(self, j: int, bin_idx: int) -> float:
        """Raw value of the right edge of ``bin_idx`` (used as split threshold)."""
        return float(self._boundaries[j][bin_idx])

    def bin_value(self, j: int, x: float) -> int:
        """Bin index of scalar x for feature j (binary search, right-closed)."""
        return int(np.searchsorted(self._boundaries[j], x, side="left"))

    def bin_column(self, j: int, values: np.ndarray) -> np.ndarray:
        return np.searchsorted(self._boundaries[j], values, side="left")

    def to_bytes(self) -> bytes:
        """Canonical byte serialization, used for determinism checks."""
        parts = [struct.pack("<q", self.n_features)]
        for b in self._boundaries:
            parts.append(struct.pack("<q", b.size))
            parts.append(b.tobytes())
        return b"".join(parts)


def _column_boundaries(values: np.ndarray, max_bins: int) -> np.ndarray:
    """Interior boundaries for one feature column.

    With u <= max_bins distinct values every midpoint between consecutive
    distinct values becomes a boundary (u bins).  Otherwise boundaries are
    midpoints at the empirical quantile ranks k*n/max_bins, deduplicated.
    """
    distinct, counts = np.unique(values, return_counts=True)
    u = distinct.size
    if u <= 1:
        return np.empty(0, dtype=np.float64)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    if u <= max_bins:
        return mids
    cum = np.cumsum(counts)
    n = values.size
    picks = []
    for k in range(1, max_bins):
        target = k * n / max_bins
        i = int(np.searchsorted(cum, target, side="left"))
        if i < u - 1:
            picks.append(i)
    picks = sorted(set(picks))
    return mids[picks]


def build_bin_mapper(features: np.ndarray, max_bins: int) -> BinMapper:
    """Construct per-feature quantile-midpoint boundaries from raw features."""
    if max_bins < 2:
        raise ConfigError(f"max_bins must be >= 2, got {max_bins}")
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DataError("features must be a 2-d array")
    _check_finite(features, "feature")
    return BinMapper([_column_boundaries(features[:, j], max_bins)
                      for j in range(features.shape[1])])


def bin_value(mapper: BinMapper, j: int, x: float) -> int:
    """Bin index of value x under feature j's boundaries."""
    return mapper.bin_value(j, x)


class BinnedMatrix:
    """Bin indices of a feature matrix in a column-accessible layout.

    ``codes`` is stored transposed, shape ``(m, n)``, with the narrowest
    unsigned dtype that holds every feature's bin count (cache footprint
    dominates histogram build time).
    """

    def __init__(self, codes: np.ndarray, mapper: BinMapper):
        self.codes = codes
        self.mapper = mapper

    @property
    def n(self) -> int:
        return self.codes.shape[1]

    @property
    def m(self) -> int:
        return self.codes.shape[0]

    @property
    def max_bins(self) -> int:
        return self.mapper.max_n_bins

    def column(self, j: int) -> np.ndarray:
        return self.codes[j]


def bin_matrix(mapper: BinMapper, features: np.ndarray) -> BinnedMatrix:
    """Element-wise bin_value over a whole feature matrix."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != mapper.n_features:
        raise DataError(
            f"expected {mapper.n_features} feature columns, got "
            f"{features.shape[1] if features.ndim == 2 else 'non-2d input'}"
        )
    _check_finite(features, "feature")
    dtype = np.uint8 if mapper.max_n_bins <= 256 else np.uint16
    codes = np.empty((mapper.n_features, features.shape[0]), dtype=dtype)
    for j in range(mapper.n_features):
        codes[j] = mapper.bin_column(j, features[:, j])
    return BinnedMatrix(codes, mapper)


@dataclass(frozen=True)
class LabelSpec:
    """How target columns are carved out of a raw table.

    Either the trailing ``n_targets`` columns are the targets, or the last
    column holds integer class labels expanded to ``n_classes`` one-hot
    columns.
    """

    n_targets: int = 0
    n_classes: int = 0

    @staticmethod
    def parse(text: str) -> "LabelSpec":
        text = text.strip()
        if text.startswith("class:"):
            try:
                c = int(text[len("class:"):])
            except ValueError:
                raise ConfigError(f"bad label spec {text!r}") from None
            if c < 2:
                raise ConfigError("class label spec needs at least 2 classes")
            return LabelSpec(n_classes=c)
        try:
            k = int(text)
        except ValueError:
            raise ConfigError(
                f"bad label spec {text!r}: expected a column count or 'class:<count>'"
            ) from None
        if k < 1:
            raise ConfigError("label column count must be >= 1")
        return LabelSpec(n_targets=k)


def _parse_csv_rows(path: str) -> tuple[list[list[float]], list[str] | None, int]:
    """Parse a CSV file; returns (rows, header or None, first data line number)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    lines = [ln for ln in lines if ln != ""]
    if not lines:
        raise DataError(f"{path}: no rows")
    header = None
    start = 0
    first_cells = lines[0].split(",")

    def _is_number(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    # A header row is one with no numeric cell at all; a row with some
    # numeric cells is data (possibly with a reportable bad cell).
    if not any(_is_number(c) for c in first_cells):
        header = [c.strip() for c in first_cells]
        start = 1
        if len(lines) == 1:
            raise DataError(f"{path}: no rows")
    rows = []
    width = None
    for lineno in range(start, len(lines)):
        cells = lines[lineno].split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DataError(
                f"{path}: ragged row at line {lineno + 1}: expected {width} cells, "
                f"got {len(cells)}"
            )
        row = []
        for col, cell in enumerate(cells):
            try:
                row.append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}: cannot parse cell {cell!r} at row {lineno + 1}, "
                    f"column {col + 1}"
                ) from None
        rows.append(row)
    return rows, header, start + 1


def _expand_class_column(col: np.ndarray, n_classes: int) -> np.ndarray:
    labels = col.astype(np.int64)
    if not np.all(labels == col):
        raise DataError("class column contains non-integer labels")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise DataError(
            f"class label out of range [0, {n_classes}): found {labels[np.argmax((labels < 0) | (labels >= n_classes))]}"
        )
    onehot = np.zeros((col.size, n_classes), dtype=np.float64)
    onehot[np.arange(col.size), labels] = 1.0
    return onehot


def load_csv(path: str, label_spec: LabelSpec | str) -> RawDataset:
    """Load a comma-separated table, splitting off the target block.

    A non-numeric first row is treated as a header.  A class-column spec
    expands the final column into one-hot targets.
    """
    if isinstance(label_spec, str):
        label_spec = LabelSpec.parse(label_spec)
    rows, header, _ = _parse_csv_rows(path)
    table = np.asarray(rows, dtype=np.float64)
    if label_spec.n_classes:
        if table.shape[1] < 2:
            raise DataError(f"{path}: need at least one feature column plus the class column")
        features = table[:, :-1]
        targets = _expand_class_column(table[:, -1], label_spec.n_classes)
        names = header[:-1] if header else None
    else:
        k = label_spec.n_targets
        if table.shape[1] <= k:
            raise DataError(
                f"{path}: {k} target columns leave no feature columns "
                f"(row width {table.shape[1]})"
            )
        features = table[:, :-k]
        targets = table[:, -k:]
        names = header[:-k] if header else None
    return RawDataset(features, targets, feature_names=names)


def save_binary(dataset: RawDataset, path: str) -> None:
    """Write the binary cache: magic, n/m/d as int64 LE, then row-major floats."""
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<qqq", dataset.n, dataset.m, dataset.d))
        fh.write(np.ascontiguousarray(dataset.features, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(dataset.targets, dtype="<f8").tobytes())


def load_binary(path: str) -> RawDataset:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CACHE_MAGIC:
        raise DataError(f"{path}: not a binary dataset cache (bad magic)")
    if len(blob) < 4 + 24:
        raise DataError(f"{path}: truncated header")
    n, m, d = struct.unpack_from("<qqq", blob, 4)
    need = 4 + 24 + 8 * n * (m + d)
    if len(blob) != need:
        raise DataError(f"{path}: expected {need} bytes, found {len(blob)}")
    off = 4 + 24
    features = np.frombuffer(blob, dtype="<f8", count=n * m, offset=off).reshape(n, m)
    targets = np.frombuffer(blob, dtype="<f8", count=n * d,
                            offset=off + 8 * n * m).reshape(n, d)
    return RawDataset(features.copy(), targets.copy())


def load_dataset(path: str, label_spec: LabelSpec | str | None = None) -> RawDataset:
    """Load either a CSV table or a binary cache file, sniffed by magic."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == CACHE_MAGIC:
        return load_binary(path)
    if label_spec is None:
        raise ConfigError(f"{path}: CSV input requires a label spec")
    return load_csv(path, label_spec)
