"""Datasets, CSV ingestion, splitting and the Pagie benchmark grid."""

import csv
import math
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "CSVFormatError",
    "Dataset",
    "LabeledDataset",
    "load_csv",
    "pagie_grid",
    "pagie_value",
    "read_csv",
    "train_test_split",
    "write_csv",
]

PAGIE_DOMAIN = (-5.0, 5.0)


class CSVFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Feature matrix stored column-major.

    ``X`` is a Fortran-ordered ``(n_rows, n_cols)`` array, so each
    feature column is contiguous.
    """

    X: np.ndarray
    names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, order="F")
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"feature matrix must be 2-D and non-empty, got {X.shape}")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != X.shape[1]:
                raise ValueError(f"{len(names)} names for {X.shape[1]} columns")
            object.__setattr__(self, "names", names)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[float]], names=None) -> "Dataset":
        lengths = {len(c) for c in columns}
        if len(lengths) != 1:
            raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
        return cls(np.column_stack([np.asarray(c, dtype=np.float64) for c in columns]), names)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_cols(self) -> int:
        return self.X.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.X[:, j]

    def take(self, rows) -> "Dataset":
        return Dataset(self.X[rows], self.names)


@dataclass(frozen=True)
class LabeledDataset:
    data: Dataset
    targets: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        y = np.asarray(self.targets, dtype=np.float64)
        w = np.ones_like(y) if self.weights is None else np.asarray(self.weights, dtype=np.float64)
        if y.shape != (self.data.n_rows,) or w.shape != y.shape:
            raise ValueError(
                f"targets {y.shape} / weights {w.shape} do not match {self.data.n_rows} rows"
            )
        if np.any(w < 0) or not w.sum() > 0:
            raise ValueError("weights must be non-negative with a positive sum")
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "weights", w)

    @property
    def X(self) -> np.ndarray:
        return self.data.X

    @property
    def n_rows(self) -> int:
        return self.data.n_rows

    def take(self, rows) -> "LabeledDataset":
        return LabeledDataset(self.data.take(rows), self.targets[rows], self.weights[rows])


def pagie_value(x, y):
    """Pagie polynomial ``1/(1+x^-4) + 1/(1+y^-4)``; zero coordinates give 0.

    Written as ``x^4 / (1 + x^4)``, which equals the original away from 0
    and is the limit at 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x4 = x ** 4
    y4 = y ** 4
    out = x4 / (1.0 + x4) + y4 / (1.0 + y4)
    return float(out) if out.ndim == 0 else out


def pagie_grid(side: int) -> LabeledDataset:
    """``side x side`` inclusive lattice over [-5, 5]^2 with Pagie targets."""
    if side < 2:
        raise ValueError(f"grid side must be >= 2, got {side}")
    axis = np.linspace(*PAGIE_DOMAIN, side)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    x = xx.ravel()
    y = yy.ravel()
    return LabeledDataset(Dataset(np.column_stack([x, y]), ("x", "y")), pagie_value(x, y))


def read_csv(path: Union[str, os.PathLike], has_header: bool = True):
    """Parse a numeric CSV into ``(header or None, (n_rows, n_cols) array)``."""
    rows: List[List[float]] = []
    header = None
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if has_header and header is None:
                header = [c.strip() for c in row]
                width = len(header)
                continue
            if width is None:
                width = len(row)
            if len(row) != width:
                raise CSVFormatError(f"{path}: row {lineno} has {len(row)} fields, expected {width}")
            values = []
            for col, cell in enumerate(row, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CSVFormatError(
                        f"{path}: row {lineno}, column {col}: non-numeric value {cell!r}"
                    ) from None
            rows.append(values)
    if not rows:
        raise CSVFormatError(f"{path}: no data rows")
    return header, np.array(rows, dtype=np.float64)


def load_csv(path, target_column: Union[str, int] = -1, has_header: bool = True,
             weight_column: Union[str, int, None] = None) -> LabeledDataset:
    """Load a CSV; every column other than target (and weight) is a feature.

    Columns may be named (needs a header) or given by position.
    """
    header, table = read_csv(path, has_header)

    def resolve(col, role):
        if isinstance(col, str) and not col.lstrip("-").isdigit():
            if header is None or col not in header:
                raise CSVFormatError(f"{path}: {role} column {col!r} not found in header {header}")
            return header.index(col)
        idx = int(col)
        if not -table.shape[1] <= idx < table.shape[1]:
            raise CSVFormatError(f"{path}: {role} column {idx} out of range")
        return idx % table.shape[1]

    t = resolve(target_column, "target")
    wcol = None if weight_column is None else resolve(weight_column, "weight")
    feats = [j for j in range(table.shape[1]) if j not in (t, wcol)]
    if not feats:
        raise CSVFormatError(f"{path}: no feature columns")
    names = tuple(header[j] for j in feats) if header else None
    weights = table[:, wcol] if wcol is not None else None
    return LabeledDataset(Dataset(table[:, feats], names), table[:, t], weights)


def write_csv(path, columns: Sequence[Sequence[float]], header: Sequence[str] = None) -> None:
    """Write columns as CSV with round-trip float formatting."""
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for row in zip(*cols):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def train_test_split(labeled: LabeledDataset, test_fraction: float,
                     seed: int = 0) -> Tuple[LabeledDataset, LabeledDataset]:
    """Shuffled split with ``ceil(m * test_fraction)`` test rows."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    m = labeled.n_rows
    n_test = math.ceil(m * test_fraction)
    if n_test >= m:
        raise ValueError(f"split of {m} rows at {test_fraction} leaves no training rows")
    perm = np.random.default_rng(seed).permutation(m)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return labeled.take(train_idx), labeled.take(test_idx)
