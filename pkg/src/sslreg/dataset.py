"""Data model and CSV ingestion for semi-supervised regression.

A dataset is a labeled block of n rows (predictors plus response) and an
unlabeled block of m rows (predictors only). Pooled moments over all
n + m rows are what the partial-information estimator feeds on; exactly
known population moments enter through `MomentSpec` instead.

CSV layouts supported:

* two-file mode: a labeled file with predictor columns plus the label
  column, and a separate unlabeled file carrying the same predictor
  columns (matched by name, extra columns ignored);
* single-file mode: one file where a row with an empty label cell is
  unlabeled.

Files are UTF-8, comma separated, decimal-point reals, first row header.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyDataError,
    ParseError,
    RankDeficiencyError,
    SchemaError,
    UnderDeterminedError,
)

__all__ = [
    "SemiDataset",
    "MomentSpec",
    "load_csv",
    "write_csv",
    "empirical_moments",
]


def _as_matrix(a, name):
    out = np.array(a, dtype=float, copy=True)
    if out.ndim == 1:
        out = out.reshape(-1, 1)
    if out.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got ndim={out.ndim}")
    return out


@dataclass(frozen=True)
class SemiDataset:
    """Labeled (X, y) rows plus unlabeled X rows with shared columns.

    Immutable after construction; all arrays are float64 copies. The
    concatenation of the two X blocks (labeled first) is the "full
    sample" over which pooled moments are taken.
    """

    labeled_x: np.ndarray
    labeled_y: np.ndarray
    unlabeled_x: np.ndarray = None
    column_names: tuple = None

    def __post_init__(self):
        lx = _as_matrix(self.labeled_x, "labeled_x")
        ly = np.array(self.labeled_y, dtype=float, copy=True).reshape(-1)
        if self.unlabeled_x is None:
            ux = np.empty((0, lx.shape[1]))
        else:
            ux = _as_matrix(self.unlabeled_x, "unlabeled_x")
        if lx.shape[0] == 0:
            raise EmptyDataError("no labeled rows")
        if ly.shape[0] != lx.shape[0]:
            raise ValueError(
                f"labeled_y has {ly.shape[0]} rows but labeled_x has {lx.shape[0]}"
            )
        if ux.shape[1] != lx.shape[1]:
            raise ValueError(
                f"unlabeled block has {ux.shape[1]} columns, labeled has {lx.shape[1]}"
            )
        for name, arr in (("labeled_x", lx), ("labeled_y", ly), ("unlabeled_x", ux)):
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite values")
        names = self.column_names
        if names is None:
            names = tuple(f"x{j + 1}" for j in range(lx.shape[1]))
        else:
            names = tuple(str(c) for c in names)
            if len(names) != lx.shape[1]:
                raise ValueError(
                    f"{len(names)} column names for {lx.shape[1]} columns"
                )
        lx.setflags(write=False)
        ly.setflags(write=False)
        ux.setflags(write=False)
        object.__setattr__(self, "labeled_x", lx)
        object.__setattr__(self, "labeled_y", ly)
        object.__setattr__(self, "unlabeled_x", ux)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self):
        return self.labeled_x.shape[0]

    @property
    def m(self):
        return self.unlabeled_x.shape[0]

    @property
    def p(self):
        return self.labeled_x.shape[1]

    @property
    def full_x(self):
        """All n + m predictor rows, labeled block first."""
        if self.m == 0:
            return self.labeled_x
        return np.vstack([self.labeled_x, self.unlabeled_x])


@dataclass(frozen=True)
class MomentSpec:
    """Exactly known population moments of the predictor vector.

    `mean` is E X (length p) and `second_moment` is E X Xᵀ (p by p).
    The implied covariance E X Xᵀ − (E X)(E X)ᵀ must be positive
    definite, otherwise the population regressions are ill posed.
    """

    mean: np.ndarray
    second_moment: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mean, dtype=float, copy=True).reshape(-1)
        s = np.array(self.second_moment, dtype=float, copy=True)
        if s.ndim == 0:
            s = s.reshape(1, 1)
        if s.shape != (mu.size, mu.size):
            raise ValueError(
                f"second_moment shape {s.shape} does not match mean length {mu.size}"
            )
        if not (np.isfinite(mu).all() and np.isfinite(s).all()):
            raise ValueError("moments contain non-finite values")
        if not np.allclose(s, s.T, rtol=1e-8, atol=1e-12):
            raise ValueError("second_moment is not symmetric")
        s = 0.5 * (s + s.T)
        cov = s - np.outer(mu, mu)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise RankDeficiencyError(
                "population covariance (second_moment - mean meanT) is not "
                "positive definite"
            ) from None
        mu.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "second_moment", s)

    @property
    def p(self):
        return self.mean.size

    @property
    def covariance(self):
        return self.second_moment - np.outer(self.mean, self.mean)


def _parse_cell(text, path, line, column):
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        raise ParseError(
            f"{path}: line {line}, column '{column}': cannot parse {text!r} as a number"
        ) from None
    if not np.isfinite(value):
        raise ParseError(
            f"{path}: line {line}, column '{column}': non-finite value {text!r}"
        )
    return value


def _read_rows(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        rows = [(line, row) for line, row in enumerate(reader, start=2) if row]
    return header, rows


def load_csv(labeled_path, unlabeled_path=None, label_column="y"):
    """Read a semi-supervised dataset from one or two CSV files.

    With only `labeled_path`, rows whose label cell is empty become the
    unlabeled block. With `unlabeled_path` as well, every row of the
    second file is unlabeled; its predictor columns are matched to the
    labeled header by name. Predictor order always follows the labeled
    file header.
    """
    header, rows = _read_rows(labeled_path)
    if label_column not in header:
        raise SchemaError(
            f"{labeled_path}: label column '{label_column}' not found "
            f"(header: {', '.join(header)})"
        )
    predictors = [h for h in header if h != label_column]
    if not predictors:
        raise SchemaError(f"{labeled_path}: no predictor columns besides the label")
    col_idx = {name: header.index(name) for name in header}

    labeled_x, labeled_y, unlabeled_x = [], [], []
    for line, row in rows:
        if len(row) != len(header):
            raise ParseError(
                f"{labeled_path}: line {line}: expected {len(header)} cells, got {len(row)}"
            )
        xs = [
            _parse_cell(row[col_idx[name]], labeled_path, line, name)
            for name in predictors
        ]
        label_text = row[col_idx[label_column]].strip()
        if label_text == "":
            unlabeled_x.append(xs)
        else:
            labeled_x.append(xs)
            labeled_y.append(_parse_cell(label_text, labeled_path, line, label_column))

    if unlabeled_path is not None:
        u_header, u_rows = _read_rows(unlabeled_path)
        missing = [name for name in predictors if name not in u_header]
        if missing:
            raise SchemaError(
                f"{unlabeled_path}: missing predictor columns: {', '.join(missing)}"
            )
        u_idx = {name: u_header.index(name) for name in predictors}
        for line, row in u_rows:
            if len(row) != len(u_header):
                raise ParseError(
                    f"{unlabeled_path}: line {line}: expected {len(u_header)} cells, "
                    f"got {len(row)}"
                )
            unlabeled_x.append(
                [
                    _parse_cell(row[u_idx[name]], unlabeled_path, line, name)
                    for name in predictors
                ]
            )

    if not labeled_x:
        raise EmptyDataError(f"{labeled_path}: no labeled rows")
    p = len(predictors)
    return SemiDataset(
        labeled_x=np.asarray(labeled_x, dtype=float).reshape(-1, p),
        labeled_y=np.asarray(labeled_y, dtype=float),
        unlabeled_x=np.asarray(unlabeled_x, dtype=float).reshape(-1, p),
        column_names=tuple(predictors),
    )


def write_csv(d, path, label_column="y"):
    """Write a dataset in single-file layout (empty label cell = unlabeled).

    Values are written with shortest round-trip float formatting, so
    loading the file back reproduces the arrays bit for bit.
    """
    if label_column in d.column_names:
        raise ValueError(
            f"label column '{label_column}' clashes with a predictor name"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(d.column_names) + [label_column])
        for i in range(d.n):
            writer.writerow(
                [repr(float(v)) for v in d.labeled_x[i]]
                + [repr(float(d.labeled_y[i]))]
            )
        for i in range(d.m):
            writer.writerow([repr(float(v)) for v in d.unlabeled_x[i]] + [""])


def empirical_moments(d):
    """Pooled first and second moments of X over all n + m rows.

    Only predictors enter, so the split into labeled and unlabeled rows
    is irrelevant here. Raises if the pooled covariance is numerically
    singular, naming a dependent column.
    """
    x = d.full_x
    total = x.shape[0]
    if total < 2:
        raise UnderDeterminedError("need at least 2 rows for empirical moments")
    mean = x.mean(axis=0)
    second = (x.T @ x) / total
    centered = x - mean
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        from .linreg import dependent_column_index

        j = dependent_column_index(centered)
        raise RankDeficiencyError(
            f"pooled covariance is singular: column '{d.column_names[j]}' is "
            "linearly dependent on the others (after centering)"
        )
    return MomentSpec(mean=mean, second_moment=second)
