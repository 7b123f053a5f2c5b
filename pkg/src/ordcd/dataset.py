"""Ordinal datasets: CSV loading, validation and discretization of raw measurements."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateColumn, ParseError, ValidationError


@dataclass(frozen=True, eq=False)
class OrdinalDataset:
    """n x p matrix of 1-based category codes with declared level counts.

    Parameters
    ----------
    values : ndarray of int, shape (n, p)
        Code ``l`` in column ``j`` means the ``l``-th ordered category.
    levels : tuple of int
        ``L_j`` for each column; every code in column ``j`` lies in ``1..L_j``.
    names : tuple of str
        Column labels, used by all text output.
    """

    values: np.ndarray
    levels: tuple
    names: tuple

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.int64)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-d array")
        n, p = values.shape
        levels = tuple(int(x) for x in self.levels)
        names = tuple(str(x) for x in self.names) if self.names is not None else ()
        if not names:
            names = tuple(f"X{j + 1}" for j in range(p))
        if n < 1 or p < 1:
            raise ValidationError("dataset needs at least one row and one column")
        if len(levels) != p or len(names) != p:
            raise ValidationError(f"{p} columns but {len(levels)} levels and {len(names)} names")
        if len(set(names)) != p:
            raise ValidationError("column names must be unique")
        for j, L in enumerate(levels):
            if L < 2:
                raise DegenerateColumn(f"column {names[j]!r} declares {L} level(s); need >= 2")
            col = values[:, j]
            lo, hi = int(col.min()), int(col.max())
            if lo < 1 or hi > L:
                bad = lo if lo < 1 else hi
                raise ValidationError(f"column {names[j]!r}: code {bad} outside 1..{L}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, j: int) -> np.ndarray:
        """Codes of 1-based column ``j``."""
        return self.values[:, j - 1]

    def subset(self, columns: Sequence[int]) -> "OrdinalDataset":
        """New dataset with the given 1-based columns, in that order."""
        idx = [c - 1 for c in columns]
        return OrdinalDataset(
            self.values[:, idx], tuple(self.levels[i] for i in idx), tuple(self.names[i] for i in idx)
        )

    def take_rows(self, rows) -> "OrdinalDataset":
        return OrdinalDataset(self.values[np.asarray(rows)], self.levels, self.names)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        w.writerows(self.values.tolist())
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def __eq__(self, other):
        if not isinstance(other, OrdinalDataset):
            return NotImplemented
        return (
            self.levels == other.levels
            and self.names == other.names
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    if not rows:
        raise ParseError(f"{path}: empty file, header row required")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for i, r in enumerate(body, 2):
        if len(r) != len(header):
            raise ParseError(f"{path}: line {i} has {len(r)} cells, header has {len(header)}")
    if not body:
        raise ParseError(f"{path}: no data rows")
    return header, body


def read_real_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and float matrix; used by the discretization front ends."""
    header, body = _read_rows(path)
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not np.all(np.isfinite(data)):
        raise ParseError(f"{path}: missing or non-finite values")
    return header, data


def parse_levels(spec: str | Sequence[int] | None):
    """``"auto"``/None -> None; ``"3,3,5"`` -> [3, 3, 5]."""
    if spec is None:
        return None
    if isinstance(spec, str):
        if spec.strip().lower() == "auto":
            return None
        try:
            return [int(x) for x in spec.split(",")]
        except ValueError as exc:
            raise ParseError(f"bad --levels value {spec!r}") from exc
    return [int(x) for x in spec]


def from_csv(path, levels=None) -> OrdinalDataset:
    """Load pre-coded ordinal data.

    ``levels=None`` (auto mode) takes ``L_j`` as the largest observed code;
    otherwise a list of declared level counts, one per column.
    """
    header, body = _read_rows(path)
    values = np.empty((len(body), len(header)), dtype=np.int64)
    for i, r in enumerate(body):
        for j, cell in enumerate(r):
            try:
                values[i, j] = int(cell.strip())
            except ValueError:
                raise ParseError(f"{path}: row {i + 2}, column {header[j]!r}: {cell!r} is not an integer") from None
    if levels is None:
        if values.min() < 1:
            raise ValidationError(f"{path}: codes are 1-based, found {values.min()}")
        lv = [int(values[:, j].max()) for j in range(values.shape[1])]
        for j, L in enumerate(lv):
            if L < 2 or np.unique(values[:, j]).size < 2:
                raise DegenerateColumn(f"{path}: column {header[j]!r} is constant")
    else:
        lv = list(levels)
        if len(lv) != len(header):
            raise ValidationError(f"{len(lv)} declared levels for {len(header)} columns")
    return OrdinalDataset(values, tuple(lv), tuple(header))


def _order_statistic_cut(sorted_vals: np.ndarray, t: float) -> float:
    """q_t: the ceil(t*n)-th order statistic (right-continuous inverse ECDF)."""
    n = sorted_vals.size
    k = max(1, math.ceil(round(t * n, 12)))
    return sorted_vals[k - 1]


def quantile_discretize(raw, L: int) -> np.ndarray:
    """Codes ``1..L`` by cutting at the empirical ``l/L`` quantiles.

    Value ``v`` gets code ``l`` iff ``q_{(l-1)/L} < v <= q_{l/L}``. Raises
    :class:`DegenerateColumn` if ties leave any bin empty.
    """
    x = np.asarray(raw, dtype=float).ravel()
    if L < 2:
        raise ValidationError("need L >= 2")
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ValidationError("raw values must be finite and non-empty")
    s = np.sort(x)
    cuts = np.array([_order_statistic_cut(s, l / L) for l in range(1, L)])
    codes = np.searchsorted(cuts, x, side="left") + 1
    counts = np.bincount(codes, minlength=L + 1)[1:]
    if np.any(counts == 0):
        raise DegenerateColumn(f"quantile cut into {L} bins leaves an empty bin (too many ties)")
    return codes.astype(np.int64)


def trichotomize_zero_median(raw) -> np.ndarray:
    """1 for zero, 2 for ``0 < v <= median(nonzero)``, 3 above."""
    x = np.asarray(raw, dtype=float).ravel()
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValidationError("trichotomization expects finite nonnegative values")
    nz = x[x > 0]
    if nz.size == 0 or np.all(x > 0):
        raise DegenerateColumn("need both zero and nonzero values")
    med = float(np.median(nz))
    codes = np.where(x == 0, 1, np.where(x <= med, 2, 3)).astype(np.int64)
    if np.any(np.bincount(codes, minlength=4)[1:] == 0):
        raise DegenerateColumn("a trichotomization bin is empty")
    return codes


def discretize_matrix(names, data: np.ndarray, L: int | None = None, zero_median: bool = False) -> OrdinalDataset:
    """Column-wise discretization of a real matrix into an :class:`OrdinalDataset`."""
    cols = []
    for j in range(data.shape[1]):
        try:
            if zero_median:
                cols.append(trichotomize_zero_median(data[:, j]))
            else:
                cols.append(quantile_discretize(data[:, j], L))
        except DegenerateColumn as exc:
            raise DegenerateColumn(f"column {names[j]!r}: {exc}") from None
    levels = (3,) * data.shape[1] if zero_median else (L,) * data.shape[1]
    return OrdinalDataset(np.column_stack(cols), levels, tuple(names))
