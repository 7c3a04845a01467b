"""Return panels: an ``N x T`` matrix of returns with asset and date labels."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ridgelet.errors import InvalidInput, ParseError


@dataclass(frozen=True)
class ReturnPanel:
    """Returns for ``N`` assets (rows) over ``T`` dates (columns).

    Missing observations are stored as NaN.
    """

    values: np.ndarray
    asset_ids: tuple[str, ...]
    dates: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidInput("panel values must be 2-d (assets x dates)")
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        ids = tuple(str(a) for a in self.asset_ids)
        if values.shape != (len(ids), len(dates)):
            raise InvalidInput(
                f"values shape {values.shape} does not match {len(ids)} assets x {len(dates)} dates"
            )
        if len(set(ids)) != len(ids):
            raise InvalidInput("asset ids must be unique")
        if len(dates) > 1 and np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise InvalidInput("dates must be strictly increasing")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "asset_ids", ids)
        object.__setattr__(self, "dates", dates)

    @classmethod
    def from_array(cls, values, start="2000-01-03") -> "ReturnPanel":
        """Label an unlabeled matrix with ``a0..`` ids and consecutive business days."""
        values = np.asarray(values, dtype=float)
        n, t = values.shape
        dates = np.busday_offset(np.datetime64(start, "D"), np.arange(t), roll="forward")
        return cls(values, tuple(f"a{i}" for i in range(n)), dates)

    @property
    def n_assets(self) -> int:
        return self.values.shape[0]

    @property
    def n_dates(self) -> int:
        return self.values.shape[1]

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def subset(self, assets=None, dates=None) -> "ReturnPanel":
        rows = slice(None) if assets is None else np.asarray(assets)
        cols = slice(None) if dates is None else dates
        ids = np.asarray(self.asset_ids, dtype=object)[rows]
        return ReturnPanel(self.values[rows][:, cols], tuple(ids), self.dates[cols])


def as_matrix(panel, allow_missing: bool = False) -> np.ndarray:
    """Extract the ``N x T`` value matrix from a panel or array-like."""
    values = panel.values if isinstance(panel, ReturnPanel) else np.asarray(panel, dtype=float)
    if values.ndim == 1:
        values = values[None, :]
    if values.ndim != 2 or values.size == 0:
        raise InvalidInput("return panel must be a non-empty N x T matrix")
    if not allow_missing and not np.all(np.isfinite(values)):
        raise InvalidInput("return panel has missing or non-finite entries")
    return values


def load_returns_csv(path) -> ReturnPanel:
    """Read a ``date,<asset>,<asset>,...`` file; empty cells are missing."""
    path = Path(path)
    with path.open(newline="") as fh:
        numbered = [(i, line) for i, line in enumerate(fh, start=1) if not line.startswith("#")]
    if not numbered:
        raise ParseError("empty file", line=1)
    linenos = [i for i, _ in numbered]
    parsed = list(csv.reader(line for _, line in numbered))
    header, header_line = parsed[0], linenos[0]
    if not header or header[0].strip().lower() != "date":
        raise ParseError("first header column must be 'date'", line=header_line)
    assets = [h.strip() for h in header[1:]]
    if not assets:
        raise ParseError("no asset columns", line=header_line)
    if len(set(assets)) != len(assets):
        raise ParseError("duplicate asset columns", line=header_line)
    dates, rows = [], []
    for lineno, row in zip(linenos[1:], parsed[1:]):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        try:
            dates.append(np.datetime64(row[0].strip(), "D"))
        except ValueError:
            raise ParseError(f"bad date {row[0]!r}", line=lineno) from None
        try:
            rows.append([float(c) if c.strip() else np.nan for c in row[1:]])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    dates_arr = np.array(dates, dtype="datetime64[D]")
    if len(np.unique(dates_arr)) != len(dates_arr):
        raise InvalidInput("duplicate dates in return file")
    values = np.array(rows, dtype=float).T.reshape(len(assets), len(dates))
    return ReturnPanel(values, tuple(assets), dates_arr)


def write_returns_csv(panel: ReturnPanel, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *panel.asset_ids])
        for j, d in enumerate(panel.dates):
            col = panel.values[:, j]
            writer.writerow([str(d)] + ["" if np.isnan(x) else repr(float(x)) for x in col])
