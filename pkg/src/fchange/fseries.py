"""Functional samples on a common grid and their L2 geometry.

Curves are plain one-dimensional numpy arrays aligned with a :class:`Grid`.
All integrals are quadrature sums ``sum_j weights[j] * f[j]``, so the grid
weights carry both the domain and the measure.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from os import PathLike

import numpy as np

from .errors import DimensionError, InputError, ParameterError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def trapezoid_weights(points: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights for (possibly non-equispaced) nodes."""
    points = np.asarray(points, dtype=float)
    gaps = np.diff(points)
    w = np.zeros_like(points)
    w[:-1] += gaps / 2
    w[1:] += gaps / 2
    return w


@dataclass(frozen=True, eq=False)
class Grid:
    """Discretization nodes and quadrature weights.

    Parameters
    ----------
    points : array_like
        Strictly increasing abscissae, at least two of them.
    weights : array_like, optional
        Nonnegative quadrature weights. Defaults to trapezoid weights on
        ``points``.
    """

    points: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ParameterError("a grid needs at least two points")
        if not np.all(np.isfinite(pts)) or np.any(np.diff(pts) <= 0):
            raise ParameterError("grid points must be finite and strictly increasing")
        w = trapezoid_weights(pts) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != pts.shape:
            raise DimensionError(f"{w.size} weights for {pts.size} grid points")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise ParameterError("grid weights must be finite, nonnegative, with positive sum")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def uniform(cls, m: int) -> "Grid":
        """Equispaced trapezoid grid with ``m`` nodes on [0, 1]."""
        if m < 2:
            raise ParameterError("a grid needs at least two points")
        w = np.full(m, 1.0 / (m - 1))
        w[0] = w[-1] = 0.5 / (m - 1)
        # nudge the end weights until the rounded total is exactly one
        for i in range(200):
            gap = 1.0 - w.sum()
            if gap == 0.0:
                break
            end = 0 if i % 2 == 0 else -1
            moved = w[end] + gap
            w[end] = moved if moved != w[end] else np.nextafter(w[end], np.sign(gap) * np.inf)
        return cls(np.linspace(0.0, 1.0, m), w)

    @property
    def size(self) -> int:
        return self.points.size

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self is other
            or (
                self.size == other.size
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights)
            )
        )

    __hash__ = object.__hash__


def _check_curve(f, grid: Grid) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[-1:] != (grid.size,):
        raise DimensionError(f"curve of length {f.shape[-1:]} on a grid of size {grid.size}")
    return f


def inner(f, g, grid: Grid):
    """Quadrature inner product ``<f, g>``.

    Accepts stacks of curves along leading axes; the reduction is over the
    last axis.
    """
    f = _check_curve(f, grid)
    g = _check_curve(g, grid)
    return np.sum(grid.weights * f * g, axis=-1)


def norm(f, grid: Grid):
    """L2 norm induced by :func:`inner`."""
    return np.sqrt(np.maximum(inner(f, f, grid), 0.0))


@dataclass(frozen=True, eq=False)
class FSeries:
    """A sample of ``n`` curves stored row-wise in an ``n x m`` array."""

    data: np.ndarray
    grid: Grid = None
    is_centered: bool = field(default=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.data, dtype=float)
        if x.ndim != 2:
            raise DimensionError("series data must be a two-dimensional array")
        grid = Grid.uniform(x.shape[1]) if self.grid is None else self.grid
        if x.shape[1] != grid.size:
            raise DimensionError(f"{x.shape[1]} columns on a grid of size {grid.size}")
        if x.shape[0] < 2:
            raise ParameterError("a series needs at least two curves")
        if not np.all(np.isfinite(x)):
            raise InputError("series contains non-finite values")
        object.__setattr__(self, "data", _frozen(x))
        object.__setattr__(self, "grid", grid)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i):
        return self.data[i]


def mean_curve(xs: FSeries) -> np.ndarray:
    """Pointwise average of the curves.

    The mean is taken relative to the first curve so that identical rows
    yield their common value without rounding.
    """
    anchor = xs.data[0]
    return _frozen(anchor + np.mean(xs.data - anchor, axis=0))


def centered(xs: FSeries) -> np.ndarray:
    """Rows minus the mean curve, as a bare array.

    Identical rows give exact zeros. A series produced by :func:`center` is
    returned as is.
    """
    if xs.is_centered:
        return np.array(xs.data)
    anchored = xs.data - xs.data[0]
    return anchored - np.mean(anchored, axis=0)


def center(xs: FSeries) -> FSeries:
    """Subtract the mean curve from every row.

    The result remembers that it is centered, so centering is exactly
    idempotent.
    """
    if xs.is_centered:
        return xs
    return FSeries(centered(xs), xs.grid, is_centered=True)


@dataclass(frozen=True)
class ScoreMatrix:
    """Projections ``scores[i, p] = <X_i, w_p>`` onto a basis."""

    scores: np.ndarray
    basis_id: str = "custom"


def project_scores(xs: FSeries, basis, basis_id: str = "custom") -> ScoreMatrix:
    """Project every curve of ``xs`` onto the curves in ``basis``."""
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.shape[0] < 1:
        raise ParameterError("need at least one basis curve")
    _check_curve(basis, xs.grid)
    scores = (xs.data * xs.grid.weights) @ basis.T
    return ScoreMatrix(_frozen(scores), basis_id)


def read_csv(path: str | PathLike, header: bool = False) -> FSeries:
    """Load one curve per row.

    With ``header=True`` the first row holds the grid points; otherwise the
    grid is equispaced on [0, 1]. Lines starting with ``#`` are comments.
    Empty or non-numeric cells are errors
    that name the offending row and column (1-based).
    """
    rows = []
    points = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            values = []
            for col, cell in enumerate(row, start=1):
                if not cell.strip():
                    raise InputError(f"{path}: row {lineno}, column {col}: missing value")
                try:
                    v = float(cell)
                except ValueError:
                    raise InputError(f"{path}: row {lineno}, column {col}: not a number: {cell!r}") from None
                if not np.isfinite(v):
                    raise InputError(f"{path}: row {lineno}, column {col}: non-finite value")
                values.append(v)
            if header and points is None:
                points = values
                continue
            if rows and len(values) != len(rows[0]):
                raise InputError(f"{path}: row {lineno} has {len(values)} columns, expected {len(rows[0])}")
            rows.append(values)
    if len(rows) < 2:
        raise InputError(f"{path}: need at least two curves, found {len(rows)}")
    data = np.array(rows)
    if points is not None:
        if len(points) != data.shape[1]:
            raise InputError(f"{path}: header has {len(points)} grid points but rows have {data.shape[1]} columns")
        try:
            grid = Grid(points)
        except ParameterError as exc:
            raise InputError(f"{path}: bad grid header: {exc}") from None
    else:
        grid = Grid.uniform(data.shape[1])
    return FSeries(data, grid)


def write_csv(xs: FSeries, path, header: bool = False, comments=()) -> None:
    """Write one curve per row; ``path`` may also be an open text file.

    ``comments`` are written first as ``#`` lines, which :func:`read_csv` skips.
    """
    if hasattr(path, "write"):
        _write_rows(xs, path, header, comments)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(xs, fh, header, comments)


def _write_rows(xs: FSeries, fh, header: bool, comments) -> None:
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow([repr(float(p)) for p in xs.grid.points])
    for row in xs.data:
        w.writerow([repr(float(v)) for v in row])
