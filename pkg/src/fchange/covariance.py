"""Lagged and long-run covariance operators of a functional series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .fseries import FSeries, Grid, centered


@dataclass(frozen=True, eq=False)
class LinOp:
    """Integral operator discretized on a grid.

    The action on a curve ``f`` is ``(A f)_j = sum_l weights[l] * kernel[j, l] * f[l]``.
    """

    kernel: np.ndarray
    grid: Grid

    def __post_init__(self):
        k = np.array(self.kernel, dtype=float)
        if k.shape != (self.grid.size, self.grid.size):
            raise DimensionError(f"kernel of shape {k.shape} on a grid of size {self.grid.size}")
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    def apply(self, f):
        """Apply the operator to one curve or to a stack of curves (rows)."""
        f = np.asarray(f, dtype=float)
        return (f * self.grid.weights) @ self.kernel.T

    def adjoint(self) -> "LinOp":
        return LinOp(self.kernel.T, self.grid)

    def __add__(self, other: "LinOp") -> "LinOp":
        if other.grid != self.grid:
            raise DimensionError("operators live on different grids")
        return LinOp(self.kernel + other.kernel, self.grid)

    def __mul__(self, a: float) -> "LinOp":
        return LinOp(a * self.kernel, self.grid)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid: Grid) -> "LinOp":
        return cls(np.zeros((grid.size, grid.size)), grid)

    @classmethod
    def from_eigen(cls, eigenvalues, eigenfunctions, grid: Grid) -> "LinOp":
        """Build ``sum_p lambda_p v_p (x) v_p`` from curves ``v_p`` (rows)."""
        v = np.atleast_2d(np.asarray(eigenfunctions, dtype=float))
        lam = np.asarray(eigenvalues, dtype=float)
        return cls((v.T * lam) @ v, grid)


def _bartlett(x):
    return np.maximum(1.0 - np.abs(x), 0.0)


def _parzen(x):
    a = np.abs(x)
    return np.where(a <= 0.5, 1 - 6 * a**2 + 6 * a**3, np.where(a <= 1, 2 * (1 - a) ** 3, 0.0))


def _flat_top(x):
    # trapezoidal taper: flat on [-1/2, 1/2], linear down to zero at |x| = 1
    a = np.abs(x)
    return np.clip(2.0 * (1.0 - a), 0.0, 1.0)


_KERNELS = {
    "bartlett": (_bartlett, 1.0, 1.0),
    "parzen": (_parzen, 2.0, 1.0),
    "flattop": (_flat_top, math.inf, 1.0),
}


@dataclass(frozen=True)
class KernelFn:
    """Lag-window kernel with its order ``q`` and support ``[-c, c]``."""

    name: str = "bartlett"

    def __post_init__(self):
        name = self.name.lower().replace("-", "").replace("_", "")
        if name in ("flattoptaper", "flattop"):
            name = "flattop"
        if name not in _KERNELS:
            raise ParameterError(f"unknown kernel {self.name!r}; choose from {sorted(_KERNELS)}")
        object.__setattr__(self, "name", name)

    @property
    def order(self) -> float:
        return _KERNELS[self.name][1]

    @property
    def support(self) -> float:
        return _KERNELS[self.name][2]

    def __call__(self, x):
        return _KERNELS[self.name][0](np.asarray(x, dtype=float))


def default_bandwidth(n: int, kernel: KernelFn | str = "bartlett") -> float:
    """Rate-based bandwidth ``n ** (1 / (2q + 1))``, never below one."""
    if n < 2:
        raise ParameterError("need n >= 2")
    k = KernelFn(kernel) if isinstance(kernel, str) else kernel
    p = 2.0 * k.order + 1.0
    h = float(n) ** (1.0 / p)
    if math.isfinite(p) and p == int(p) and round(h) ** int(p) == n:
        h = float(round(h))  # exact root of a perfect power
    return float(min(max(h, 1.0), n))


def _lag_kernel(y: np.ndarray, r: int) -> np.ndarray:
    n = y.shape[0]
    if abs(r) >= n:
        return np.zeros((y.shape[1], y.shape[1]))
    if r >= 0:
        return y[r:].T @ y[: n - r] / n
    return y[: n + r].T @ y[-r:] / n


def lag_cov(xs: FSeries, r: int) -> LinOp:
    """Empirical lag-``r`` autocovariance operator with divisor ``n``.

    For ``r >= 0`` the operator is ``(1/n) sum_i Y_i (x) Y_{i+r}`` with
    ``Y_i = X_i - mean``, which maps ``f`` to ``(1/n) sum_i <Y_i, f> Y_{i+r}``.
    Negative lags give the adjoint. Lags with ``|r| >= n`` give the zero
    operator.
    """
    return LinOp(_lag_kernel(centered(xs), int(r)), xs.grid)


def sample_cov(xs: FSeries) -> LinOp:
    """Lag-zero covariance operator (divisor ``n``)."""
    return lag_cov(xs, 0)


def lrcov(xs: FSeries, kernel: KernelFn | str = "bartlett", bandwidth: float | None = None) -> LinOp:
    """Kernel estimator of the long-run covariance operator.

    Parameters
    ----------
    xs : FSeries
        The sample.
    kernel : KernelFn or str
        Lag window; ``bartlett`` keeps the estimate positive semi-definite.
    bandwidth : float, optional
        Lag-window scale ``h``. Defaults to :func:`default_bandwidth`.

    Returns
    -------
    LinOp
        ``sum_{|r| <= L} K(r/h) C_r`` with ``L = min(n - 1, ceil(c h))``,
        symmetrized.
    """
    k = KernelFn(kernel) if isinstance(kernel, str) else kernel
    n = xs.n
    h = default_bandwidth(n, k) if bandwidth is None else float(bandwidth)
    if not h > 0 or not math.isfinite(h):
        raise ParameterError(f"bandwidth must be positive and finite, got {bandwidth!r}")
    y = centered(xs)
    acc = _lag_kernel(y, 0)
    max_lag = min(n - 1, math.ceil(k.support * h))
    # ascending lag order keeps the reduction deterministic
    for r in range(1, max_lag + 1):
        wr = float(k(r / h))
        if wr == 0.0:
            continue
        c = _lag_kernel(y, r)
        acc = acc + wr * (c + c.T)
    return LinOp((acc + acc.T) / 2, xs.grid)
