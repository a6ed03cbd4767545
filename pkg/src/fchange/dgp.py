"""Synthetic functional time series for size and power studies.

Noise is generated from a truncated Karhunen-Loeve expansion in a Fourier
basis, either independent across time or driven through a functional AR(1)
recursion that is diagonal in the same basis. Mean changes are injected as
``X_i = mu + scale * g(i / n) * delta + eps_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import LinOp
from .errors import DimensionError, ParameterError
from .fseries import FSeries, Grid
from .quadrature import integrate
from .stats_gradual import WeightFn

BURN_IN = 200


def fourier_basis(grid: Grid, count: int) -> np.ndarray:
    """``1, sqrt2 cos(2 pi t), sqrt2 sin(2 pi t), sqrt2 cos(4 pi t), ...`` as rows."""
    if count < 1:
        raise ParameterError("need at least one basis function")
    t = grid.points
    out = np.empty((count, t.size))
    out[0] = 1.0
    for p in range(1, count):
        freq = (p + 1) // 2
        trig = np.cos if p % 2 == 1 else np.sin
        out[p] = np.sqrt(2.0) * trig(2 * np.pi * freq * t)
    return out


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model.

    Parameters
    ----------
    kind : {"iid_kl", "far1"}
    decay : {"polynomial", "exponential"}
        ``lambda_p = p ** -rate`` or ``rate ** p``.
    rate : float
        ``kappa`` for polynomial decay, ``rho`` in (0, 1) for exponential.
    num_terms : int
        Number of Fourier terms in the expansion.
    psi : float
        Operator norm of the AR(1) operator, in [0, 1).
    profile : tuple, optional
        Per-component AR coefficients relative to ``psi`` (entries in
        [-1, 1]); defaults to all ones.
    """

    kind: str = "iid_kl"
    decay: str = "polynomial"
    rate: float | None = None
    num_terms: int = 21
    psi: float = 0.0
    profile: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("iid_kl", "far1"):
            raise ParameterError(f"unknown noise kind {self.kind!r}")
        if self.decay not in ("polynomial", "exponential"):
            raise ParameterError(f"unknown eigenvalue decay {self.decay!r}")
        if self.rate is None:
            object.__setattr__(self, "rate", 2.0 if self.decay == "polynomial" else 0.5)
        if self.decay == "polynomial" and not self.rate > 1:
            raise ParameterError("polynomial decay needs kappa > 1 for summable eigenvalues")
        if self.decay == "exponential" and not 0 < self.rate < 1:
            raise ParameterError("exponential decay needs 0 < rho < 1")
        if self.num_terms < 1:
            raise ParameterError("num_terms must be positive")
        if not 0 <= self.psi < 1:
            raise ParameterError("AR coefficient must lie in [0, 1)")
        if self.profile is not None:
            prof = np.asarray(self.profile, dtype=float)
            if prof.shape != (self.num_terms,) or np.any(np.abs(prof) > 1):
                raise ParameterError("profile needs num_terms entries in [-1, 1]")

    @property
    def eigenvalues(self) -> np.ndarray:
        """Innovation variances of the basis scores."""
        p = np.arange(1, self.num_terms + 1, dtype=float)
        if self.decay == "polynomial":
            return p ** (-self.rate)
        return self.rate**p

    @property
    def ar_coefficients(self) -> np.ndarray:
        prof = np.ones(self.num_terms) if self.profile is None else np.asarray(self.profile, dtype=float)
        coef = self.psi * prof if self.kind == "far1" else np.zeros(self.num_terms)
        return coef

    def long_run_eigenvalues(self) -> np.ndarray:
        """Score variances of the long-run covariance, ``lambda_p / (1 - psi_p)^2``."""
        return self.eigenvalues / (1.0 - self.ar_coefficients) ** 2

    def lag0_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues / (1.0 - self.ar_coefficients**2)

    def long_run_cov(self, grid: Grid) -> LinOp:
        """Exact long-run covariance operator of the noise on ``grid``."""
        return LinOp.from_eigen(self.long_run_eigenvalues(), fourier_basis(grid, self.num_terms), grid)

    def lag0_cov(self, grid: Grid) -> LinOp:
        return LinOp.from_eigen(self.lag0_eigenvalues(), fourier_basis(grid, self.num_terms), grid)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def noise_scores(spec: NoiseSpec, n: int, seed=None) -> np.ndarray:
    """Basis scores of the noise, shape ``(n, num_terms)``.

    Innovations for the kept observations are drawn first and the burn-in
    innovations afterwards, so an AR(1) with ``psi = 0`` reproduces the
    independent model draw for draw.
    """
    if n < 2:
        raise ParameterError("need n >= 2")
    rng = _rng(seed)
    sd = np.sqrt(spec.eigenvalues)
    main = rng.standard_normal((n, spec.num_terms)) * sd
    if spec.kind == "iid_kl":
        return main
    burn = rng.standard_normal((BURN_IN, spec.num_terms)) * sd
    coef = spec.ar_coefficients
    state = np.zeros(spec.num_terms)
    for e in burn:
        state = coef * state + e
    out = np.empty_like(main)
    for i, e in enumerate(main):
        state = coef * state + e
        out[i] = state
    return out


def gen_noise(spec: NoiseSpec, n: int, grid: Grid, seed=None) -> FSeries:
    """Draw ``n`` noise curves on ``grid``."""
    scores = noise_scores(spec, n, seed)
    return FSeries(scores @ fourier_basis(grid, spec.num_terms), grid)


@dataclass(frozen=True)
class ChangeFn:
    """Shape ``g`` of the time-varying mean, with ``g(0) = 0``.

    Kinds and parameters:

    ``amoc``             ``thetas=(theta,)``, ``g(x) = 1[x > theta]``
    ``epidemic``         ``thetas=(t1, t2)``, ``g(x) = 1[t1 < x <= t2]``
    ``multiple``         ``thetas=(t1..tq)``, ``levels=(a1..aq)`` summing to one,
                         ``g(x) = sum_j a_j 1[t_j < x <= t_{j+1}]`` with ``t_{q+1} = 1``
    ``delayed_gradual``  ``thetas=(theta,)``, ``weight=h``, ``g(x) = h(x - theta)``
    ``clc``              ``thetas=(t1, t2)``, linear ramp from 0 at ``t1`` to 1 at ``t2``
    """

    kind: str
    thetas: tuple
    levels: tuple = ()
    weight: WeightFn | None = None

    def __post_init__(self):
        th = tuple(float(t) for t in self.thetas)
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "levels", tuple(float(a) for a in self.levels))
        need = {"amoc": 1, "delayed_gradual": 1, "epidemic": 2, "clc": 2}
        if self.kind in need and len(th) != need[self.kind]:
            raise ParameterError(f"{self.kind} change needs {need[self.kind]} change point(s)")
        if self.kind not in (*need, "multiple"):
            raise ParameterError(f"unknown change kind {self.kind!r}")
        if not th or any(not 0 < t < 1 for t in th) or any(np.diff(th) <= 0):
            raise ParameterError("change points must be increasing and inside (0, 1)")
        if self.kind == "multiple":
            if len(self.levels) != len(th):
                raise ParameterError("multiple change needs one level per change point")
            if abs(sum(self.levels) - 1) > 1e-12:
                raise ParameterError("multiple-change levels must sum to 1")
        if self.kind == "delayed_gradual" and self.weight is None:
            object.__setattr__(self, "weight", WeightFn.power(1.0))

    @classmethod
    def amoc(cls, theta: float) -> "ChangeFn":
        return cls("amoc", (theta,))

    @classmethod
    def epidemic(cls, theta1: float, theta2: float) -> "ChangeFn":
        return cls("epidemic", (theta1, theta2))

    @classmethod
    def multiple(cls, thetas, levels) -> "ChangeFn":
        return cls("multiple", tuple(thetas), tuple(levels))

    @classmethod
    def delayed_gradual(cls, theta: float, h: WeightFn | None = None) -> "ChangeFn":
        return cls("delayed_gradual", (theta,), weight=h)

    @classmethod
    def clc(cls, theta1: float, theta2: float) -> "ChangeFn":
        return cls("clc", (theta1, theta2))

    @property
    def breakpoints(self) -> tuple:
        if self.kind == "delayed_gradual":
            return tuple(self.thetas[0] + b for b in self.weight.breakpoints)
        return self.thetas

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        th = self.thetas
        if self.kind == "amoc":
            return (x > th[0]).astype(float)
        if self.kind == "epidemic":
            return ((x > th[0]) & (x <= th[1])).astype(float)
        if self.kind == "multiple":
            edges = (*th, 1.0)
            out = np.zeros_like(x)
            for a, lo, hi in zip(self.levels, edges[:-1], edges[1:]):
                out = out + a * ((x > lo) & (x <= hi))
            return out
        if self.kind == "delayed_gradual":
            return self.weight(x - th[0])
        return np.clip((x - th[0]) / (th[1] - th[0]), 0.0, 1.0)


def change_eval(g: ChangeFn, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"change function argument {x} outside [0, 1]")
    return float(g(x))


def inject(noise: FSeries, delta, g: ChangeFn, scale: float = 1.0, mu=None) -> FSeries:
    """Add ``scale * g(i / n) * delta`` (and optionally ``mu``) to row ``i``."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (noise.m,):
        raise DimensionError(f"delta of length {delta.shape} on a grid of size {noise.m}")
    n = noise.n
    gi = g(np.arange(1, n + 1) / n)
    data = noise.data + scale * gi[:, None] * delta[None, :]
    if mu is not None:
        mu = np.asarray(mu, dtype=float)
        if mu.shape not in ((), (noise.m,)):
            raise DimensionError("mu must be a scalar or a curve on the grid")
        data = data + mu
    return FSeries(data, noise.grid)


def g0_functional(g: ChangeFn, theta: float, points: int = 2001) -> float:
    """``int_0^theta g - theta * int_0^1 g`` by split trapezoid quadrature."""
    if not 0.0 <= theta <= 1.0:
        raise ParameterError(f"theta {theta} outside [0, 1]")
    brk = g.breakpoints
    return integrate(g, 0.0, theta, brk, points) - theta * integrate(g, 0.0, 1.0, brk, points)
