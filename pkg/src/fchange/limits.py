"""Monte Carlo simulation of the null limit laws.

All limits are suprema over ``t`` of weighted sums of squared Gaussian
processes ``Z_p(t)``:

============  ============================  =============================
family        process ``Z_p``               weight of ``Z_p(t)^2``
============  ============================  =============================
PC            Brownian bridge ``B_p``       1 for ``p <= d``
FF            ``B_p``                       ``lambda_p``
WF            ``B_p``                       ``lambda_p / (lambda_p + lambda_1)``
*-grad        ``G_p`` built from ``B_p``    as above
============  ============================  =============================

with ``G_p(t) = int_0^{1-t} B_p(1 - t - y) dh(y)``. Draws are stored on the
squared scale; :attr:`LimitSamples.values` converts to the scale the
matching statistic is reported on (squared for PC, square root otherwise).

Random numbers come in fixed-size blocks of replicates, each block with its
own stream keyed by ``(seed, block index)``, so results do not depend on
the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import DegeneracyError, ParameterError
from .quadrature import integrate
from .stats_gradual import WeightFn

BLOCK = 128
_CHUNK_BYTES = 64 * 2**20

FAMILIES = ("PC", "FF", "WF")


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _block_rng(seed, block: int) -> np.random.Generator:
    root = _seed_sequence(seed)
    return np.random.default_rng(np.random.SeedSequence(root.entropy, spawn_key=(*root.spawn_key, block)))


def _bridges(rng: np.random.Generator, lead: tuple, steps: int) -> np.ndarray:
    xi = rng.standard_normal((*lead, steps))
    w = np.zeros((*lead, steps + 1))
    np.cumsum(xi, axis=-1, out=w[..., 1:])
    w /= math.sqrt(steps)
    t = np.arange(steps + 1) / steps
    return w - t * w[..., -1:]


def simulate_bridges(count: int, steps: int, seed=None) -> np.ndarray:
    """``count`` standard Brownian bridges on ``steps + 1`` equispaced nodes.

    Each path is ``W(j/N) - (j/N) W(1)`` with ``W`` the scaled cumulative
    sum of standard normals; both endpoints are exactly zero.
    """
    if count < 1 or steps < 2:
        raise ParameterError("need count >= 1 and steps >= 2")
    return _bridges(_block_rng(seed, 0), (count,), steps)


def _increments(h: WeightFn, steps: int) -> np.ndarray:
    y = np.arange(steps + 1) / steps
    return np.diff(h(y))


def gp_paths(h: WeightFn, bridges: np.ndarray) -> np.ndarray:
    """Left-point Riemann-Stieltjes approximation of ``G_p`` on the bridge grid.

    ``G(t_i) = sum_{j < N - i} B(1 - t_i - y_j) (h(y_{j+1}) - h(y_j))`` with
    ``t_i = i / N`` and ``y_j = j / N``. The step weight has a unit mass at
    ``0+`` and gives ``G(t) = B(1 - t)`` exactly.
    """
    bridges = np.asarray(bridges, dtype=float)
    steps = bridges.shape[-1] - 1
    if h.kind == "step":
        return bridges[..., ::-1].copy()
    dh = _increments(h, steps)
    shape = (1,) * (bridges.ndim - 1) + (steps,)
    conv = fftconvolve(bridges, dh.reshape(shape), axes=-1)[..., : steps + 1]
    out = conv[..., ::-1].copy()
    out[..., -1] = 0.0
    return out


def gp_cov(h: WeightFn, s: float, t: float, points: int = 4001) -> float:
    """Covariance of ``G_p(s)`` and ``G_p(t)``.

    ``int_{max(s,t)}^1 h(x-s) h(x-t) dx - int_s^1 h(x-s) dx * int_t^1 h(x-t) dx``,
    by split trapezoid quadrature.
    """
    if not (0 <= s <= 1 and 0 <= t <= 1):
        raise ParameterError("s and t must lie in [0, 1]")
    brk = tuple(s + b for b in h.breakpoints) + tuple(t + b for b in h.breakpoints)
    cross = integrate(lambda x: h(x - s) * h(x - t), max(s, t), 1.0, brk, points)
    ms = integrate(lambda x: h(x - s), s, 1.0, brk, points)
    mt = integrate(lambda x: h(x - t), t, 1.0, brk, points)
    return cross - ms * mt


def _sup_weighted(z: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``max_t sum_p weights[p, k] z[r, p, t]^2`` for every replicate r and column k."""
    nb, p, nt = z.shape
    z2 = np.ascontiguousarray(np.swapaxes(z * z, 1, 2)).reshape(nb * nt, p)
    k = weights.shape[1]
    step = max(1, _CHUNK_BYTES // (8 * nb * nt))
    out = np.empty((nb, k))
    for lo in range(0, k, step):
        hi = min(k, lo + step)
        out[:, lo:hi] = (z2 @ weights[:, lo:hi]).reshape(nb, nt, hi - lo).max(axis=1)
    return out


def simulate_sup(weights, h: WeightFn | None, reps: int, steps: int, seed=None, threads: int = 1) -> np.ndarray:
    """Squared-scale sup draws for a batch of weight vectors.

    Parameters
    ----------
    weights : array_like, shape (P, K)
        Column ``k`` holds the weights of ``Z_1^2, ..., Z_P^2``.
    h : WeightFn or None
        ``None`` uses bridges (abrupt change), otherwise ``G_p`` built with ``h``.
    reps, steps : int
        Number of draws and time steps per path.

    Returns
    -------
    ndarray, shape (reps, K)
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    if w.shape[0] < 1 or reps < 1 or steps < 2:
        raise ParameterError("need at least one component, reps >= 1 and steps >= 2")
    root = _seed_sequence(seed)
    nblocks = -(-reps // BLOCK)

    def block(b: int) -> np.ndarray:
        nb = min(BLOCK, reps - b * BLOCK)
        z = _bridges(_block_rng(root, b), (nb, w.shape[0]), steps)
        if h is not None:
            z = gp_paths(h, z)
        return _sup_weighted(z, w)

    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, range(nblocks)))
    else:
        parts = [block(b) for b in range(nblocks)]
    return np.vstack(parts)


def family_weights(family: str, eigenvalues=None, d: int | None = None) -> np.ndarray:
    """Weights of the squared processes for one limit family."""
    family = family.upper()
    if family == "PC":
        if d is None or d < 1:
            raise ParameterError("PC limit needs d >= 1")
        return np.ones(int(d))
    if family not in ("FF", "WF"):
        raise ParameterError(f"unknown family {family!r}")
    lam = np.asarray(eigenvalues if eigenvalues is not None else [], dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ParameterError("limit simulation needs a non-empty eigenvalue vector")
    if np.any(lam < 0) or np.any(np.diff(lam) > 0):
        raise ParameterError("eigenvalues must be nonnegative and descending")
    if family == "FF":
        return lam
    if not lam[0] > 0:
        raise DegeneracyError("WF limit needs a positive leading eigenvalue")
    return lam / (lam + lam[0])


@dataclass(frozen=True, eq=False)
class LimitSamples:
    """Simulated draws of one sup functional.

    ``squared`` holds the draws of the squared-scale functional; ``values``
    gives them on the scale of the reported statistic.
    """

    family: str
    squared: np.ndarray
    eigenvalues: np.ndarray | None = None
    d: int | None = None
    weight: str | None = None
    seed: object = None
    steps: int | None = None

    @property
    def base(self) -> str:
        return self.family.split("-")[0]

    @property
    def values(self) -> np.ndarray:
        if self.base == "PC":
            return self.squared
        return np.sqrt(self.squared)

    @property
    def reps(self) -> int:
        return self.squared.size


def _limit(family, eigenvalues, d, h, reps, steps, seed, threads) -> LimitSamples:
    w = family_weights(family, eigenvalues, d)
    draws = simulate_sup(w, h, reps, steps, seed, threads)[:, 0]
    label = family.upper() + ("-grad" if h is not None else "")
    lam = None if eigenvalues is None else np.asarray(eigenvalues, dtype=float)
    return LimitSamples(label, draws, lam, d, None if h is None else h.label, seed, steps)


def limit_amoc(family: str, eigenvalues=None, d: int | None = None, reps: int = 2000,
               steps: int = 1000, seed=None, threads: int = 1) -> LimitSamples:
    """Draws of the abrupt-change null limit for ``PC``, ``FF`` or ``WF``."""
    return _limit(family, eigenvalues, d, None, reps, steps, seed, threads)


def limit_gradual(family: str, eigenvalues=None, d: int | None = None, h: WeightFn | None = None,
                  reps: int = 2000, steps: int = 1000, seed=None, threads: int = 1) -> LimitSamples:
    """Draws of the gradual-change null limit built on ``G_p`` with weight ``h``."""
    if h is None:
        raise ParameterError("gradual limit needs a weight function")
    return _limit(family, eigenvalues, d, h, reps, steps, seed, threads)


def crit_value(samples: LimitSamples | np.ndarray, alpha: float) -> float:
    """Empirical ``1 - alpha`` quantile (linear interpolation, Hyndman-Fan type 7)."""
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    values = samples.values if isinstance(samples, LimitSamples) else np.asarray(samples, dtype=float)
    return float(np.quantile(values, 1 - alpha))


def p_value(samples: LimitSamples | np.ndarray, observed: float) -> float:
    """``(1 + #{draws >= observed}) / (R + 1)``."""
    values = samples.values if isinstance(samples, LimitSamples) else np.asarray(samples, dtype=float)
    return float((1 + np.count_nonzero(values >= observed)) / (values.size + 1))
