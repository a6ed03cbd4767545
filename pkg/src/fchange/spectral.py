"""Eigendecomposition of discretized operators and ridge spectral calculus."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .covariance import LinOp
from .errors import DegeneracyError, InputError, NumericalError, ParameterError
from .fseries import Grid

SYMMETRY_TOL = 1e-8
CLAMP_TOL = 1e-6
TIE_TOL = 1e-6


class TieWarning(UserWarning):
    """Truncation splits a (near-)degenerate eigenspace."""


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Descending eigenvalues with L2-orthonormal eigenfunctions (rows)."""

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    grid: Grid

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=float)
        v = np.array(self.eigenfunctions, dtype=float, ndmin=2)
        if v.shape != (lam.size, self.grid.size):
            raise ParameterError(f"{lam.size} eigenvalues with eigenfunctions of shape {v.shape}")
        lam.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenfunctions", v)

    def __len__(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0]) if len(self) else 0.0

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.eigenvalues > 0))

    def scores(self, f) -> np.ndarray:
        """Coefficients ``<f, v_p>`` for one curve or a stack of curves."""
        return (np.asarray(f, dtype=float) * self.grid.weights) @ self.eigenfunctions.T

    def reconstruct(self) -> LinOp:
        return LinOp.from_eigen(self.eigenvalues, self.eigenfunctions, self.grid)


def eig(op: LinOp) -> Spectrum:
    """Eigenpairs of a self-adjoint discretized operator.

    The weighted problem ``K D v = lambda v`` is solved through the symmetric
    matrix ``D^1/2 K D^1/2`` so that the eigenfunctions come out orthonormal
    in the quadrature inner product. Eigenvalues are sorted in descending
    order; tiny negative values (above ``-1e-6 * lambda_1``) and positive
    values at round-off level are set to zero, larger negative ones raise
    :class:`NumericalError`. Each eigenfunction is
    signed so that its largest-magnitude entry is positive.
    """
    w = op.grid.weights
    if np.any(w <= 0):
        raise ParameterError("eigendecomposition needs strictly positive quadrature weights")
    k = op.kernel
    scale = np.max(np.abs(k)) if k.size else 0.0
    if np.max(np.abs(k - k.T)) > SYMMETRY_TOL * max(scale, 1.0):
        raise InputError("operator kernel is not symmetric")
    sw = np.sqrt(w)
    s = sw[:, None] * ((k + k.T) / 2) * sw[None, :]
    try:
        vals, vecs = np.linalg.eigh(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    v = (vecs[:, order] / sw[:, None]).T

    top = max(vals[0], 0.0)
    floor = -CLAMP_TOL * top - np.finfo(float).eps * max(scale, 1e-300) * w.sum() * k.shape[0]
    if vals[-1] < floor:
        raise NumericalError(
            f"operator has a substantially negative eigenvalue {vals[-1]:.3g} (largest {top:.3g})"
        )
    # values at round-off level relative to lambda_1 are numerically zero
    vals = np.where(vals > 10 * k.shape[0] * np.finfo(float).eps * top, vals, 0.0)

    idx = np.argmax(np.abs(v), axis=1)
    signs = np.sign(v[np.arange(v.shape[0]), idx])
    signs[signs == 0] = 1.0
    v = v * signs[:, None]
    return Spectrum(vals, v, op.grid)


def op_norm(spec: Spectrum) -> float:
    """Operator norm of a positive self-adjoint operator: its top eigenvalue."""
    return spec.lambda1


def _require_positive(spec: Spectrum) -> float:
    lam1 = spec.lambda1
    if not lam1 > 0:
        raise DegeneracyError("the long-run covariance estimate is the zero operator")
    return lam1


def ridge_weights(spec: Spectrum, power: float = -0.5) -> np.ndarray:
    """``(lambda_p + lambda_1) ** power`` for every eigenpair."""
    lam1 = _require_positive(spec)
    return (spec.eigenvalues + lam1) ** power


def ridge_inv_sqrt_apply(spec: Spectrum, f, power: float = -0.5) -> np.ndarray:
    """Apply ``(C + lambda_1 Id) ** power`` by spectral calculus.

    ``f`` may be one curve or a stack of curves (rows). The part of ``f``
    outside the span of the stored eigenfunctions (nonzero only for a
    truncated spectrum) is treated as belonging to eigenvalue zero and is
    scaled by ``lambda_1 ** power``.
    """
    lam1 = _require_positive(spec)
    f = np.asarray(f, dtype=float)
    c = spec.scores(f)
    inside = c @ spec.eigenfunctions
    return (c * ridge_weights(spec, power)) @ spec.eigenfunctions + lam1**power * (f - inside)


def ridge_operator(spec: Spectrum, power: float = -0.5) -> LinOp:
    """Kernel of ``(C + lambda_1 Id) ** power`` on the grid.

    Only meaningful for a full spectrum, where the eigenfunctions span the
    grid space.
    """
    if len(spec) != spec.grid.size:
        raise ParameterError("ridge_operator needs the full discrete spectrum")
    return LinOp.from_eigen(ridge_weights(spec, power), spec.eigenfunctions, spec.grid)


def truncate(spec: Spectrum, count: int | None = None, energy: float | None = None) -> Spectrum:
    """Keep the leading eigenpairs.

    Exactly one of ``count`` (number of pairs) or ``energy`` (fraction of the
    eigenvalue sum to reach) must be given. At least one pair is always kept
    and ``energy=1`` keeps all of them.
    """
    if (count is None) == (energy is None):
        raise ParameterError("give exactly one of count or energy")
    m = len(spec)
    if count is not None:
        if not 1 <= count <= m:
            raise ParameterError(f"count must lie in [1, {m}], got {count}")
        d = int(count)
    else:
        if not 0 < energy <= 1:
            raise ParameterError(f"energy must lie in (0, 1], got {energy}")
        lam = spec.eigenvalues
        total = lam.sum()
        if energy == 1:
            d = m
        elif total <= 0:
            d = 1
        else:
            cum = np.cumsum(lam)
            # relative slack absorbs rounding in the cumulative sum
            hit = np.nonzero(cum >= energy * total * (1 - 1e-12))[0]
            d = int(hit[0]) + 1 if hit.size else m
    return Spectrum(spec.eigenvalues[:d], spec.eigenfunctions[:d], spec.grid)


def components_for_energy(spec: Spectrum, energy: float) -> int:
    return len(truncate(spec, energy=energy))


def split_tie(spec: Spectrum, d: int) -> bool:
    """True when ``lambda_d`` and ``lambda_{d+1}`` coincide to 1e-6 relative."""
    lam = spec.eigenvalues
    if d >= lam.size or d < 1:
        return False
    a, b = lam[d - 1], lam[d]
    return bool(abs(a - b) <= TIE_TOL * max(abs(a), abs(b)) and a > 0)


def warn_if_tie(spec: Spectrum, d: int) -> bool:
    tie = split_tie(spec, d)
    if tie:
        warnings.warn(
            f"eigenvalues {d} and {d + 1} are tied; the first {d} components are not uniquely defined",
            TieWarning,
            stacklevel=3,
        )
    return tie
