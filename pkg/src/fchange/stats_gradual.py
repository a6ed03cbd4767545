"""Statistics for a delayed gradual change in the mean.

The CUSUM indicator is replaced by a weight ``h((i - k) / n)``: for each
``k = 1, ..., n - 1`` the process entry is

    n^{-1/2} sum_{i=1}^{n} h((i - k) / n) (X_i - mean).

``h`` vanishes on ``(-inf, 0]``. With the step weight ``h(x) = 1[x > 0]`` the
process is the negated CUSUM, so every gradual statistic reduces to its
abrupt counterpart. The step weight is not Hölder continuous and lies
outside the gradual asymptotic theory; it is kept as that bridge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fseries import FSeries, centered
from .quadrature import integrate
from .spectral import Spectrum
from .stats_amoc import TestReport, ff_from_process, pc_from_process, wf_from_process


@dataclass(frozen=True)
class WeightFn:
    """Gradual-change weight ``h`` on ``[-1, 1]``.

    Use the constructors :meth:`power`, :meth:`step`, :meth:`tabulated` or
    :meth:`parse` rather than the raw fields.
    """

    kind: str
    alpha: float = 1.0
    knots: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("power", "step", "tabulated"):
            raise ParameterError(f"unknown weight kind {self.kind!r}")
        if self.kind == "power" and not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise ParameterError("power weight needs alpha > 0")
        if self.kind == "tabulated":
            x = np.asarray(self.knots, dtype=float)
            y = np.asarray(self.values, dtype=float)
            if x.ndim != 1 or x.shape != y.shape or x.size < 1:
                raise ParameterError("tabulated weight needs matching knots and values")
            if np.any(x <= 0) or np.any(x > 1) or np.any(np.diff(x) <= 0):
                raise ParameterError("knots must be strictly increasing in (0, 1]")
            if not np.all(np.isfinite(y)) or not np.any(y):
                raise ParameterError("tabulated weight must be finite and non-constant")

    @classmethod
    def power(cls, alpha: float = 1.0) -> "WeightFn":
        """``h(x) = max(x, 0) ** alpha``."""
        return cls("power", alpha=float(alpha))

    @classmethod
    def step(cls) -> "WeightFn":
        """``h(x) = 1[x > 0]``; turns every gradual statistic into the abrupt one."""
        return cls("step")

    @classmethod
    def tabulated(cls, knots, values) -> "WeightFn":
        """Piecewise linear through ``(0, 0)`` and the knots, constant after the last."""
        return cls("tabulated", knots=tuple(map(float, knots)), values=tuple(map(float, values)))

    @classmethod
    def parse(cls, text: str) -> "WeightFn":
        """Read ``"power:<alpha>"``, ``"power"`` or ``"step"``."""
        text = text.strip().lower()
        if text == "step":
            return cls.step()
        if text == "power":
            return cls.power(1.0)
        if text.startswith("power:"):
            try:
                return cls.power(float(text.split(":", 1)[1]))
            except ValueError:
                pass
        raise ParameterError(f"cannot parse weight {text!r}; use power:<alpha> or step")

    @property
    def label(self) -> str:
        if self.kind == "power":
            return f"power:{self.alpha:g}"
        return self.kind

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pos = np.maximum(x, 0.0)
        if self.kind == "power":
            return np.where(x > 0, pos**self.alpha, 0.0)
        if self.kind == "step":
            return (x > 0).astype(float)
        kx = np.concatenate(([0.0], self.knots))
        ky = np.concatenate(([0.0], self.values))
        return np.where(x > 0, np.interp(pos, kx, ky), 0.0)

    @property
    def breakpoints(self) -> tuple:
        """Points where ``h`` may jump or kink."""
        return (0.0, *self.knots)

    @property
    def total_variation(self) -> float:
        """Total variation of ``h`` over ``[-1, 1]``."""
        if self.kind in ("power", "step"):
            return 1.0
        return float(np.sum(np.abs(np.diff(np.concatenate(([0.0], self.values))))))

    @property
    def holder(self) -> tuple[float, float] | None:
        """``(exponent, constant)`` of a Hölder bound on ``[0, 1]``; ``None`` for the step."""
        if self.kind == "step":
            return None
        if self.kind == "power":
            if self.alpha <= 1:
                return self.alpha, 1.0
            return 1.0, self.alpha
        kx = np.concatenate(([0.0], self.knots))
        ky = np.concatenate(([0.0], self.values))
        return 1.0, float(np.max(np.abs(np.diff(ky) / np.diff(kx))))


def weight_eval(h: WeightFn, x: float) -> float:
    """``h(x)`` for ``x`` in ``[-1, 1]``."""
    if not -1.0 <= x <= 1.0:
        raise ParameterError(f"weight argument {x} outside [-1, 1]")
    return float(h(x))


def weight_matrix(h: WeightFn, n: int) -> np.ndarray:
    """``W[k - 1, i - 1] = h((i - k) / n)`` for ``k < n`` and ``i <= n``."""
    i = np.arange(1, n + 1)
    k = np.arange(1, n)
    return h((i[None, :] - k[:, None]) / n)


def weighted_sum_process(xs: FSeries, h: WeightFn) -> np.ndarray:
    """Weighted sums of the centered curves, one row per ``k = 1, ..., n - 1``."""
    return weight_matrix(h, xs.n) @ centered(xs) / np.sqrt(xs.n)


def t_ff_grad(xs: FSeries, h: WeightFn) -> TestReport:
    """``max_k`` of the norm of the weighted sum process."""
    return ff_from_process(weighted_sum_process(xs, h), xs, weight=h.label)


def t_wf_grad(xs: FSeries, h: WeightFn, lr: Spectrum, form: str = "operator") -> TestReport:
    """Weighted sum process after ridge whitening with ``lr``."""
    return wf_from_process(weighted_sum_process(xs, h), xs, lr, form, weight=h.label)


def t_pc_grad(xs: FSeries, h: WeightFn, lr: Spectrum, d: int) -> TestReport:
    """Squared, eigenvalue-standardized weighted sums of the first ``d`` scores."""
    return pc_from_process(weighted_sum_process(xs, h), xs, lr, d, weight=h.label)


def detectability_signal(g, h: WeightFn, tgrid: int = 201, points: int = 2001) -> float:
    """Sup over ``t`` of ``|int h(x - t) g(x) dx - int g dx * int h(x - t) dx|``.

    ``g`` is a change function (anything with ``__call__`` and optional
    ``breakpoints``); integrals run over ``[0, 1]`` with the composite
    trapezoid rule split at the jumps of ``g`` and ``h(. - t)``. The sup is
    taken over ``tgrid`` equispaced values of ``t`` in ``[0, 1]``.
    """
    if tgrid < 2:
        raise ParameterError("tgrid must be at least 2")
    gb = tuple(getattr(g, "breakpoints", ()))
    int_g = integrate(g, 0.0, 1.0, gb, points)
    best = 0.0
    for t in np.linspace(0.0, 1.0, tgrid):
        brk = gb + tuple(t + b for b in h.breakpoints)
        cross = integrate(lambda x: h(x - t) * g(x), 0.0, 1.0, brk, points)
        mass = integrate(lambda x: h(x - t), 0.0, 1.0, brk, points)
        best = max(best, abs(cross - int_g * mass))
    return best
