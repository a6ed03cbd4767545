"""CUSUM-type statistics for an abrupt change in the mean.

Three families are provided:

* ``FF`` -- the plain functional CUSUM norm, ``max_k ||S_k||``;
* ``WF`` -- the CUSUM after the ridge whitening ``(C + lambda_1 Id)^{-1/2}``;
* ``PC`` -- the squared CUSUM of the leading ``d`` long-run principal
  component scores, each standardized by its eigenvalue.

``S_k = n^{-1/2} sum_{i <= k} (X_i - mean)`` for ``k = 1, ..., n - 1``. The
FF and WF statistics are reported unsquared, PC squared.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParameterError, RankError
from .fseries import FSeries, centered
from .spectral import Spectrum, ridge_inv_sqrt_apply, ridge_weights, warn_if_tie


@dataclass
class TestReport:
    """Outcome of one test.

    ``statistic`` is on the reported scale (squared for PC). ``khat`` is the
    smallest maximizing ``k`` and ``theta_hat = khat / n``.
    """

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    khat: int
    theta_hat: float
    method: str
    weight: str | None = None
    d_used: int | None = None
    pvalue: float | None = None
    critical_value: float | None = None
    alpha: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def reject(self) -> bool | None:
        if self.critical_value is not None:
            return bool(self.statistic > self.critical_value)
        if self.pvalue is not None and self.alpha is not None:
            return bool(self.pvalue <= self.alpha)
        return None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["reject"] = self.reject
        return out


def cusum_process(xs: FSeries) -> np.ndarray:
    """Scaled centered partial sums, one curve per ``k = 1, ..., n - 1`` (rows)."""
    y = centered(xs)
    return np.cumsum(y, axis=0)[:-1] / np.sqrt(xs.n)


def _scan(values: np.ndarray) -> tuple[float, int]:
    """Max over the k-scan and the smallest 1-based maximizer."""
    i = int(np.argmax(values))
    return float(values[i]), i + 1


def _report(value, k, n, method, **kw) -> TestReport:
    return TestReport(statistic=float(value), khat=int(k), theta_hat=k / n, method=method, **kw)


def _vanishes(proc: np.ndarray) -> bool:
    return not np.any(proc)


def ff_from_process(proc: np.ndarray, xs: FSeries, method="FF", **kw) -> TestReport:
    sq = (proc**2) @ xs.grid.weights
    value, k = _scan(sq)
    return _report(np.sqrt(max(value, 0.0)), k, xs.n, method, **kw)


def wf_from_process(proc: np.ndarray, xs: FSeries, lr: Spectrum, form: str, method="WF", **kw) -> TestReport:
    if _vanishes(proc):
        return _report(0.0, 1, xs.n, method, **kw)
    if form == "operator":
        white = ridge_inv_sqrt_apply(lr, proc)
        sq = (white**2) @ xs.grid.weights
    elif form == "spectral":
        if len(lr) != xs.m:
            raise ParameterError("the spectral form needs the full discrete spectrum")
        sq = (lr.scores(proc) ** 2) @ ridge_weights(lr, -1.0)
    else:
        raise ParameterError(f"unknown form {form!r}")
    value, k = _scan(sq)
    return _report(np.sqrt(max(value, 0.0)), k, xs.n, method, **kw)


def pc_from_process(proc: np.ndarray, xs: FSeries, lr: Spectrum, d: int, method="PC", **kw) -> TestReport:
    if not 1 <= d <= len(lr):
        raise ParameterError(f"need 1 <= d <= {len(lr)}, got {d}")
    meta = kw.pop("metadata", {})
    if _vanishes(proc):
        return _report(0.0, 1, xs.n, method, d_used=d, metadata=meta, **kw)
    lam = lr.eigenvalues[:d]
    if not lam[-1] > 0:
        raise RankError(f"eigenvalue {d} of the long-run covariance is zero; lower d")
    meta["tie_warning"] = warn_if_tie(lr, d)
    scores = (proc * xs.grid.weights) @ lr.eigenfunctions[:d].T
    sq = (scores**2) @ (1.0 / lam)
    value, k = _scan(sq)
    return _report(value, k, xs.n, method, d_used=d, metadata=meta, **kw)


def t_ff(xs: FSeries) -> TestReport:
    """Fully functional statistic ``max_k ||S_k||``."""
    return ff_from_process(cusum_process(xs), xs)


def t_ff_spectral(xs: FSeries, basis: Spectrum) -> TestReport:
    """FF statistic through squared scores in a complete orthonormal basis.

    By Parseval this equals :func:`t_ff` when ``basis`` is a full spectrum.
    """
    if len(basis) != xs.m:
        raise ParameterError("the spectral form needs the full discrete spectrum")
    sq = np.sum(basis.scores(cusum_process(xs)) ** 2, axis=1)
    value, k = _scan(sq)
    return _report(np.sqrt(max(value, 0.0)), k, xs.n, "FF")


def t_wf(xs: FSeries, lr: Spectrum, form: str = "operator") -> TestReport:
    """Weighted functional statistic ``max_k ||(C + lambda_1 Id)^{-1/2} S_k||``.

    ``form="operator"`` applies the ridge operator to the CUSUM curves;
    ``form="spectral"`` sums ``(lambda_p + lambda_1)^{-1} <S_k, v_p>^2``
    over the full spectrum. Both give the same value.
    """
    return wf_from_process(cusum_process(xs), xs, lr, form)


def t_pc(xs: FSeries, lr: Spectrum, d: int) -> TestReport:
    """Squared CUSUM of the first ``d`` long-run principal component scores.

    Raises
    ------
    RankError
        If ``lambda_d`` is zero.
    """
    return pc_from_process(cusum_process(xs), xs, lr, d)


__all__ = [
    "TestReport",
    "cusum_process",
    "t_ff",
    "t_ff_spectral",
    "t_wf",
    "t_pc",
]
