"""End-to-end detection and Monte Carlo size/power studies."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .covariance import KernelFn, default_bandwidth, lrcov
from .dgp import ChangeFn, NoiseSpec, fourier_basis, gen_noise, inject
from .errors import DegeneracyError, ParameterError
from .fseries import FSeries, Grid, centered, read_csv
from .limits import LimitSamples, crit_value, family_weights, limit_amoc, limit_gradual, p_value, simulate_sup
from .spectral import Spectrum, components_for_energy, eig
from .stats_amoc import TestReport, t_ff, t_pc, t_wf
from .stats_gradual import WeightFn, t_ff_grad, t_pc_grad, t_wf_grad

METHODS = ("pc", "ff", "wf")
DEFAULT_ENERGY = 0.9


@dataclass
class RunConfig:
    """Tuning choices of one detection run.

    ``h=None`` selects the abrupt-change statistic; a weight spec such as
    ``"power:1"`` selects the gradual one. ``bandwidth=None`` uses the
    rate-based default. For PC, ``d`` wins over ``energy``; if both are
    missing the smallest ``d`` explaining 90% of the long-run variance is used.
    """

    method: str = "wf"
    h: str | None = None
    kernel: str = "bartlett"
    bandwidth: float | None = None
    d: int | None = None
    energy: float | None = None
    alpha: float = 0.05
    reps: int = 2000
    steps: int = 1000
    seed: int = 0
    threads: int = 1
    input: str | None = None
    output: str | None = None
    header: bool = False

    def __post_init__(self):
        self.method = self.method.lower()
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0 < self.alpha < 1:
            raise ParameterError("alpha must lie in (0, 1)")
        if self.reps < 100:
            raise ParameterError("need at least 100 Monte Carlo replicates for p-values")
        if self.steps < 2:
            raise ParameterError("need at least 2 time steps for the limit simulation")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ParameterError("bandwidth must be positive")
        if self.d is not None and self.d < 1:
            raise ParameterError("d must be positive")
        if self.energy is not None and not 0 < self.energy <= 1:
            raise ParameterError("energy must lie in (0, 1]")
        KernelFn(self.kernel)
        if self.h is not None:
            WeightFn.parse(self.h)

    @property
    def weight(self) -> WeightFn | None:
        return None if self.h is None else WeightFn.parse(self.h)


def estimate_spectrum(xs: FSeries, kernel: str = "bartlett", bandwidth: float | None = None) -> tuple[Spectrum, float]:
    h = default_bandwidth(xs.n, KernelFn(kernel)) if bandwidth is None else float(bandwidth)
    return eig(lrcov(xs, kernel, h)), h


def choose_d(spec: Spectrum, d: int | None, energy: float | None) -> int:
    """``d`` if given, else the smallest count reaching ``energy``, capped at the rank."""
    if d is not None:
        return int(d)
    chosen = components_for_energy(spec, DEFAULT_ENERGY if energy is None else energy)
    return max(1, min(chosen, spec.rank))


def statistic(xs: FSeries, method: str, spec: Spectrum, h: WeightFn | None = None, d: int | None = None) -> TestReport:
    """Evaluate one of the six statistics."""
    method = method.lower()
    if method == "ff":
        return t_ff(xs) if h is None else t_ff_grad(xs, h)
    if method == "wf":
        return t_wf(xs, spec) if h is None else t_wf_grad(xs, h, spec)
    if method == "pc":
        return t_pc(xs, spec, d) if h is None else t_pc_grad(xs, h, spec, d)
    raise ParameterError(f"unknown method {method!r}")


def _summary(spec: Spectrum, top: int = 10) -> dict:
    lam = spec.eigenvalues
    return {
        "count": int(lam.size),
        "positive": spec.rank,
        "lambda1": float(spec.lambda1),
        "trace": float(lam.sum()),
        "leading": [float(x) for x in lam[:top]],
    }


def analyze(xs: FSeries, cfg: RunConfig) -> TestReport:
    """Statistic, plug-in limit simulation, critical value and p-value for ``xs``."""
    spec, bw = estimate_spectrum(xs, cfg.kernel, cfg.bandwidth)
    h = cfg.weight
    d = choose_d(spec, cfg.d, cfg.energy) if cfg.method == "pc" else None
    meta = {
        "n": xs.n,
        "m": xs.m,
        "kernel": KernelFn(cfg.kernel).name,
        "bandwidth": bw,
        "spectrum": _summary(spec),
        "limit": {"reps": cfg.reps, "steps": cfg.steps, "seed": cfg.seed},
    }
    if not np.any(centered(xs)):
        # no variation at all: every statistic is zero and every draw exceeds it
        rep = TestReport(0.0, 1, 1 / xs.n, cfg.method.upper(), None if h is None else h.label, d,
                         pvalue=1.0, critical_value=None, alpha=cfg.alpha)
        meta["degenerate"] = True
        rep.metadata.update(meta)
        return rep
    if not spec.lambda1 > 0:
        raise DegeneracyError("the long-run covariance estimate is the zero operator")
    rep = statistic(xs, cfg.method, spec, h, d)
    lim = limit_for(cfg.method, spec.eigenvalues, d, h, cfg.reps, cfg.steps, cfg.seed, cfg.threads)
    rep.critical_value = crit_value(lim, cfg.alpha)
    rep.pvalue = p_value(lim, rep.statistic)
    rep.alpha = cfg.alpha
    rep.metadata.update(meta)
    return rep


def limit_for(method, eigenvalues, d, h, reps, steps, seed, threads) -> LimitSamples:
    """Null limit draws for ``method`` with the gradual weight ``h`` (``None`` for abrupt)."""
    if h is None:
        return limit_amoc(method.upper(), eigenvalues, d, reps, steps, seed, threads)
    return limit_gradual(method.upper(), eigenvalues, d, h, reps, steps, seed, threads)


def detect_pipeline(cfg: RunConfig) -> TestReport:
    """Read ``cfg.input`` and run :func:`analyze` on it."""
    if cfg.input is None:
        raise ParameterError("no input file given")
    return analyze(read_csv(cfg.input, header=cfg.header), cfg)


# ---------------------------------------------------------------------------
# simulation studies


def _stream(seed, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


_LIMIT_KEY = 1_000_003


def parse_change(spec: dict) -> ChangeFn:
    spec = dict(spec)
    kind = spec.pop("kind")
    thetas = spec.pop("thetas", None)
    if thetas is None:
        thetas = [spec.pop("theta")]
    h = spec.pop("h", None)
    levels = spec.pop("levels", ())
    if spec:
        raise ParameterError(f"unknown change keys {sorted(spec)}")
    return ChangeFn(kind, tuple(thetas), tuple(levels), None if h is None else WeightFn.parse(h))


def change_label(g: ChangeFn) -> str:
    parts = [g.kind, *(f"{t:g}" for t in g.thetas)]
    if g.weight is not None:
        parts.append(g.weight.label)
    return ":".join(parts)


@dataclass
class StudySpec:
    """Grid of a simulation study.

    ``methods`` entries are ``pc``, ``ff``, ``wf`` or their ``-grad``
    variants (which use ``h``). ``delta`` holds Fourier coefficients of the
    change direction. ``steps=None`` matches the limit grid to ``n``.
    """

    methods: list = field(default_factory=lambda: ["ff", "wf", "pc"])
    alternatives: list = field(default_factory=lambda: [{"kind": "amoc", "thetas": [0.5]}])
    scales: list = field(default_factory=lambda: [0.0])
    n: list = field(default_factory=lambda: [200])
    m: int = 51
    noise: dict = field(default_factory=dict)
    delta: list = field(default_factory=lambda: [1.0])
    h: str = "power:1"
    d: int | None = 3
    energy: float | None = None
    kernel: str = "bartlett"
    bandwidth: float | None = None
    alpha: float = 0.05
    reps: int = 500
    mc_reps: int = 2000
    steps: int | None = 1000
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for meth in self.methods:
            base = meth.lower().removesuffix("-grad")
            if base not in METHODS:
                raise ParameterError(f"unknown study method {meth!r}")
        if not 0 < self.alpha < 1 or self.reps < 1 or self.mc_reps < 1:
            raise ParameterError("invalid alpha or replicate counts")
        if any(s < 0 for s in self.scales):
            raise ParameterError("signal scales must be nonnegative")
        if any(n < 2 for n in self.n):
            raise ParameterError("sample sizes must be at least 2")
        WeightFn.parse(self.h)
        NoiseSpec(**self.noise)
        for alt in self.alternatives:
            parse_change(alt)

    @classmethod
    def from_dict(cls, d: dict) -> "StudySpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown study keys {sorted(unknown)}")
        return cls(**d)


@dataclass
class StudyRow:
    n: int
    alternative: str
    scale: float
    method: str
    reps: int
    rejection_rate: float
    mc_se: float
    mean_abs_theta_error: float | None


def _dataset_stats(xs: FSeries, study: StudySpec, h: WeightFn):
    spec, _ = estimate_spectrum(xs, study.kernel, study.bandwidth)
    d = choose_d(spec, study.d, study.energy)
    out = {}
    for meth in study.methods:
        base = meth.lower().removesuffix("-grad")
        hh = h if meth.lower().endswith("-grad") else None
        out[meth] = statistic(xs, base, spec, hh, d)
    return spec.eigenvalues, d, out


def power_study(study: StudySpec | dict) -> list[StudyRow]:
    """Rejection rates over methods x alternatives x scales x sample sizes.

    Noise is drawn once per ``(n, replicate)`` and reused across every
    alternative, scale and method, so cells are paired. Every dataset gets
    critical values from its own eigenvalues; the limit draws themselves
    share one random stream per ``(n, method)``.
    """
    if isinstance(study, dict):
        study = StudySpec.from_dict(study)
    noise_spec = NoiseSpec(**study.noise)
    h = WeightFn.parse(study.h)
    grid = Grid.uniform(study.m)
    coeffs = np.asarray(study.delta, dtype=float)
    delta = coeffs @ fourier_basis(grid, coeffs.size)
    alts = [parse_change(a) for a in study.alternatives]
    rows = []
    for n in study.n:
        steps = n if study.steps is None else study.steps
        cells = list(itertools.product(range(len(alts)), study.scales))

        def one(rep: int):
            noise = gen_noise(noise_spec, n, grid, _stream(study.seed, n, rep))
            return [_dataset_stats(inject(noise, delta, alts[a], s), study, h) for a, s in cells]

        if study.threads > 1:
            with ThreadPoolExecutor(max_workers=study.threads) as pool:
                results = list(pool.map(one, range(study.reps)))
        else:
            results = [one(r) for r in range(study.reps)]

        for mi, meth in enumerate(study.methods):
            base = meth.lower().removesuffix("-grad")
            hh = h if meth.lower().endswith("-grad") else None
            flat = [res[c] for res in results for c in range(len(cells))]
            stats = np.array([f[2][meth].statistic for f in flat])
            if base == "pc":
                ds = np.array([f[1] for f in flat])
                w = (np.arange(1, ds.max() + 1)[:, None] <= ds[None, :]).astype(float)
            else:
                w = np.column_stack([family_weights(base.upper(), f[0]) for f in flat])
            # identical weight columns share their simulated quantile
            uniq, inverse = np.unique(w, axis=1, return_inverse=True)
            sq = simulate_sup(uniq, hh, study.mc_reps, steps, np.random.SeedSequence(study.seed, spawn_key=(n, _LIMIT_KEY, mi)), study.threads)
            vals = sq if base == "pc" else np.sqrt(sq)
            crit = np.quantile(vals, 1 - study.alpha, axis=0)[np.ravel(inverse)]
            reject = stats > crit
            theta = np.array([f[2][meth].theta_hat for f in flat])
            for c, (a, s) in enumerate(cells):
                idx = np.arange(c, len(flat), len(cells))
                rate = float(reject[idx].mean())
                err = float(np.mean(np.abs(theta[idx] - alts[a].thetas[0]))) if s > 0 else None
                rows.append(StudyRow(n, change_label(alts[a]), float(s), meth, study.reps, rate,
                                     math.sqrt(rate * (1 - rate) / study.reps), err))
    return rows


def rows_as_dicts(rows: list[StudyRow]) -> list[dict]:
    return [asdict(r) for r in rows]
