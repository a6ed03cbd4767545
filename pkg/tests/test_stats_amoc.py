import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fchange import FSeries, Grid, LinOp, ParameterError, RankError, eig
from fchange.covariance import lrcov
from fchange.fseries import norm
from fchange.spectral import Spectrum, ridge_inv_sqrt_apply
from fchange.stats_amoc import TestReport, cusum_process, t_ff, t_ff_spectral, t_pc, t_wf

from conftest import random_series
from oracles import ff_oracle, lrcov_loops, pc_oracle, wf_oracle


def test_cusum_examples(rng):
    g = Grid.uniform(5)
    const = FSeries(np.tile(rng.standard_normal(5), (6, 1)), g)
    assert not np.any(cusum_process(const))
    f = rng.standard_normal(5)
    proc = cusum_process(FSeries(np.vstack([f, -f]), g))
    assert proc.shape == (1, 5)
    np.testing.assert_allclose(proc[0], f / np.sqrt(2), rtol=1e-14)
    xs = random_series(rng, n=9, m=5)
    proc = cusum_process(xs)
    assert proc.shape == (8, 5)
    np.testing.assert_allclose(proc[-1], -(xs.data[-1] - xs.data.mean(axis=0)) / 3, atol=1e-14)


def test_constant_series_gives_zero(rng):
    xs = FSeries(np.tile(rng.standard_normal(7), (10, 1)))
    lr = eig(lrcov(random_series(rng, m=7)))
    assert t_ff(xs).statistic == 0.0
    assert t_wf(xs, lr).statistic == 0.0
    assert t_pc(xs, lr, 2).statistic == 0.0


def test_ff_pair_example(rng):
    g = Grid.uniform(8)
    f = rng.standard_normal(8)
    rep = t_ff(FSeries(np.vstack([f, -f]), g))
    assert rep.statistic == pytest.approx(norm(f, g) / np.sqrt(2), rel=1e-14)
    assert rep.khat == 1 and rep.theta_hat == 0.5 and rep.method == "FF"


def test_wf_single_component():
    g = Grid.uniform(41)
    v1 = np.sqrt(2) * np.cos(2 * np.pi * g.points)
    v1 = v1 / norm(v1, g)
    rng = np.random.default_rng(3)
    xs = FSeries(np.outer(rng.standard_normal(25), v1), g)
    lam1 = 2.5
    lr = eig(LinOp(lam1 * np.outer(v1, v1), g))
    assert t_wf(xs, lr).statistic == pytest.approx(t_ff(xs).statistic / math.sqrt(2 * lam1), rel=1e-10)


def test_wf_forms_agree(rng):
    for _ in range(10):
        xs = random_series(rng, n=int(rng.integers(5, 60)), m=int(rng.integers(3, 20)))
        lr = eig(lrcov(xs))
        a, b = t_wf(xs, lr, "operator"), t_wf(xs, lr, "spectral")
        assert a.statistic == pytest.approx(b.statistic, rel=1e-8)


def test_ff_parseval(rng):
    xs = random_series(rng, n=30, m=12)
    basis = eig(lrcov(random_series(rng, n=30, m=12)))
    assert t_ff_spectral(xs, basis).statistic == pytest.approx(t_ff(xs).statistic, rel=1e-8)


def test_spectral_forms_need_full_spectrum(rng):
    from fchange.spectral import truncate

    xs = random_series(rng, m=6)
    part = truncate(eig(lrcov(xs)), count=3)
    with pytest.raises(ParameterError):
        t_wf(xs, part, "spectral")
    with pytest.raises(ParameterError):
        t_ff_spectral(xs, part)
    with pytest.raises(ParameterError):
        t_wf(xs, eig(lrcov(xs)), "matrix")


def test_wf_scale_invariance(rng):
    for _ in range(10):
        xs = random_series(rng, n=40, m=9)
        big = FSeries(5 * xs.data, xs.grid)
        a = t_wf(xs, eig(lrcov(xs))).statistic
        b = t_wf(big, eig(lrcov(big))).statistic
        assert b == pytest.approx(a, rel=1e-10)


def test_pc_scalar_oracle(rng):
    # d = 1 reduces to a scalar CUSUM of the first scores
    xs = random_series(rng, n=35, m=10)
    lr = eig(lrcov(xs))
    s = lr.scores(xs.data)[:, 0]
    n = xs.n
    best = max(sum(s[i] - s.mean() for i in range(k)) ** 2 for k in range(1, n)) / (n * lr.eigenvalues[0])
    assert t_pc(xs, lr, 1).statistic == pytest.approx(best, rel=1e-10)


def test_pc_sign_flip_invariance(rng):
    xs = random_series(rng)
    lr = eig(lrcov(xs))
    v = np.array(lr.eigenfunctions)
    v[0] *= -1
    flipped = Spectrum(lr.eigenvalues, v, lr.grid)
    assert t_pc(xs, flipped, 3).statistic == pytest.approx(t_pc(xs, lr, 3).statistic, rel=1e-12)


def test_pc_rank_and_range_errors(rng):
    xs = FSeries(rng.standard_normal((4, 9)))
    lr = eig(lrcov(xs))
    assert lr.rank == 3
    t_pc(xs, lr, 3)
    with pytest.raises(RankError):
        t_pc(xs, lr, 4)
    with pytest.raises(ParameterError):
        t_pc(xs, lr, 0)
    with pytest.raises(ParameterError):
        t_pc(xs, lr, 10)


def test_pc_reports_tie(rng):
    g = Grid.uniform(11)
    e = np.linalg.qr(rng.standard_normal((11, 3)))[0].T / np.sqrt(g.weights)
    lr = Spectrum([1.0, 0.5, 0.5], e, g)
    xs = random_series(rng, n=20, m=11)
    with pytest.warns(UserWarning):
        rep = t_pc(xs, lr, 2)
    assert rep.metadata["tie_warning"] is True
    assert t_pc(xs, lr, 1).metadata["tie_warning"] is False


def test_statistic_ordering(rng):
    for _ in range(10):
        xs = random_series(rng, n=50, m=8)
        lr = eig(lrcov(xs))
        lam = lr.eigenvalues
        wf2 = t_wf(xs, lr).statistic ** 2
        pc_full = t_pc(xs, lr, len(lam)).statistic
        ff2 = t_ff(xs).statistic ** 2
        assert wf2 <= pc_full + 1e-8
        assert wf2 >= ff2 / (2 * lam[0]) - 1e-8


def test_time_reversal(rng):
    xs = random_series(rng, n=33, m=6)
    rev = FSeries(xs.data[::-1], xs.grid)
    lr = eig(lrcov(xs))
    for f in (lambda z: t_ff(z), lambda z: t_wf(z, lr), lambda z: t_pc(z, lr, 2)):
        a, b = f(xs), f(rev)
        assert b.statistic == pytest.approx(a.statistic, rel=1e-12)
        assert b.khat == xs.n - a.khat


def test_argmax_smallest_k():
    # rows 1, -1, 1, -1 give |S_1| = |S_3|; the first one wins
    g = Grid.uniform(2)
    xs = FSeries(np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, 1.0], [-1.0, -1.0]]), g)
    rep = t_ff(xs)
    assert rep.khat == 1 and rep.theta_hat == 0.25


def test_report_dict():
    rep = TestReport(2.0, 3, 0.3, "WF", critical_value=1.5, alpha=0.05)
    assert rep.reject is True
    d = rep.to_dict()
    assert d["reject"] is True and d["statistic"] == 2.0 and d["metadata"] == {}
    assert TestReport(1.0, 1, 0.1, "FF").reject is None


small = arrays(float, st.tuples(st.integers(3, 8), st.just(4)), elements=st.floats(-10, 10, allow_nan=False))


@settings(max_examples=40, deadline=None)
@given(small, arrays(float, 4, elements=st.floats(-100, 100, allow_nan=False)))
def test_translation_invariance(data, shift):
    xs, ys = FSeries(data), FSeries(data + shift)
    tol = 1e-10 * (1 + np.max(np.abs(data)) + np.max(np.abs(shift)))
    assert abs(t_ff(xs).statistic - t_ff(ys).statistic) <= tol
    lr = eig(lrcov(xs))
    if lr.lambda1 > 1e-6:
        assert abs(t_wf(xs, lr).statistic - t_wf(ys, lr).statistic) <= tol * 1e3


def test_brute_force_agreement(rng):
    for _ in range(25):
        n, m = int(rng.integers(3, 6)), int(rng.integers(2, 5))
        xs = random_series(rng, n=n, m=m)
        k = lrcov_loops(xs.data, 1.7)
        lr = eig(LinOp(k, xs.grid))
        w = xs.grid.weights
        assert t_ff(xs).statistic == pytest.approx(ff_oracle(xs.data, w), rel=1e-10)
        assert t_wf(xs, lr).statistic == pytest.approx(wf_oracle(xs.data, w, k), rel=1e-10)
        assert t_pc(xs, lr, 1).statistic == pytest.approx(pc_oracle(xs.data, w, k, 1), rel=1e-10)


def test_ridge_whitened_cusum_matches_statistic(rng):
    xs = random_series(rng, n=20, m=7)
    lr = eig(lrcov(xs))
    white = ridge_inv_sqrt_apply(lr, cusum_process(xs))
    assert t_wf(xs, lr).statistic == pytest.approx(np.max(norm(white, xs.grid)), rel=1e-12)
