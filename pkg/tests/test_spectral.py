import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fchange import DegeneracyError, FSeries, Grid, InputError, LinOp, NumericalError, ParameterError
from fchange.covariance import lrcov
from fchange.dgp import fourier_basis
from fchange.fseries import inner, norm
from fchange.spectral import (
    Spectrum,
    TieWarning,
    components_for_energy,
    eig,
    op_norm,
    ridge_inv_sqrt_apply,
    ridge_operator,
    split_tie,
    truncate,
    warn_if_tie,
)

from conftest import random_series


def orthonormal(rng, grid, count):
    q, _ = np.linalg.qr(rng.standard_normal((grid.size, count)))
    return (q / np.sqrt(grid.weights)[:, None]).T


def test_rank_one(rng):
    g = Grid.uniform(25)
    c = rng.standard_normal(25)
    spec = eig(LinOp(np.outer(c, c), g))
    assert spec.lambda1 == pytest.approx(norm(c, g) ** 2, rel=1e-12)
    v1 = c / norm(c, g)
    v1 = v1 * np.sign(v1[np.argmax(np.abs(v1))])
    np.testing.assert_allclose(spec.eigenfunctions[0], v1, atol=1e-10)
    assert np.max(np.abs(spec.eigenvalues[1:])) < 1e-12 * spec.lambda1
    assert op_norm(spec) == spec.lambda1


def test_zero_operator():
    spec = eig(LinOp.zeros(Grid.uniform(6)))
    assert not np.any(spec.eigenvalues)
    assert op_norm(spec) == 0.0


def test_recovers_constructed_eigenvalues(rng):
    g = Grid.uniform(30)
    e = orthonormal(rng, g, 3)
    spec = eig(LinOp.from_eigen([1.0, 1 / 2, 1 / 3], e, g))
    np.testing.assert_allclose(spec.eigenvalues[:3], [1, 1 / 2, 1 / 3], atol=1e-8)
    assert np.max(np.abs(spec.eigenvalues[3:])) < 1e-8


def test_orthonormal_and_reconstruct(rng):
    xs = random_series(rng, n=50, m=19, grid=Grid(np.sort(rng.uniform(0, 1, 19))))
    op = lrcov(xs)
    spec = eig(op)
    gram = (spec.eigenfunctions * xs.grid.weights) @ spec.eigenfunctions.T
    np.testing.assert_allclose(gram, np.eye(19), atol=1e-8)
    np.testing.assert_allclose(spec.reconstruct().kernel, op.kernel, atol=1e-6)
    assert np.all(np.diff(spec.eigenvalues) <= 0)


def test_sign_convention(rng):
    spec = eig(lrcov(random_series(rng)))
    v = spec.eigenfunctions
    assert np.all(v[np.arange(len(v)), np.argmax(np.abs(v), axis=1)] > 0)


def test_parseval_on_full_basis(rng):
    xs = random_series(rng, n=30, m=15)
    spec = eig(lrcov(xs))
    f = rng.standard_normal((5, 15))
    np.testing.assert_allclose(np.sum(spec.scores(f) ** 2, axis=1), norm(f, xs.grid) ** 2, rtol=1e-8)


def test_asymmetric_kernel_rejected(rng):
    k = rng.standard_normal((4, 4))
    with pytest.raises(InputError):
        eig(LinOp(k, Grid.uniform(4)))


def test_negative_eigenvalue_policy(rng):
    g = Grid.uniform(10)
    e = orthonormal(rng, g, 2)
    tiny = eig(LinOp.from_eigen([1.0, -1e-8], e, g))
    assert tiny.eigenvalues.min() == 0.0
    with pytest.raises(NumericalError):
        eig(LinOp.from_eigen([1.0, -1e-3], e, g))


def test_zero_weight_grid_rejected():
    g = Grid([0.0, 0.5, 1.0], [0.0, 1.0, 0.0])
    with pytest.raises(ParameterError):
        eig(LinOp(np.eye(3), g))


def test_scaling_eigenvalues_and_spans(rng):
    op = lrcov(random_series(rng, n=40, m=12))
    a = 3.7
    s1, s2 = eig(op), eig(op * a)
    np.testing.assert_allclose(s2.eigenvalues, a * s1.eigenvalues, rtol=1e-10, atol=1e-14)
    w = op.grid.weights
    for d in (1, 3):
        p1 = s1.eigenfunctions[:d].T @ (s1.eigenfunctions[:d] * w)
        p2 = s2.eigenfunctions[:d].T @ (s2.eigenfunctions[:d] * w)
        assert np.max(np.abs(p1 - p2)) < 1e-6


def test_ridge_on_eigenfunctions(rng):
    xs = FSeries(rng.standard_normal((4, 9)))  # rank 3, so zero eigenvalues exist
    spec = eig(lrcov(xs))
    lam1 = spec.lambda1
    v1 = spec.eigenfunctions[0]
    np.testing.assert_allclose(ridge_inv_sqrt_apply(spec, v1), v1 / np.sqrt(2 * lam1), atol=1e-12)
    assert spec.eigenvalues[-1] == 0.0
    v_null = spec.eigenfunctions[-1]
    np.testing.assert_allclose(ridge_inv_sqrt_apply(spec, v_null), v_null / np.sqrt(lam1), atol=1e-12)


def test_ridge_bound_and_square(rng):
    xs = random_series(rng, n=30, m=11)
    spec = eig(lrcov(xs))
    f = rng.standard_normal((20, 11))
    out = ridge_inv_sqrt_apply(spec, f)
    assert np.all(norm(out, xs.grid) <= norm(f, xs.grid) / np.sqrt(spec.lambda1) + 1e-12)
    twice = ridge_inv_sqrt_apply(spec, out)
    np.testing.assert_allclose(twice, ridge_inv_sqrt_apply(spec, f, power=-1.0), atol=1e-8)
    np.testing.assert_allclose(ridge_operator(spec).apply(f), out, atol=1e-10)


def test_ridge_linear(rng):
    spec = eig(lrcov(random_series(rng, m=8)))
    f, g = rng.standard_normal((2, 8))
    np.testing.assert_allclose(
        ridge_inv_sqrt_apply(spec, 2 * f - 3 * g),
        2 * ridge_inv_sqrt_apply(spec, f) - 3 * ridge_inv_sqrt_apply(spec, g),
        atol=1e-12,
    )


def test_ridge_truncated_spectrum_treats_rest_as_null(rng):
    spec = eig(lrcov(random_series(rng, m=8)))
    f = rng.standard_normal(8)
    part = truncate(spec, count=3)
    c = spec.scores(f)
    lam, lam1 = spec.eigenvalues, spec.lambda1
    weights = np.where(np.arange(8) < 3, (lam + lam1) ** -0.5, lam1**-0.5)
    np.testing.assert_allclose(ridge_inv_sqrt_apply(part, f), (c * weights) @ spec.eigenfunctions, atol=1e-10)


def test_ridge_degenerate():
    spec = eig(LinOp.zeros(Grid.uniform(4)))
    with pytest.raises(DegeneracyError):
        ridge_inv_sqrt_apply(spec, np.ones(4))


def _spectrum(values, m=6):
    g = Grid.uniform(m)
    basis = fourier_basis(g, len(values))
    return Spectrum(np.asarray(values, dtype=float), basis, g)


def test_truncate_examples():
    spec = _spectrum([1, 1 / 2, 1 / 3])
    np.testing.assert_array_equal(truncate(spec, count=1).eigenvalues, [1.0])
    np.testing.assert_array_equal(truncate(spec, energy=1.0).eigenvalues, spec.eigenvalues)
    np.testing.assert_array_equal(truncate(spec, energy=0.6).eigenvalues, [1.0, 0.5])
    assert components_for_energy(spec, 0.5) == 1
    assert components_for_energy(spec, 0.545) == 1
    assert components_for_energy(spec, 0.55) == 2


def test_truncate_argument_errors():
    spec = _spectrum([1, 1 / 2, 1 / 3])
    for kw in ({}, {"count": 1, "energy": 0.5}, {"count": 0}, {"count": 4}, {"energy": 0.0}, {"energy": 1.5}):
        with pytest.raises(ParameterError):
            truncate(spec, **kw)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-3, 10), min_size=1, max_size=6), st.floats(0.01, 1.0))
def test_energy_rule_is_minimal(values, tau):
    lam = np.sort(np.asarray(values))[::-1]
    spec = _spectrum(lam)
    d = components_for_energy(spec, tau)
    assert 1 <= d <= lam.size
    assert lam[:d].sum() >= tau * lam.sum() * (1 - 1e-12)
    if d > 1:
        assert lam[: d - 1].sum() < tau * lam.sum()


def test_tie_detection():
    spec = _spectrum([1.0, 0.5, 0.5 * (1 + 1e-9), 0.1])
    assert split_tie(spec, 2)
    assert not split_tie(spec, 1)
    assert not split_tie(spec, 4)
    with pytest.warns(TieWarning):
        assert warn_if_tie(spec, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not warn_if_tie(spec, 3)


def test_inner_of_fourier_basis_is_identity():
    g = Grid.uniform(401)
    e = fourier_basis(g, 5)
    gram = np.array([[inner(a, b, g) for b in e] for a in e])
    np.testing.assert_allclose(gram, np.eye(5), atol=1e-4)
