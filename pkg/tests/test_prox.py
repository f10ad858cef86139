import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from spcanet.errors import ContractViolation
from spcanet.linalg import orthogonality_error
from spcanet.prox import group_soft_threshold, soft_threshold, stiefel_project

from oracles import grid_prox_l1, newton_schulz_polar, scalar_prox_l1, smoothed_newton_group_prox

finite = st.floats(-50, 50, allow_nan=False)
mats = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 5).flatmap(lambda c: arrays(np.float64, (r, c), elements=finite))
)
taus = st.floats(0, 20, allow_nan=False)


def test_soft_threshold_examples():
    b = np.array([[3.0, -0.5, 0.5, -2.0]])
    np.testing.assert_array_equal(soft_threshold(b, 1.0), [[2.0, 0.0, 0.0, -1.0]])
    np.testing.assert_array_equal(soft_threshold(b, 0.0), b)


def test_soft_threshold_matches_grid_oracle():
    for b, tau in [(0.7, 0.2), (-3.1, 1.0), (0.05, 0.3), (2.0, 0.0)]:
        got = soft_threshold(np.array([[b]]), tau)[0, 0]
        assert got == pytest.approx(grid_prox_l1(b, tau), abs=1e-4)


def test_group_threshold_examples():
    b = np.array([[3.0, 4.0], [0.3, 0.4], [0.0, 0.0]])
    out = group_soft_threshold(b, 1.0)
    np.testing.assert_allclose(out, [[2.4, 3.2], [0.0, 0.0], [0.0, 0.0]])


def test_group_threshold_matches_newton_oracle(rng):
    b = rng.standard_normal((40, 4)) * 2
    tau = 1.3
    np.testing.assert_allclose(group_soft_threshold(b, tau), smoothed_newton_group_prox(b, tau), atol=1e-8)


def test_negative_tau_rejected():
    with pytest.raises(ContractViolation):
        soft_threshold(np.ones((1, 1)), -0.1)
    with pytest.raises(ContractViolation):
        group_soft_threshold(np.ones((1, 1)), -0.1)


def test_inputs_not_mutated(rng):
    b = rng.standard_normal((3, 3))
    keep = b.copy()
    soft_threshold(b, 0.5)
    group_soft_threshold(b, 0.5)
    np.testing.assert_array_equal(b, keep)


@settings(max_examples=200, deadline=None)
@given(mats, mats, taus)
def test_soft_threshold_nonexpansive(b1, b2, tau):
    if b1.shape != b2.shape:
        b2 = np.resize(b2, b1.shape)
    d = np.linalg.norm(soft_threshold(b1, tau) - soft_threshold(b2, tau))
    assert d <= np.linalg.norm(b1 - b2) + 1e-9


@settings(max_examples=200, deadline=None)
@given(mats, mats, taus)
def test_group_threshold_nonexpansive(b1, b2, tau):
    if b1.shape != b2.shape:
        b2 = np.resize(b2, b1.shape)
    d = np.linalg.norm(group_soft_threshold(b1, tau) - group_soft_threshold(b2, tau))
    assert d <= np.linalg.norm(b1 - b2) + 1e-9


@settings(max_examples=200, deadline=None)
@given(mats, taus)
def test_group_threshold_keeps_row_direction(b, tau):
    out = group_soft_threshold(b, tau)
    for r_in, r_out in zip(b, out):
        n_out = np.linalg.norm(r_out)
        if n_out > 0:
            cos = r_in @ r_out / (np.linalg.norm(r_in) * n_out)
            assert cos == pytest.approx(1.0, abs=1e-9)
            assert n_out == pytest.approx(np.linalg.norm(r_in) - tau, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(mats, taus)
def test_prox_optimality_against_random_candidates(b, tau):
    rng = np.random.default_rng(0)
    y = soft_threshold(b, tau)
    g = group_soft_threshold(b, tau)

    def f_l1(z):
        return tau * np.abs(z).sum(axis=(1, 2)) + 0.5 * ((z - b) ** 2).sum(axis=(1, 2))

    def f_l21(z):
        return tau * np.linalg.norm(z, axis=2).sum(axis=1) + 0.5 * ((z - b) ** 2).sum(axis=(1, 2))

    for _ in range(10):
        cand = y + rng.standard_normal((1000,) + b.shape) * rng.uniform(1e-3, 3)
        assert f_l1(cand).min() >= f_l1(y[None])[0] - 1e-9
        cand = g + rng.standard_normal((1000,) + b.shape) * rng.uniform(1e-3, 3)
        assert f_l21(cand).min() >= f_l21(g[None])[0] - 1e-9


@settings(max_examples=100, deadline=None)
@given(mats, taus)
def test_scalar_oracle_agrees(b, tau):
    np.testing.assert_allclose(soft_threshold(b, tau), scalar_prox_l1(b, tau), atol=1e-6)


def test_stiefel_project_matches_polar_iteration(rng):
    for _ in range(10):
        b = rng.standard_normal((7, 3))
        x = stiefel_project(b)
        assert orthogonality_error(x) < 1e-12
        np.testing.assert_allclose(x, newton_schulz_polar(b), atol=1e-10)


def test_stiefel_project_is_nearest(rng):
    b = rng.standard_normal((5, 2))
    x = stiefel_project(b)
    best = np.sum((x - b) ** 2)
    for _ in range(2000):
        q, r = np.linalg.qr(x + 0.3 * rng.standard_normal(x.shape))
        q = q * np.sign(np.diag(r))
        assert np.sum((q - b) ** 2) >= best - 1e-12


def test_stiefel_project_fixes_orthonormal_input(rng):
    q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
    np.testing.assert_allclose(stiefel_project(q), q, atol=1e-12)
