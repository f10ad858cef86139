"""Compiled and pure-Python kernels must agree."""
import numpy as np
import pytest

from spcanet import _pykernels

ck = pytest.importorskip("spcanet._ckernels")


def test_soft_threshold_agrees(rng):
    b = rng.standard_normal((30, 7))
    b[0, 0] = 0.0
    b[1, 1] = -0.0
    b[2, 2] = np.nan
    for tau in (0.0, 0.3, 5.0):
        want = _pykernels.soft_threshold(b, tau)
        got = ck.soft_threshold(b, tau)
        np.testing.assert_array_equal(got, want)
        np.testing.assert_array_equal(np.signbit(got), np.signbit(want))


def test_group_threshold_agrees(rng):
    b = rng.standard_normal((30, 4))
    b[3] = 0.0
    b[4, 1] = np.nan
    for tau in (0.0, 0.8, 9.0):
        np.testing.assert_allclose(ck.group_soft_threshold(b, tau), _pykernels.group_soft_threshold(b, tau),
                                   rtol=1e-15, atol=0, equal_nan=True)


def test_dual_ascent_agrees(rng):
    d, x, aux = (rng.standard_normal((9, 3)) for _ in range(3))
    g1, r1 = ck.dual_ascent(d, x, aux, 1.7)
    g2, r2 = _pykernels.dual_ascent(d, x, aux, 1.7)
    np.testing.assert_allclose(g1, g2, rtol=1e-15)
    assert r1 == pytest.approx(r2, rel=1e-14)


def test_kmeans_kernels_agree(rng):
    samples = rng.standard_normal((50, 4))
    centroids = samples[[0, 10, 20]].copy()
    l1, d1 = ck.assign_labels(samples, centroids)
    l2, d2 = _pykernels.assign_labels(samples, centroids)
    np.testing.assert_array_equal(l1, l2)
    np.testing.assert_allclose(d1, d2, rtol=1e-12)
    labels = l2.astype(np.intp)
    c1, n1 = ck.update_centroids(samples, labels, 4)
    c2, n2 = _pykernels.update_centroids(samples, labels, 4)
    np.testing.assert_allclose(c1, c2, rtol=1e-13)
    np.testing.assert_array_equal(n1, n2)
    assert n1[3] == 0 and not c1[3].any()


def test_assign_ties_pick_lowest_index():
    samples = np.array([[0.0, 0.0]])
    centroids = np.array([[1.0, 0.0], [-1.0, 0.0]])
    for mod in (ck, _pykernels):
        labels, _ = mod.assign_labels(samples, centroids)
        assert labels[0] == 0


def test_contingency_agrees(rng):
    t = rng.integers(0, 4, 100).astype(np.intp)
    p = rng.integers(0, 3, 100).astype(np.intp)
    np.testing.assert_array_equal(ck.contingency(t, p, 4, 3), _pykernels.contingency(t, p, 4, 3))
