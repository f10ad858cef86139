"""Pure numpy implementations of the hot kernels.

Used when the compiled extension is unavailable, or when
``SPCANET_BACKEND=python`` is set. Signatures match ``_ckernels``.
"""
import numpy as np


def soft_threshold(b, tau):
    return np.sign(b) * np.maximum(np.abs(b) - tau, 0.0)


def group_soft_threshold(b, tau):
    norms = np.sqrt(np.sum(b * b, axis=1))
    out = np.zeros_like(b)
    keep = norms > tau
    # all-zero rows and fully shrunk rows stay zero
    factor = (norms[keep] - tau) / norms[keep]
    out[keep] = b[keep] * factor[:, None]
    out[np.isnan(norms)] = np.nan
    return out


def dual_ascent(dual, x, aux, step):
    """Return ``dual + step * (x - aux)`` and ``||x - aux||_F``."""
    diff = x - aux
    return dual + step * diff, float(np.sqrt(np.sum(diff * diff)))


def assign_labels(samples, centroids):
    """Nearest-centroid assignment; ties go to the lowest centroid index.

    ``samples`` is n x h, ``centroids`` is c x h. Returns labels and the
    squared distance of each sample to its centroid.
    """
    n = samples.shape[0]
    dist = np.empty((n, centroids.shape[0]))
    for j in range(centroids.shape[0]):
        diff = samples - centroids[j]
        dist[:, j] = np.sum(diff * diff, axis=1)
    labels = np.argmin(dist, axis=1).astype(np.intp)
    return labels, dist[np.arange(n), labels]


def update_centroids(samples, labels, c):
    """Cluster means and member counts; empty clusters come back as zeros."""
    h = samples.shape[1]
    sums = np.zeros((c, h))
    np.add.at(sums, labels, samples)
    counts = np.bincount(labels, minlength=c).astype(np.intp)
    centroids = np.zeros((c, h))
    nz = counts > 0
    centroids[nz] = sums[nz] / counts[nz, None]
    return centroids, counts


def contingency(truth, pred, n_truth, n_pred):
    table = np.zeros((n_truth, n_pred), dtype=np.int64)
    np.add.at(table, (truth, pred), 1)
    return table
