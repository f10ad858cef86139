"""Planted-cluster data generator for desk-scale checks."""
import numpy as np

from .errors import ContractViolation


def _balanced_signs(rng, c, k):
    # each latent coordinate splits the centres into two near-equal halves of +1 / -1
    base = np.where(np.arange(c) < (c + 1) // 2, 1.0, -1.0)
    return np.stack([rng.permutation(base) for _ in range(k)], axis=1)


def _min_pairwise(points):
    if len(points) < 2:
        return np.inf
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    return dist[np.triu_indices(len(points), 1)].min()


def synth(d=100, n=200, c=4, informative_count=20, noise_sigma=0.3, seed=0):
    """Draw a features-by-samples matrix with ``c`` clusters living on a
    planted set of ``informative_count`` rows.

    Cluster centres are sign patterns in the latent space, scaled so every
    pair is at least ``10 * noise_sigma`` apart; each latent coordinate is
    balanced across the centres, so every planted row carries signal.
    Samples are split evenly over the clusters and get isotropic Gaussian
    noise; the other ``d - informative_count`` rows are pure noise.

    Returns ``(data, labels, planted)`` with ``planted`` sorted ascending.
    """
    if informative_count < 1 or informative_count > d:
        raise ContractViolation(f"informative_count={informative_count} must lie in [1, d={d}]")
    if c < 1 or c > n:
        raise ContractViolation(f"cluster count c={c} must lie in [1, n={n}]")
    if noise_sigma < 0:
        raise ContractViolation("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    k = informative_count
    for _ in range(100):
        centers = _balanced_signs(rng, c, k)
        gap = _min_pairwise(centers)
        if gap > 0:
            break
    else:
        raise ContractViolation(f"cannot place {c} distinct centres in {k} latent dimensions")
    if np.isfinite(gap):
        centers *= max(1.0, 10.0 * noise_sigma / gap)

    labels = rng.permutation(np.arange(n) % c)
    latent = centers[labels] + noise_sigma * rng.standard_normal((n, k))
    planted = np.sort(rng.choice(d, size=k, replace=False))
    data = noise_sigma * rng.standard_normal((d, n))
    data[planted] = latent.T
    return data, labels.astype(np.intp), planted
