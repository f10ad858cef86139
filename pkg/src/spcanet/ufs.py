"""Unsupervised feature selection and its clustering-based evaluation.

Features are ranked by the row norms of the learned projection, the top
``h`` rows of the data are clustered with k-means, and the clustering is
scored against ground-truth labels by accuracy (best one-to-one label
matching) and normalised mutual information.
"""
import csv
from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._backend import kernels
from .errors import ContractViolation
from .linalg import as_matrix, row_norms

DEFAULT_FEATURE_COUNTS = tuple(range(10, 101, 10))
DEFAULT_REPEATS = 50
MAX_SWEEPS = 300


def as_labels(labels, name="labels"):
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.size < 1:
        raise ContractViolation(f"{name} must be a non-empty 1-D array")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ContractViolation(f"{name} must hold integer cluster indices")
    arr = arr.astype(np.intp)
    if arr.min() < 0:
        raise ContractViolation(f"{name} has a negative cluster index")
    return arr


def feature_scores(x):
    """Score each feature by the Euclidean norm of its row in ``x``."""
    return row_norms(np.asarray(x, dtype=np.float64))


def select_features(scores, h):
    """Indices of the ``h`` highest scores, best first; equal scores keep index order."""
    scores = np.asarray(scores, dtype=np.float64)
    if not 1 <= h <= scores.size:
        raise ContractViolation(f"cannot select h={h} of {scores.size} features")
    return np.argsort(-scores, kind="stable")[:h]


class KMeansResult(NamedTuple):
    labels: np.ndarray
    centroids: np.ndarray
    inertia: List[float]
    sweeps: int


def _plusplus(samples, c, rng):
    n = samples.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((samples - samples[chosen[0]]) ** 2, axis=1)
    for _ in range(1, c):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # every remaining point coincides with a chosen centre
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((samples - samples[nxt]) ** 2, axis=1))
    return samples[chosen].copy()


def lloyd(data, c, seed):
    """k-means on the columns of ``data`` (features x samples).

    k-means++ seeding from ``seed``, then Lloyd sweeps until the
    assignment stops changing or ``MAX_SWEEPS`` is reached. A cluster that
    empties is re-seeded at the sample farthest from its centroid.
    """
    data = as_matrix(data, "data")
    samples = np.ascontiguousarray(data.T)
    n = samples.shape[0]
    if not 1 <= c <= n:
        raise ContractViolation(f"cannot form c={c} clusters from n={n} samples")
    rng = np.random.default_rng(seed)
    centroids = _plusplus(samples, c, rng)
    labels = None
    inertia = []
    sweeps = 0
    while sweeps < MAX_SWEEPS:
        new_labels, dist = kernels.assign_labels(samples, centroids)
        sweeps += 1
        cost = float(dist.sum())
        if inertia:
            assert cost <= inertia[-1] * (1 + 1e-12) + 1e-12, "k-means cost increased"
        inertia.append(cost)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids, counts = kernels.update_centroids(samples, labels, c)
        dist = dist.copy()
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(dist))
            centroids[j] = samples[far]
            dist[far] = -1.0
    return KMeansResult(labels, centroids, inertia, sweeps)


def kmeans(data, c, seed):
    return lloyd(data, c, seed).labels


def contingency_table(truth, pred):
    truth = as_labels(truth, "truth")
    pred = as_labels(pred, "pred")
    if truth.size != pred.size:
        raise ContractViolation(f"label vectors differ in length: {truth.size} vs {pred.size}")
    return kernels.contingency(truth, pred, int(truth.max()) + 1, int(pred.max()) + 1)


def acc(truth, pred):
    """Clustering accuracy under the best one-to-one matching of clusters to classes."""
    table = contingency_table(truth, pred)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / float(table.sum())


def _entropy(p):
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def nmi(truth, pred):
    """Mutual information over the geometric mean of the two entropies (natural log).

    Two single-cluster partitions score 1; if only one of them is a single
    cluster the score is 0.
    """
    table = contingency_table(truth, pred).astype(np.float64)
    single_t = np.count_nonzero(table.sum(axis=1)) == 1
    single_p = np.count_nonzero(table.sum(axis=0)) == 1
    if single_t and single_p:
        return 1.0
    if single_t or single_p:
        return 0.0
    joint = table / table.sum()
    pt = joint.sum(axis=1)
    pp = joint.sum(axis=0)
    ht, hp = _entropy(pt), _entropy(pp)
    nz = joint > 0
    outer = np.outer(pt, pp)
    mi = float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))
    return float(np.clip(mi / np.sqrt(ht * hp), 0.0, 1.0))


@dataclass
class EvalReport:
    """Per-feature-count ACC / NMI statistics in percent.

    Standard deviations are population (``ddof=0``) values over repeats.
    """

    feature_counts: List[int]
    acc_mean: List[float]
    acc_std: List[float]
    nmi_mean: List[float]
    nmi_std: List[float]

    @property
    def best_h_acc(self):
        return self.feature_counts[int(np.argmax(self.acc_mean))]

    @property
    def best_h_nmi(self):
        return self.feature_counts[int(np.argmax(self.nmi_mean))]

    def rows(self):
        for i, h in enumerate(self.feature_counts):
            yield h, "acc", self.acc_mean[i], self.acc_std[i]
            yield h, "nmi", self.nmi_mean[i], self.nmi_std[i]


def evaluate(a, truth, x, feature_counts=DEFAULT_FEATURE_COUNTS, repeats=DEFAULT_REPEATS, seed=0):
    """Select the top-``h`` features for every ``h`` and score repeated k-means runs.

    Repeat ``r`` seeds k-means with ``seed + r``; the number of clusters is
    the number of distinct ground-truth labels.
    """
    a = as_matrix(a, "data")
    truth = as_labels(truth, "truth")
    x = as_matrix(x, "projection")
    if x.shape[0] != a.shape[0]:
        raise ContractViolation(f"projection has {x.shape[0]} rows, data has {a.shape[0]} features")
    if truth.size != a.shape[1]:
        raise ContractViolation(f"{truth.size} labels for {a.shape[1]} samples")
    if repeats < 1:
        raise ContractViolation("repeats must be >= 1")
    c = int(np.unique(truth).size)
    scores = feature_scores(x)
    report = EvalReport([], [], [], [], [])
    for h in feature_counts:
        sub = a[select_features(scores, int(h))]
        accs, nmis = [], []
        for r in range(repeats):
            pred = kmeans(sub, c, seed + r)
            accs.append(100.0 * acc(truth, pred))
            nmis.append(100.0 * nmi(truth, pred))
        report.feature_counts.append(int(h))
        report.acc_mean.append(float(np.mean(accs)))
        report.acc_std.append(float(np.std(accs)))
        report.nmi_mean.append(float(np.mean(nmis)))
        report.nmi_std.append(float(np.std(nmis)))
    return report


REPORT_HEADER = "# mean and population std (ddof=0) over k-means repeats, in percent"


def format_report(report):
    lines = [REPORT_HEADER, "h,metric,mean,std"]
    lines += [f"{h},{metric},{mean!r},{std!r}" for h, metric, mean, std in report.rows()]
    return "\n".join(lines) + "\n"


def write_report(report, path):
    with open(path, "w") as fh:
        fh.write(format_report(report))


def read_report(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    counts = sorted({int(r["h"]) for r in rows}, key=[int(r["h"]) for r in rows].index)
    report = EvalReport(counts, [], [], [], [])
    for h in counts:
        for metric in ("acc", "nmi"):
            (row,) = [r for r in rows if int(r["h"]) == h and r["metric"] == metric]
            getattr(report, f"{metric}_mean").append(float(row["mean"]))
            getattr(report, f"{metric}_std").append(float(row["std"]))
    return report
