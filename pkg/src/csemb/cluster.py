"""Downstream validation: K-means on embedding rows, scored by graph modularity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import EmbedConfig, EmbeddingMatrix, fast_embed_cascaded, fold_seed
from .sparse import normalized_adjacency, simple_edges

_KMEANS_SEED_TAG = 0x6B6D6531  # distinct stream from projection sampling


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    K: int
    inertia: float
    n_iters: int = 0
    inertia_history: tuple[float, ...] = ()


@dataclass
class ModularityScore:
    Q: float
    m_edges: int

    def __post_init__(self):
        if not -0.5 - 1e-9 <= self.Q <= 1.0 + 1e-9:
            raise ValueError(f"modularity {self.Q} outside [-0.5, 1]")


def _sq_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(C * C, axis=1)[None, :]
        - 2.0 * (X @ C.T)
    )
    return np.maximum(d2, 0.0)


def _plus_plus_init(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((K, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    closest = _sq_distances(X, centroids[:1])[:, 0]
    for k in range(1, K):
        total = closest.sum()
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=closest / total))
        centroids[k] = X[pick]
        closest = np.minimum(closest, _sq_distances(X, centroids[k : k + 1])[:, 0])
    return centroids


def kmeans(X, K: int, max_iters: int = 100, seed: int = 0) -> ClusterAssignment:
    """Lloyd iterations with distance-weighted seeding, deterministic per seed.

    Empty clusters are re-seeded at the point currently farthest from its
    centroid, which keeps the inertia sequence non-increasing.
    """
    rows = X.values if isinstance(X, EmbeddingMatrix) else np.asarray(X, dtype=np.float64)
    n = rows.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K={K} must lie in [1, n_rows={n}]")
    rng = np.random.default_rng(seed)
    centroids = _plus_plus_init(rows, K, rng)
    labels = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    for it in range(1, max_iters + 1):
        d2 = _sq_distances(rows, centroids)
        new_labels = np.argmin(d2, axis=1).astype(np.int64)
        mindist = d2[np.arange(n), new_labels]
        inertia = float(mindist.sum())
        if history and inertia > history[-1] * (1.0 + 1e-9) + 1e-12:
            raise RuntimeError("k-means inertia increased; numerical invariant broken")
        history.append(inertia)

        counts = np.bincount(new_labels, minlength=K)
        empties = np.flatnonzero(counts == 0)
        if len(empties):
            avail = mindist.copy()
            for c in empties:
                far = int(np.argmax(avail))
                centroids[c] = rows[far]
                new_labels[far] = c
                avail[far] = -1.0
            labels = new_labels
            continue

        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        if converged:
            break
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, rows)
        centroids = sums / np.bincount(labels, minlength=K)[:, None]
    return ClusterAssignment(
        labels=labels,
        K=K,
        inertia=history[-1],
        n_iters=len(history),
        inertia_history=tuple(history),
    )


def modularity(edges, labels) -> ModularityScore:
    """Newman modularity Q = sum_c (intra_c / m - (degsum_c / 2m)^2) of an
    undirected simple graph under a vertex labeling."""
    if isinstance(labels, ClusterAssignment):
        labels = labels.labels
    labels = np.asarray(labels, dtype=np.int64)
    und = simple_edges(edges)
    m = len(und)
    if m == 0:
        raise ValueError("modularity needs at least one edge")
    if und.max() >= len(labels):
        raise ValueError("labels must cover all vertices")
    u, v = und[:, 0], und[:, 1]
    k = int(labels.max()) + 1
    intra = np.bincount(labels[u][labels[u] == labels[v]], minlength=k)
    deg = np.bincount(und.ravel(), minlength=len(labels))
    degsum = np.bincount(labels, weights=deg, minlength=k)
    q = float(np.sum(intra / m - (degsum / (2.0 * m)) ** 2))
    return ModularityScore(Q=q, m_edges=m)


@dataclass
class ClusterExperiment:
    median_modularity: float
    run_scores: tuple[float, ...]
    median_labels: np.ndarray
    embedding: EmbeddingMatrix = field(repr=False, default=None)


def cluster_experiment(
    edges,
    n: int,
    f,
    cfg: EmbedConfig,
    K: int,
    runs: int = 25,
    n_workers: int = 1,
) -> ClusterExperiment:
    """Embed the graph's normalized adjacency compressively, then score
    ``runs`` seeded K-means restarts by modularity and report the median.

    The normalized adjacency already has spectrum in [-1, 1], so no norm
    estimation happens here.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    adj = normalized_adjacency(edges, n)
    emb = fast_embed_cascaded(adj, f, cfg, n_workers=n_workers)
    scores = []
    assignments = []
    for run in range(runs):
        km = kmeans(emb.values, K, seed=fold_seed(cfg.seed, _KMEANS_SEED_TAG + run))
        scores.append(modularity(edges, km).Q)
        assignments.append(km)
    order = np.argsort(scores, kind="stable")
    median_idx = int(order[(runs - 1) // 2]) if runs % 2 else int(order[runs // 2 - 1])
    return ClusterExperiment(
        median_modularity=float(np.median(scores)),
        run_scores=tuple(scores),
        median_labels=assignments[median_idx].labels,
        embedding=emb,
    )
