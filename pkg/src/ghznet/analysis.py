"""Cluster topologies by protocol performance (k-means, elbow, silhouette, good/poor labels)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROTOCOLS = ("SPS", "SPT", "MPS", "MPT")
MAX_ITER = 300


@dataclass(frozen=True)
class FeatureMatrix:
    names: tuple[str, ...]
    raw: np.ndarray
    standardized: np.ndarray
    columns: tuple[str, ...] = PROTOCOLS


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    silhouette: float | None = None

    def by_name(self, f: FeatureMatrix) -> dict[str, int]:
        return {n: int(c) for n, c in zip(f.names, self.labels)}


def standardize(x: np.ndarray) -> np.ndarray:
    """Per-column z-scores (population std); zero-variance columns map to 0."""
    x = np.asarray(x, dtype=float)
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    safe = np.where(sd > 0, sd, 1.0)
    return np.where(sd > 0, (x - mu) / safe, 0.0)


def build_features(summaries: dict) -> FeatureMatrix:
    """``summaries`` maps topology -> {protocol: E[T] or object with ``expected_timeslots``}."""
    names = tuple(sorted(summaries))
    rows = []
    for name in names:
        per = {str(k).upper(): v for k, v in summaries[name].items()}
        missing = [p for p in PROTOCOLS if p not in per]
        if missing:
            raise ValueError(f"topology {name!r} is missing results for {', '.join(missing)}")
        rows.append([float(getattr(per[p], "expected_timeslots", per[p])) for p in PROTOCOLS])
    raw = np.array(rows, dtype=float).reshape(len(names), len(PROTOCOLS))
    return FeatureMatrix(names, raw, standardize(raw))


def _sq_dists(x, c):
    return ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)


def _kmeans_pp(x, k, rng):
    n = len(x)
    centres = [x[rng.integers(n)]]
    for _ in range(1, k):
        d2 = _sq_dists(x, np.array(centres)).min(axis=1)
        total = d2.sum()
        if total <= 0:
            centres.append(x[rng.integers(n)])
        else:
            centres.append(x[rng.choice(n, p=d2 / total)])
    return np.array(centres, dtype=float)


def lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int = MAX_ITER):
    """Lloyd iterations from the given centroids; returns (labels, centroids, inertia, history)."""
    c = centroids.copy()
    labels = None
    history = []
    for _ in range(max_iter):
        d2 = _sq_dists(x, c)
        new = d2.argmin(axis=1)
        history.append(float(d2[np.arange(len(x)), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(len(c)):
            members = x[labels == j]
            if len(members):
                c[j] = members.mean(axis=0)
            else:
                # empty cluster: reseed from the point farthest from its centroid
                far = int(d2[np.arange(len(x)), labels].argmax())
                c[j] = x[far]
    d2 = _sq_dists(x, c)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(len(x)), labels].sum())
    return labels, c, inertia, history


def kmeans(f, k: int, seed: int = 0, restarts: int = 50) -> ClusterAssignment:
    """k-means++ seeded Lloyd, best of ``restarts`` by (inertia, restart index)."""
    x = f.standardized if isinstance(f, FeatureMatrix) else np.asarray(f, dtype=float)
    if k < 1 or k > len(x):
        raise ValueError(f"k={k} must lie in [1, {len(x)}]")
    best = None
    for rs in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(rs)
        labels, c, inertia, _ = lloyd(x, _kmeans_pp(x, k, rng))
        if best is None or inertia < best[2]:
            best = (labels, c, inertia)
    labels, c, inertia = best
    sil = silhouette_score(x, labels) if 2 <= len(set(labels.tolist())) < len(x) else None
    return ClusterAssignment(labels, c, inertia, sil)


def elbow_curve(f, k_range, seed: int = 0, restarts: int = 50) -> dict[int, float]:
    return {int(k): kmeans(f, int(k), seed, restarts).inertia for k in k_range}


def silhouette_score(x, labels) -> float:
    """Mean silhouette with Euclidean distances; points in singleton clusters score 0."""
    if isinstance(x, FeatureMatrix):
        x = x.standardized
    if isinstance(labels, ClusterAssignment):
        labels = labels.labels
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    d = np.sqrt(_sq_dists(x, x))
    scores = np.zeros(len(x))
    for i in range(len(x)):
        own = labels == labels[i]
        if own.sum() == 1:
            continue
        a = d[i, own].sum() / (own.sum() - 1)
        b = min(d[i, labels == c].mean() for c in uniq if c != labels[i])
        scores[i] = 0.0 if max(a, b) == 0 else (b - a) / max(a, b)
    return float(scores.mean())


CLASS_NAMES = {
    (True, True, True, True): "globally favourable",
    (False, False, False, False): "globally adverse",
    (False, True, False, True): "tree dominant",
    (False, False, True, True): "multi-path dominant",
}


def label_clusters(a: ClusterAssignment, f: FeatureMatrix) -> dict[int, dict]:
    """Flag each cluster/protocol 'good' if its mean raw E[T] beats the overall mean, else 'poor'."""
    overall = f.raw.mean(axis=0)
    out = {}
    for c in sorted(set(np.asarray(a.labels).tolist())):
        means = f.raw[np.asarray(a.labels) == c].mean(axis=0)
        good = tuple(bool(m < o) for m, o in zip(means, overall))
        out[int(c)] = {
            "flags": {p: ("good" if g else "poor") for p, g in zip(f.columns, good)},
            "mean_expected_timeslots": {p: float(m) for p, m in zip(f.columns, means)},
            "class": CLASS_NAMES.get(good, "mixed"),
        }
    return out
