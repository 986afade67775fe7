"""Embedding arithmetic and set-diversity statistics.

Embeddings live in a shared 512-d audio-text space and are compared with
cosine similarity. The diversity statistics (mean pairwise cosine distance
and a k=2 cluster-separation score) are deliberately simple so they can be
cross-checked against brute-force oracles in the tests. All distance math
accumulates in float64 regardless of storage precision.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    EmptyInputError,
    InsufficientDataError,
    ShapeError,
    UnsupportedFormatError,
)

EMBEDDING_DIM = 512

# Returned by cluster_separation when the two clusters have zero radius but
# distinct centers (the score diverges in that limit).
CLUSTER_SEPARATION_CAP = 1e12

_EMB_MAGIC = b"EMB1"
_EMB_HEADER = struct.Struct("<4sII4x")  # magic, dim, count, reserved


@dataclass(frozen=True)
class Embedding:
    """A fixed-length vector in the shared audio-text space."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ShapeError(f"embedding must be 1-d, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DegenerateInputError("embedding has non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def unit(self) -> "Embedding":
        n = self.norm()
        if n == 0.0:
            raise DegenerateInputError("cannot normalize a zero embedding")
        return Embedding(self.values / n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.values.shape[0], self.values.tobytes()))

    def tolist(self) -> list[float]:
        return [float(v) for v in self.values]


@dataclass(frozen=True)
class DiversityReport:
    """Diversity statistics over one set of embeddings."""

    mean_pairwise_cosine_distance: float
    cluster_separation: float
    n: int


@dataclass
class KMeans2Result:
    """Outcome of a k=2 Lloyd run (best of the seeded restarts)."""

    labels: np.ndarray
    centroids: np.ndarray
    within_dispersion: float
    between_dispersion: float
    # Objective after each assignment step of the winning restart; used to
    # assert the per-iteration monotonicity invariant.
    objective_history: list[float] = field(default_factory=list)


def _as_matrix(embeddings: Sequence[Embedding]) -> np.ndarray:
    if len(embeddings) == 0:
        raise EmptyInputError("no embeddings given")
    dims = {e.dim for e in embeddings}
    if len(dims) != 1:
        raise ShapeError(f"mixed embedding dimensions: {sorted(dims)}")
    return np.stack([e.values for e in embeddings]).astype(np.float64)


def cosine_similarity(a: Embedding, b: Embedding) -> float:
    """Cosine of the angle between two embeddings, in [-1, 1]."""
    if a.dim != b.dim:
        raise ShapeError(f"dimension mismatch: {a.dim} vs {b.dim}")
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine similarity undefined for zero vector")
    return float(np.dot(a.values / na, b.values / nb))


def mean_embedding(embeddings: Sequence[Embedding]) -> Embedding:
    """Component-wise mean, L2-normalized."""
    mat = _as_matrix(embeddings)
    mean = mat.mean(axis=0)
    n = np.linalg.norm(mean)
    if n == 0.0:
        raise DegenerateInputError("mean of embeddings is the zero vector")
    return Embedding(mean / n)


def mean_pairwise_cosine_distance(embeddings: Sequence[Embedding]) -> float:
    """Mean of (1 - cos) over all unordered pairs. Higher = broader spread."""
    if len(embeddings) < 2:
        raise InsufficientDataError("need at least 2 embeddings")
    mat = _as_matrix(embeddings)
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateInputError("zero vector in set")
    unit = mat / norms[:, None]
    gram = unit @ unit.T
    n = len(embeddings)
    iu = np.triu_indices(n, k=1)
    return float(np.mean(1.0 - gram[iu]))


def _kmeans_pp_pair(points: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    """k-means++ draw of two initial centers (indices) for k=2."""
    n = points.shape[0]
    i = int(rng.integers(n))
    d2 = np.sum((points - points[i]) ** 2, axis=1)
    total = float(d2.sum())
    if total <= 0.0:
        j = int(rng.integers(n))
    else:
        j = int(rng.choice(n, p=d2 / total))
    if i == j:
        j = (i + 1) % n
    return (min(i, j), max(i, j))


def _lloyd(points: np.ndarray, k: int, init_idx: Sequence[int], max_iter: int):
    centroids = points[list(init_idx)].copy()
    labels = np.zeros(points.shape[0], dtype=np.int64)
    history: list[float] = []
    for _ in range(max_iter):
        d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        # Repair empty clusters by seeding them with the worst-fit point;
        # this strictly lowers the objective, preserving monotonicity.
        for c in range(k):
            if not np.any(new_labels == c):
                worst = int(np.argmax(d2[np.arange(len(points)), new_labels]))
                new_labels[worst] = c
                centroids[c] = points[worst]
                d2[:, c] = np.sum((points - centroids[c]) ** 2, axis=1)
        obj = float(np.sum(d2[np.arange(len(points)), new_labels]))
        history.append(obj)
        converged = bool(np.array_equal(new_labels, labels)) and len(history) > 1
        labels = new_labels
        for c in range(k):
            centroids[c] = points[labels == c].mean(axis=0)
        if converged:
            break
    within = float(
        np.sum((points - centroids[labels]) ** 2)
    )
    return labels, centroids, within, history


def kmeans2(
    embeddings: Sequence[Embedding],
    seed: int,
    restarts: int = 8,
    max_iter: int = 100,
) -> KMeans2Result:
    """Lloyd's algorithm at k=2 with seeded k-means++ restarts.

    Runs ``restarts`` independent fits with seeds ``seed..seed+restarts-1``
    and keeps the lowest within-cluster dispersion. Restarts redraw their
    k-means++ init when it lands on a center pair an earlier restart already
    explored, so the tiny-n search covers distinct basins.
    """
    if len(embeddings) < 3:
        raise InsufficientDataError("k=2 clustering needs at least 3 points")
    points = _as_matrix(embeddings)
    if np.all(points == points[0]):
        raise DegenerateInputError("all points identical")
    best = None
    seen_inits: set[tuple[int, int]] = set()
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        pair = _kmeans_pp_pair(points, rng)
        for _ in range(32):
            if pair not in seen_inits:
                break
            pair = _kmeans_pp_pair(points, rng)
        seen_inits.add(pair)
        labels, centroids, within, history = _lloyd(points, 2, pair, max_iter)
        if best is None or within < best[2]:
            best = (labels, centroids, within, history)
    labels, centroids, within, history = best
    overall = points.mean(axis=0)
    sizes = np.bincount(labels, minlength=2).astype(np.float64)
    between = float(np.sum(sizes * np.sum((centroids - overall) ** 2, axis=1)))
    return KMeans2Result(labels, centroids, within, between, history)


def cluster_separation(
    embeddings: Sequence[Embedding],
    seed: int,
    cap: float = CLUSTER_SEPARATION_CAP,
) -> float:
    """Calinski-Harabasz score at k=2. Higher = clearer split into clusters."""
    result = kmeans2(embeddings, seed)
    n = len(embeddings)
    if result.within_dispersion == 0.0:
        if result.between_dispersion == 0.0:
            raise DegenerateInputError("no dispersion in either direction")
        return cap
    score = (result.between_dispersion / 1.0) / (result.within_dispersion / (n - 2))
    return float(min(score, cap))


def diversity_report(embeddings: Sequence[Embedding], seed: int = 0) -> DiversityReport:
    return DiversityReport(
        mean_pairwise_cosine_distance=mean_pairwise_cosine_distance(embeddings),
        cluster_separation=cluster_separation(embeddings, seed),
        n=len(embeddings),
    )


def write_embeddings(path: str | Path, embeddings: Sequence[Embedding]) -> None:
    """Write a set of embeddings in the EMB1 binary format (float32 LE)."""
    mat = _as_matrix(embeddings).astype("<f4")
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_EMB_HEADER.pack(_EMB_MAGIC, mat.shape[1], mat.shape[0]))
        fh.write(mat.tobytes(order="C"))


def read_embeddings(path: str | Path) -> list[Embedding]:
    """Read embeddings from an EMB1 binary file or a JSON array-of-arrays."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == _EMB_MAGIC:
        if len(raw) < _EMB_HEADER.size:
            raise UnsupportedFormatError(f"{path}: truncated header")
        _, dim, count = _EMB_HEADER.unpack(raw[: _EMB_HEADER.size])
        expected = _EMB_HEADER.size + 4 * dim * count
        if len(raw) != expected:
            raise UnsupportedFormatError(
                f"{path}: expected {expected} bytes for {count}x{dim}, got {len(raw)}"
            )
        mat = np.frombuffer(raw, dtype="<f4", offset=_EMB_HEADER.size).reshape(count, dim)
        return [Embedding(row) for row in mat.astype(np.float64)]
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise UnsupportedFormatError(f"{path}: neither EMB1 nor JSON ({exc})") from exc
    if not isinstance(data, list):
        raise UnsupportedFormatError(f"{path}: JSON embeddings must be a list of arrays")
    return [Embedding(np.asarray(row, dtype=np.float64)) for row in data]


def basis(index: int, dim: int = EMBEDDING_DIM) -> Embedding:
    """Standard basis vector, handy for fixtures."""
    v = np.zeros(dim)
    v[index] = 1.0
    return Embedding(v)


def random_unit(rng: np.random.Generator, dim: int = EMBEDDING_DIM) -> Embedding:
    v = rng.normal(size=dim)
    return Embedding(v / np.linalg.norm(v))


def stack(embeddings: Iterable[Embedding]) -> np.ndarray:
    return _as_matrix(list(embeddings))
