"""The 13 dataset-level features extracted from one (train, val, test) triplet.

Four groups: embedding distribution (md, fdr, chi from class-labeled
clusters; n_clusters, dbi from density clustering), label distribution
(pms, kurt, n_classes), surrogate learnability (mcr), and token statistics
(avg/min/max token counts, unique-token count).

Distance conventions are squared Euclidean throughout: cluster diameter r_i
is the mean squared distance to the centroid, and d_ij is the squared
distance between centroids.  chi is the scaled within-to-between ratio
(S_W / S_B) * (N - K) / (K - 1); the textbook between-to-within variant is
available behind ``chi_standard``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import hdbscan
from .corpus import Corpus, DatasetTriplet
from .embedding import EmbeddingMatrix
from .surrogate import SurrogateConfig, surrogate_mcr
from .tokenization import TokenList, WordpieceVocab, tokenize

EPS_GUARD = 1e-12

FEATURE_NAMES = (
    "md",
    "fdr",
    "chi",
    "n_clusters",
    "dbi",
    "pms",
    "kurt",
    "n_classes",
    "mcr",
    "avg_tokens",
    "min_tokens",
    "max_tokens",
    "n_unique_tokens",
)


class FeatureError(ValueError):
    """Degenerate inputs that leave a feature undefined."""


@dataclass(frozen=True)
class FeatureConfig:
    min_cluster_size: int = 5
    eps_guard: bool = False
    chi_standard: bool = False
    unique_tokens: str = "distinct"  # or "hapax"
    token_scheme: str = "simple"
    vocab: WordpieceVocab | None = None
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)


@dataclass(frozen=True)
class ClusterStats:
    """Per-group moments shared by the separation and clustering indices."""

    sizes: np.ndarray  # K
    centroids: np.ndarray  # K x dim
    diameters: np.ndarray  # K, mean squared distance to own centroid
    pair_sq_dist: np.ndarray  # K x K squared centroid distances
    global_centroid: np.ndarray
    n_points: int

    @property
    def k(self) -> int:
        return len(self.sizes)

    @classmethod
    def from_labeled_points(cls, points: np.ndarray, labels: np.ndarray) -> "ClusterStats":
        points = np.asarray(points, dtype=np.float64)
        labels = np.asarray(labels)
        groups = np.unique(labels)
        sizes = np.empty(len(groups), dtype=np.int64)
        centroids = np.empty((len(groups), points.shape[1]))
        diameters = np.empty(len(groups))
        for g, group in enumerate(groups):
            member = points[labels == group]
            sizes[g] = len(member)
            centroids[g] = member.mean(axis=0)
            diameters[g] = float(np.mean(np.sum((member - centroids[g]) ** 2, axis=1)))
        delta = centroids[:, None, :] - centroids[None, :, :]
        pair_sq = np.sum(delta**2, axis=2)
        return cls(
            sizes=sizes,
            centroids=centroids,
            diameters=diameters,
            pair_sq_dist=pair_sq,
            global_centroid=points.mean(axis=0),
            n_points=len(points),
        )


def class_separation(
    emb: EmbeddingMatrix | np.ndarray,
    labels,
    eps_guard: bool = False,
    chi_standard: bool = False,
) -> dict[str, float]:
    """md, fdr, chi of class-labeled embeddings.

    md is the mean squared centroid distance over unordered class pairs;
    fdr = S_B / S_W with S_W = sum_i N_i * r_i and
    S_B = sum_k N_k * ||m_k - m||^2.
    """
    points = emb.values if isinstance(emb, EmbeddingMatrix) else np.asarray(emb)
    labels = np.asarray(labels)
    if len(labels) != len(points):
        raise ValueError("labels and embeddings disagree on row count")
    stats = ClusterStats.from_labeled_points(points, labels)
    k = stats.k
    if k < 2:
        raise FeatureError("class separation undefined with a single class present")

    iu = np.triu_indices(k, 1)
    md = float(stats.pair_sq_dist[iu].sum() * 2.0 / (k * (k - 1)))

    s_w = float(np.sum(stats.sizes * stats.diameters))
    s_b = float(
        np.sum(stats.sizes * np.sum((stats.centroids - stats.global_centroid) ** 2, axis=1))
    )
    if s_w == 0.0:
        if not eps_guard:
            raise FeatureError("within-class scatter is zero; fdr undefined")
        s_w = EPS_GUARD
    if s_b == 0.0:
        if not eps_guard:
            raise FeatureError("between-class scatter is zero; chi undefined")
        s_b = EPS_GUARD
    fdr = s_b / s_w
    scale = (stats.n_points - k) / (k - 1)
    chi = (s_b / s_w) * scale if chi_standard else (s_w / s_b) * scale
    return {"md": md, "fdr": fdr, "chi": chi}


def davies_bouldin(
    emb: EmbeddingMatrix | np.ndarray, labels, eps_guard: bool = False
) -> float:
    """DBI over non-noise clusters; 0 by convention below two clusters.

    Similarity R_ij = (r_i + r_j) / d_ij with the squared-distance
    conventions of ClusterStats.
    """
    points = emb.values if isinstance(emb, EmbeddingMatrix) else np.asarray(emb)
    labels = np.asarray(labels)
    keep = labels >= 0
    clustered = labels[keep]
    if len(np.unique(clustered)) < 2:
        return 0.0
    stats = ClusterStats.from_labeled_points(points[keep], clustered)
    d = stats.pair_sq_dist.copy()
    off_diag = ~np.eye(stats.k, dtype=bool)
    if np.any(d[off_diag] == 0.0):
        if not eps_guard:
            raise FeatureError("coincident cluster centroids; dbi undefined")
        d[off_diag & (d == 0.0)] = EPS_GUARD
    r_sum = stats.diameters[:, None] + stats.diameters[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(off_diag, r_sum / d, -np.inf)
    return float(np.mean(ratio.max(axis=1)))


def clustering_stats(
    emb: EmbeddingMatrix | np.ndarray,
    min_cluster_size: int = 5,
    eps_guard: bool = False,
) -> dict[str, float]:
    """n_clusters and dbi of the density-clustered embedding space."""
    assignment = hdbscan(emb, min_cluster_size=min_cluster_size)
    dbi = davies_bouldin(emb, assignment.labels, eps_guard=eps_guard)
    return {"n_clusters": float(assignment.n_clusters), "dbi": dbi}


def label_stats(labels, total_classes: int, eps_guard: bool = False) -> dict[str, float]:
    """pms (Pearson median skewness), kurt, and the declared class count.

    Both moments treat label ids as integers and use population statistics;
    zero label variance leaves them undefined unless the epsilon guard is on.
    """
    y = np.asarray(labels, dtype=np.float64)
    if len(y) < 2:
        raise FeatureError("label statistics need at least 2 records")
    if total_classes < 1:
        raise ValueError("total_classes must be positive")
    mean = float(np.mean(y))
    median = float(np.median(y))
    var = float(np.mean((y - mean) ** 2))
    if var == 0.0:
        if not eps_guard:
            raise FeatureError("all labels identical; pms and kurt undefined")
        sigma = np.sqrt(EPS_GUARD)
        var = EPS_GUARD
    else:
        sigma = np.sqrt(var)
    pms = 3.0 * (mean - median) / sigma
    kurt = float(np.mean((y - mean) ** 4)) / (var * var)
    return {"pms": pms, "kurt": kurt, "n_classes": float(total_classes)}


def token_stats(token_lists: list[TokenList], unique_tokens: str = "distinct") -> dict[str, float]:
    """avg/min/max per-text token counts plus the unique-token count.

    ``unique_tokens="distinct"`` counts distinct token strings;
    ``"hapax"`` counts tokens that occur exactly once corpus-wide.
    """
    if not token_lists:
        raise FeatureError("token statistics need at least one text")
    if unique_tokens not in ("distinct", "hapax"):
        raise ValueError(f"unknown unique_tokens mode {unique_tokens!r}")
    counts = np.asarray([len(tl.tokens) for tl in token_lists], dtype=np.int64)
    tally: dict[str, int] = {}
    for tl in token_lists:
        for tok in tl.tokens:
            tally[tok] = tally.get(tok, 0) + 1
    if unique_tokens == "distinct":
        n_unique = len(tally)
    else:
        n_unique = sum(1 for c in tally.values() if c == 1)
    return {
        "avg_tokens": float(np.mean(counts)),
        "min_tokens": float(counts.min()),
        "max_tokens": float(counts.max()),
        "n_unique_tokens": float(n_unique),
    }


@dataclass(frozen=True)
class FeatureVector:
    md: float
    fdr: float
    chi: float
    n_clusters: int
    dbi: float
    pms: float
    kurt: float
    n_classes: int
    mcr: float
    avg_tokens: float
    min_tokens: int
    max_tokens: int
    n_unique_tokens: int

    def __post_init__(self):
        values = self.as_array()
        if not np.isfinite(values).all():
            raise ValueError("feature vector contains non-finite values")
        if not self.min_tokens <= self.avg_tokens <= self.max_tokens:
            raise ValueError("token counts violate min <= avg <= max")
        if not 0.0 <= self.mcr <= 1.0:
            raise ValueError(f"mcr {self.mcr} outside [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.asarray([float(getattr(self, name)) for name in FEATURE_NAMES])

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FEATURE_NAMES}


def extract_features(
    triplet: DatasetTriplet,
    corpus: Corpus,
    embeddings: EmbeddingMatrix,
    config: FeatureConfig = FeatureConfig(),
) -> FeatureVector:
    """Assemble all 13 features for one triplet.

    ``embeddings`` must hold one row per train record, in train order.
    Errors from any component are re-raised annotated with the triplet id.
    """
    if embeddings.rows != len(triplet.train_indices):
        raise ValueError(
            f"{triplet.triplet_id}: embeddings have {embeddings.rows} rows, "
            f"train set has {len(triplet.train_indices)}"
        )
    if triplet.corpus_id != corpus.id:
        raise ValueError(
            f"{triplet.triplet_id}: triplet belongs to corpus {triplet.corpus_id!r}, "
            f"got {corpus.id!r}"
        )
    train = triplet.train_records(corpus)
    val = triplet.val_records(corpus)
    labels = np.asarray([rec.label for rec in train], dtype=np.int64)

    try:
        sep = class_separation(
            embeddings, labels, eps_guard=config.eps_guard, chi_standard=config.chi_standard
        )
        clust = clustering_stats(
            embeddings, min_cluster_size=config.min_cluster_size, eps_guard=config.eps_guard
        )
        lab = label_stats(labels, corpus.total_classes, eps_guard=config.eps_guard)
        token_lists = [
            tokenize(rec.text, scheme=config.token_scheme, vocab=config.vocab) for rec in train
        ]
        tok = token_stats(token_lists, unique_tokens=config.unique_tokens)
        mcr = surrogate_mcr(train, val, corpus.total_classes, config.surrogate)
    except FeatureError as exc:
        raise FeatureError(f"{triplet.triplet_id}: {exc}") from exc

    return FeatureVector(
        md=sep["md"],
        fdr=sep["fdr"],
        chi=sep["chi"],
        n_clusters=int(clust["n_clusters"]),
        dbi=clust["dbi"],
        pms=lab["pms"],
        kurt=lab["kurt"],
        n_classes=int(lab["n_classes"]),
        mcr=mcr,
        avg_tokens=tok["avg_tokens"],
        min_tokens=int(tok["min_tokens"]),
        max_tokens=int(tok["max_tokens"]),
        n_unique_tokens=int(tok["n_unique_tokens"]),
    )
