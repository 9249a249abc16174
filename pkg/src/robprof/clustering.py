"""Density-based clustering of embedding spaces (HDBSCAN).

Pipeline: mutual-reachability distances (core distance = Euclidean distance
to the k-th nearest neighbor, self excluded, with k = min_cluster_size) ->
minimum spanning tree -> single-linkage hierarchy -> condensed tree at
min_cluster_size -> excess-of-mass cluster selection.  All tie-breaks are
pinned (equal-weight edges ordered by (row, column)), so results are
deterministic for a given input.

The tree root is eligible for selection, so a lone dense cluster comes back
as one cluster rather than all noise.  Fewer than min_cluster_size points
always yields all noise.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from numba import njit

from .embedding import EmbeddingMatrix

# Stand-in for 1/0 when identical points merge at distance zero; far above
# any 1/distance arising from distinct float coordinates at unit scale.
_LAMBDA_CAP = 1e15


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray  # int64, -1 denotes noise
    n_clusters: int

    def cluster_sizes(self) -> dict[int, int]:
        ids, counts = np.unique(self.labels[self.labels >= 0], return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}


def _euclidean_distances(points: np.ndarray) -> np.ndarray:
    """Exact symmetric pairwise distances with a zero diagonal."""
    x = np.asarray(points, dtype=np.float64)
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    upper = np.triu(d, 1)
    return upper + upper.T


def mutual_reachability(points: EmbeddingMatrix | np.ndarray, k: int) -> np.ndarray:
    """N x N mutual-reachability matrix: max(core_k(a), core_k(b), d(a, b)).

    core_k(x) is the distance to x's k-th nearest neighbor excluding x
    itself; when k == N it is clamped to the farthest neighbor.  Diagonal is
    zero by convention.
    """
    x = points.values if isinstance(points, EmbeddingMatrix) else np.asarray(points)
    n = x.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if n < k:
        raise ValueError(f"need at least k={k} points, got {n}")
    dist = _euclidean_distances(x)
    k_eff = min(k, n - 1)
    if k_eff == 0:
        core = np.zeros(n)
    else:
        # row-sorted position k_eff skips the self distance at position 0
        core = np.partition(dist, k_eff, axis=1)[:, k_eff]
    reach = np.maximum(dist, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(reach, 0.0)
    return reach


@njit(cache=True)
def _kruskal(order, rows, cols, weights, n):  # pragma: no cover - jitted
    parent = np.arange(n, dtype=np.int64)
    out_u = np.empty(n - 1, dtype=np.int64)
    out_v = np.empty(n - 1, dtype=np.int64)
    out_w = np.empty(n - 1, dtype=np.float64)
    count = 0
    for t in range(order.shape[0]):
        e = order[t]
        u = rows[e]
        v = cols[e]
        ru = u
        while parent[ru] != ru:
            parent[ru] = parent[parent[ru]]
            ru = parent[ru]
        rv = v
        while parent[rv] != rv:
            parent[rv] = parent[parent[rv]]
            rv = parent[rv]
        if ru != rv:
            parent[ru] = rv
            out_u[count] = u
            out_v[count] = v
            out_w[count] = weights[e]
            count += 1
            if count == n - 1:
                break
    return out_u, out_v, out_w


def _minimum_spanning_tree(reach: np.ndarray):
    """MST edges sorted ascending by (weight, row, col)."""
    n = reach.shape[0]
    iu, ju = np.triu_indices(n, 1)
    w = reach[iu, ju]
    order = np.lexsort((ju, iu, w))
    return _kruskal(order, iu.astype(np.int64), ju.astype(np.int64), w, n)


def _single_linkage(mst_u, mst_v, mst_w, n):
    """Scipy-style dendrogram (left, right, dist, size) from sorted MST edges."""
    parent = list(range(n))

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    node_of = list(range(n))
    size = [1] * (2 * n - 1)
    left = np.empty(n - 1, dtype=np.int64)
    right = np.empty(n - 1, dtype=np.int64)
    dist = np.empty(n - 1, dtype=np.float64)
    next_id = n
    for t in range(n - 1):
        ru, rv = find(int(mst_u[t])), find(int(mst_v[t]))
        la, lb = node_of[ru], node_of[rv]
        left[t], right[t] = min(la, lb), max(la, lb)
        dist[t] = mst_w[t]
        size[next_id] = size[la] + size[lb]
        parent[ru] = rv
        node_of[rv] = next_id
        next_id += 1
    return left, right, dist, np.asarray(size[n:], dtype=np.int64)


def _condense_tree(left, right, dist, sizes, n, min_cluster_size):
    """Collapse the dendrogram into cluster/point departure rows.

    Returns rows (parent, child, lambda, size); cluster ids start at n, with
    the root cluster labeled n.  A split only creates child clusters when
    both sides hold at least min_cluster_size points; smaller sides fall out
    of the parent as individual points at that split's lambda = 1/distance.
    """

    def node_size(node):
        return 1 if node < n else int(sizes[node - n])

    def subtree_points(node):
        points = []
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur < n:
                points.append(cur)
            else:
                stack.append(int(left[cur - n]))
                stack.append(int(right[cur - n]))
        return sorted(points)

    rows: list[tuple[int, int, float, int]] = []
    root_dendro = 2 * n - 2
    next_label = n + 1
    queue = deque([(root_dendro, n)])
    while queue:
        node, parent_label = queue.popleft()
        l, r = int(left[node - n]), int(right[node - n])
        d = float(dist[node - n])
        lam = 1.0 / d if d > 0.0 else _LAMBDA_CAP
        sl, sr = node_size(l), node_size(r)
        if sl >= min_cluster_size and sr >= min_cluster_size:
            for child in (l, r):
                label = next_label
                next_label += 1
                rows.append((parent_label, label, lam, node_size(child)))
                queue.append((child, label))
        elif sl < min_cluster_size and sr < min_cluster_size:
            for child in (l, r):
                for p in subtree_points(child):
                    rows.append((parent_label, p, lam, 1))
        else:
            big, small = (l, r) if sl >= min_cluster_size else (r, l)
            for p in subtree_points(small):
                rows.append((parent_label, p, lam, 1))
            queue.append((big, parent_label))
    return rows


def _select_clusters(rows, n):
    """Excess-of-mass selection; returns (selected cluster ids, point->cluster)."""
    birth = {n: 0.0}
    children: dict[int, list[int]] = {n: []}
    for parent, child, lam, _ in rows:
        if child >= n:
            birth[child] = lam
            children.setdefault(child, [])
            children[parent].append(child)
    stability = {c: 0.0 for c in birth}
    for parent, _, lam, size in rows:
        stability[parent] += (lam - birth[parent]) * size

    keep: dict[int, bool] = {}
    value: dict[int, float] = {}
    for c in sorted(birth, reverse=True):
        kids = children[c]
        subtree = sum(value[k] for k in kids)
        if kids and subtree > stability[c]:
            keep[c] = False
            value[c] = subtree
        else:
            keep[c] = True
            value[c] = stability[c]

    selected: set[int] = set()
    stack = [n]
    while stack:
        c = stack.pop()
        if keep[c]:
            selected.add(c)
        else:
            stack.extend(children[c])

    point_parent = {child: parent for parent, child, _, _ in rows if child < n}
    cluster_parent = {child: parent for parent, child, _, _ in rows if child >= n}
    assignment = {}
    for p, cluster in point_parent.items():
        a = cluster
        while a not in selected and a in cluster_parent:
            a = cluster_parent[a]
        assignment[p] = a if a in selected else -1
    return selected, assignment


def hdbscan(points: EmbeddingMatrix | np.ndarray, min_cluster_size: int = 5) -> ClusterAssignment:
    """Cluster points, returning labels with -1 for noise.

    min_cluster_size doubles as the core-distance neighbor count.  Inputs
    with fewer than min_cluster_size points are all noise.
    """
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    x = points.values if isinstance(points, EmbeddingMatrix) else np.asarray(points)
    n = x.shape[0]
    if n == 0:
        return ClusterAssignment(labels=np.empty(0, dtype=np.int64), n_clusters=0)
    if n < min_cluster_size:
        return ClusterAssignment(labels=np.full(n, -1, dtype=np.int64), n_clusters=0)

    reach = mutual_reachability(x, k=min_cluster_size)
    mst_u, mst_v, mst_w = _minimum_spanning_tree(reach)
    left, right, dist, sizes = _single_linkage(mst_u, mst_v, mst_w, n)
    rows = _condense_tree(left, right, dist, sizes, n, min_cluster_size)
    _, assignment = _select_clusters(rows, n)

    labels = np.full(n, -1, dtype=np.int64)
    remap: dict[int, int] = {}
    for p in range(n):
        cluster = assignment[p]
        if cluster == -1:
            continue
        if cluster not in remap:
            remap[cluster] = len(remap)
        labels[p] = remap[cluster]
    return ClusterAssignment(labels=labels, n_clusters=len(remap))
