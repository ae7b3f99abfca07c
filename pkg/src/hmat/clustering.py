"""Geometric cluster trees and admissibility-driven block partitions.

A cluster tree recursively bisects the particle index set: each node is
split at the positional median along the longest axis of its bounding box,
using a stable sort so ties (including fully coincident points) fall back to
index order.  The tree induces a permutation of the particles; all block
structure downstream lives in the permuted ordering.

A pair of clusters ``(t, s)`` is admissible when

    min(diam(t), diam(s)) <= eta * dist(t, s)

with diameters and distances measured on the axis-aligned bounding boxes.
The block partition tiles the full matrix with maximal admissible blocks
plus dense leaf-by-leaf blocks where the criterion never holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import PointCloud

__all__ = [
    "ClusterNode",
    "ClusterTree",
    "Block",
    "BlockPartition",
    "build_cluster_tree",
    "build_block_partition",
    "is_admissible",
    "box_distance",
]


@dataclass
class ClusterNode:
    """A contiguous index range ``[start, end)`` in the permuted ordering."""

    start: int
    end: int
    bbox_min: np.ndarray
    bbox_max: np.ndarray
    left: "ClusterNode | None" = None
    right: "ClusterNode | None" = None

    @property
    def size(self) -> int:
        return self.end - self.start

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def diameter(self) -> float:
        """Euclidean diameter of the bounding box."""
        d = self.bbox_max - self.bbox_min
        return float(np.sqrt(d @ d))


@dataclass
class ClusterTree:
    """Binary cluster tree plus the particle permutation it induces.

    ``perm`` maps original particle index to permuted slot;
    ``inverse_perm`` maps permuted slot back to original index, i.e.
    ``inverse_perm[perm[i]] == i``.
    """

    root: ClusterNode
    perm: np.ndarray
    inverse_perm: np.ndarray
    leaf_size: int

    @property
    def n(self) -> int:
        return self.root.size

    def leaves(self) -> list[ClusterNode]:
        out: list[ClusterNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out


def build_cluster_tree(cloud: PointCloud, leaf_size: int = 32) -> ClusterTree:
    """Bisect a cloud down to leaves of at most ``leaf_size`` particles.

    Splitting is at the positional median (index midpoint of the sorted
    range) along the longest bounding-box axis.  The sort is stable, so a
    node whose points are all coincident still splits, by index midpoint.
    """
    if leaf_size < 1:
        raise ValueError("leaf_size must be at least 1")
    n = cloud.n
    if n == 0:
        raise ValueError("cannot build a cluster tree over an empty cloud")
    points = cloud.points
    order = np.arange(n)

    def build(start: int, end: int) -> ClusterNode:
        chunk = points[order[start:end]]
        bbox_min = chunk.min(axis=0)
        bbox_max = chunk.max(axis=0)
        node = ClusterNode(start, end, bbox_min, bbox_max)
        if end - start > leaf_size:
            axis = int(np.argmax(bbox_max - bbox_min))
            seg = order[start:end]
            local = np.argsort(points[seg, axis], kind="stable")
            order[start:end] = seg[local]
            mid = start + (end - start) // 2
            node.left = build(start, mid)
            node.right = build(mid, end)
        return node

    root = build(0, n)
    perm = np.empty(n, dtype=np.intp)
    perm[order] = np.arange(n)
    return ClusterTree(root=root, perm=perm, inverse_perm=order, leaf_size=leaf_size)


def box_distance(a: ClusterNode, b: ClusterNode) -> float:
    """Euclidean distance between two axis-aligned bounding boxes (0 if they overlap)."""
    gap = np.maximum(0.0, np.maximum(a.bbox_min - b.bbox_max, b.bbox_min - a.bbox_max))
    return float(np.sqrt(gap @ gap))


def is_admissible(t: ClusterNode, s: ClusterNode, eta: float) -> bool:
    """Whether ``min(diam t, diam s) <= eta * dist(t, s)`` on bounding boxes."""
    return min(t.diameter, s.diameter) <= eta * box_distance(t, s)


@dataclass
class Block:
    """One tile of the partition: a row cluster by a column cluster."""

    row_cluster: ClusterNode
    col_cluster: ClusterNode
    admissible: bool

    @property
    def m(self) -> int:
        return self.row_cluster.size

    @property
    def n(self) -> int:
        return self.col_cluster.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)


@dataclass
class BlockPartition:
    """A disjoint tiling of the full (permuted) matrix into blocks."""

    blocks: list[Block] = field(default_factory=list)
    n: int = 0
    eta: float = 0.0

    @property
    def n_admissible(self) -> int:
        return sum(1 for b in self.blocks if b.admissible)

    def area(self) -> int:
        """Total number of entries covered; equals ``n * n`` for a valid tiling."""
        return sum(b.m * b.n for b in self.blocks)


def build_block_partition(tree: ClusterTree, eta: float = 2.0) -> BlockPartition:
    """Tile the matrix by recursing from the root pair ``(root, root)``.

    An admissible pair becomes a low-rank block and recursion stops.  An
    inadmissible pair of leaves becomes a dense block.  Otherwise recursion
    descends into the children of whichever clusters have them (both, when
    both are interior).  Block order is the deterministic depth-first visit
    order, which fixes assembly order downstream.
    """
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    blocks: list[Block] = []

    def visit(t: ClusterNode, s: ClusterNode) -> None:
        if is_admissible(t, s, eta):
            blocks.append(Block(t, s, True))
            return
        if t.is_leaf and s.is_leaf:
            blocks.append(Block(t, s, False))
            return
        t_kids = (t,) if t.is_leaf else (t.left, t.right)
        s_kids = (s,) if s.is_leaf else (s.left, s.right)
        for tk in t_kids:
            for sk in s_kids:
                visit(tk, sk)

    visit(tree.root, tree.root)
    return BlockPartition(blocks=blocks, n=tree.n, eta=eta)
