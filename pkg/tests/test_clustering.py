"""Tests for the cluster tree and the admissible/dense block partition."""

import numpy as np
import pytest

from hmat.clustering import (
    Block,
    ClusterNode,
    box_distance,
    build_block_partition,
    build_cluster_tree,
    is_admissible,
)
from hmat.geometry import Geometry, PointCloud, generate_points


def _cloud_from(points, seed=0):
    return PointCloud(points=np.asarray(points, dtype=float), geometry=Geometry.CUBE, seed=seed)


def test_single_point_tree_is_one_leaf():
    tree = build_cluster_tree(_cloud_from([[0.1, 0.2, 0.3]]), leaf_size=32)
    assert tree.root.is_leaf
    assert tree.root.size == 1
    np.testing.assert_array_equal(tree.perm, [0])
    np.testing.assert_array_equal(tree.inverse_perm, [0])


def test_collinear_points_split_at_spatial_median():
    # 2*leaf_size equally spaced points on a line, fed in reverse order:
    # the root must split into two equal leaves, with the left child
    # holding the spatially left half regardless of input order.
    leaf_size = 4
    xs = np.linspace(-1.0, 1.0, 2 * leaf_size)[::-1]
    points = np.zeros((2 * leaf_size, 3))
    points[:, 0] = xs
    tree = build_cluster_tree(_cloud_from(points), leaf_size=leaf_size)
    root = tree.root
    assert not root.is_leaf
    assert root.left.is_leaf and root.right.is_leaf
    assert root.left.size == root.right.size == leaf_size
    left_originals = tree.inverse_perm[root.left.start : root.left.end]
    assert set(xs[left_originals]) == set(xs[xs < 0])


def test_leaf_ranges_concatenate_to_full_range():
    cloud = generate_points(Geometry.SURF, 333, 6)
    tree = build_cluster_tree(cloud, leaf_size=16)
    leaves = tree.leaves()
    assert leaves[0].start == 0
    assert leaves[-1].end == 333
    for a, b in zip(leaves, leaves[1:]):
        assert a.end == b.start
    assert all(leaf.size <= 16 for leaf in leaves)
    # permutation and its inverse really are inverses
    np.testing.assert_array_equal(tree.perm[tree.inverse_perm], np.arange(333))
    np.testing.assert_array_equal(tree.inverse_perm[tree.perm], np.arange(333))


def test_node_bounding_boxes_contain_their_points():
    cloud = generate_points(Geometry.CUBE, 200, 4)
    tree = build_cluster_tree(cloud, leaf_size=8)
    permuted = cloud.points[tree.inverse_perm]

    def visit(node):
        pts = permuted[node.start : node.end]
        assert np.all(pts >= node.bbox_min - 1e-15)
        assert np.all(pts <= node.bbox_max + 1e-15)
        if not node.is_leaf:
            assert node.left.start == node.start and node.right.end == node.end
            assert node.left.end == node.right.start
            visit(node.left)
            visit(node.right)

    visit(tree.root)


def test_coincident_points_still_terminate():
    points = np.tile([[0.5, -0.5, 0.0]], (20, 1))
    tree = build_cluster_tree(_cloud_from(points), leaf_size=4)
    leaves = tree.leaves()
    assert sum(leaf.size for leaf in leaves) == 20
    assert all(leaf.size <= 4 for leaf in leaves)


def test_box_distance_of_separated_and_overlapping_boxes():
    a = ClusterNode(start=0, end=1, bbox_min=np.zeros(3), bbox_max=np.ones(3))
    b = ClusterNode(
        start=1, end=2, bbox_min=np.array([3.0, 0.0, 0.0]), bbox_max=np.array([4.0, 1.0, 1.0])
    )
    assert box_distance(a, b) == pytest.approx(2.0)
    assert box_distance(a, a) == 0.0


def test_admissibility_of_well_separated_unit_boxes():
    # unit-diameter boxes at distance 10 with eta=2: min diameter 1 <= 20
    a = ClusterNode(
        start=0, end=1, bbox_min=np.zeros(3), bbox_max=np.array([1.0, 0.0, 0.0])
    )
    b = ClusterNode(
        start=1, end=2, bbox_min=np.array([11.0, 0.0, 0.0]), bbox_max=np.array([12.0, 0.0, 0.0])
    )
    assert is_admissible(a, b, eta=2.0)
    # a cluster against itself: distance 0, positive diameter
    assert not is_admissible(a, a, eta=2.0)


def test_root_root_pair_is_never_admissible():
    cloud = generate_points(Geometry.CUBE, 100, 1)
    tree = build_cluster_tree(cloud, leaf_size=8)
    assert not is_admissible(tree.root, tree.root, eta=1000.0)


@pytest.mark.parametrize("geometry", list(Geometry))
@pytest.mark.parametrize("n", [1, 2, 3, 33, 100])
def test_partition_tiles_the_index_square(geometry, n):
    cloud = generate_points(geometry, n, 13)
    tree = build_cluster_tree(cloud, leaf_size=8)
    partition = build_block_partition(tree, eta=2.0)
    assert partition.area() == n * n
    coverage = np.zeros((n, n), dtype=np.int8)
    for block in partition.blocks:
        r, c = block.row_cluster, block.col_cluster
        coverage[r.start : r.end, c.start : c.end] += 1
    assert np.all(coverage == 1)


def test_partition_structure_is_symmetric():
    cloud = generate_points(Geometry.EDGE, 300, 2)
    tree = build_cluster_tree(cloud, leaf_size=16)
    partition = build_block_partition(tree, eta=2.0)
    keys = {
        (b.row_cluster.start, b.row_cluster.end, b.col_cluster.start, b.col_cluster.end)
        for b in partition.blocks
    }
    assert keys == {(c0, c1, r0, r1) for (r0, r1, c0, c1) in keys}


def test_block_dimensions_match_cluster_sizes():
    cloud = generate_points(Geometry.SURF, 150, 8)
    tree = build_cluster_tree(cloud, leaf_size=8)
    partition = build_block_partition(tree, eta=2.0)
    for block in partition.blocks:
        assert block.m == block.row_cluster.size
        assert block.n == block.col_cluster.size
        assert block.shape == (block.m, block.n)
    assert partition.n_admissible == sum(1 for b in partition.blocks if b.admissible)


def test_smaller_eta_never_adds_admissible_coverage():
    # admissibility is monotone in eta pair by pair, so the matrix area
    # covered by admissible blocks can only shrink as eta decreases (the
    # block *count* is not monotone: larger eta stops higher in the tree,
    # giving fewer but larger admissible blocks)
    cloud = generate_points(Geometry.CUBE, 256, 3)
    tree = build_cluster_tree(cloud, leaf_size=8)
    areas = []
    for eta in (4.0, 2.0, 1.0, 0.5):
        partition = build_block_partition(tree, eta)
        areas.append(sum(b.m * b.n for b in partition.blocks if b.admissible))
        assert partition.area() == 256 * 256
    assert areas == sorted(areas, reverse=True)

    # the pairwise property itself, on every leaf pair of the tree
    leaves = tree.leaves()
    for a in leaves[::3]:
        for b in leaves[::3]:
            if is_admissible(a, b, eta=0.5):
                assert is_admissible(a, b, eta=2.0)


def test_leaf_size_at_least_n_gives_single_dense_block():
    cloud = generate_points(Geometry.CUBE, 50, 0)
    tree = build_cluster_tree(cloud, leaf_size=64)
    partition = build_block_partition(tree, eta=2.0)
    assert tree.root.is_leaf
    assert len(partition.blocks) == 1
    block = partition.blocks[0]
    assert isinstance(block, Block)
    assert not block.admissible
    assert block.shape == (50, 50)
