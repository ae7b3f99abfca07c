"""Build a hierarchical matrix and use it.

The walkthrough: scatter points on a sphere surface, organise them into a
cluster tree, tile the index square into admissible (compressible) and
dense blocks, compress with a relative Frobenius budget, and check what
came out -- storage, achieved error, and matrix-vector accuracy.
"""

import numpy as np

from hmat import (
    BuildConfig,
    Geometry,
    Kernel,
    KernelMatrix,
    Method,
    TolerancePolicy,
    achieved_error,
    assemble,
    build_block_partition,
    build_cluster_tree,
    generate_points,
)

n = 2048
eps = 1e-4
print(f"== geometry: {n} points on the unit sphere surface")
cloud = generate_points(Geometry.SURF, n, seed=0)
print(f"   bounding box spans {cloud.points.min(axis=0).round(2)} .. {cloud.points.max(axis=0).round(2)}")

print("\n== cluster tree and block partition")
tree = build_cluster_tree(cloud, leaf_size=32)
partition = build_block_partition(tree, eta=2.0)
admissible = sum(1 for b in partition.blocks if b.admissible)
print(f"   {len(tree.leaves())} leaves, {len(partition.blocks)} blocks "
      f"({admissible} admissible, {len(partition.blocks) - admissible} dense)")
area = sum(b.shape[0] * b.shape[1] for b in partition.blocks)
print(f"   tiling check: block areas sum to {area} == N^2 == {n * n}")

print(f"\n== compressing 1/r^2 interactions at a relative budget of {eps:g}")
kernel = Kernel.inverse_power(2)
policy = TolerancePolicy(method=Method.BREM, epsilon=eps, n=n)
h, report = assemble(cloud, kernel, BuildConfig(policy=policy), tree=tree, partition=partition)
print(f"   stored floats: {h.nnz()} of {n * n} "
      f"(compression factor {h.compression():.2f}x)")
print(f"   low-rank ranks: min {report.rank_min}, median {report.rank_med:g}, "
      f"max {report.rank_max}; {report.n_dense_fallback} blocks fell back to dense")

print("\n== achieved error against the exact kernel matrix")
km = KernelMatrix(cloud, kernel)
err = achieved_error(h, km, mode="exact")
print(f"   relative Frobenius error {err.rel_fro:.3e} (budget {eps:g})")
print(f"   largest entrywise deviation {err.abs_max:.3e}")

print("\n== matrix-vector products")
rng = np.random.default_rng(3)
x = rng.standard_normal(n)
y = h.mvp(x)
dense = km.dense()
exact = dense @ x
rel = np.linalg.norm(y - exact) / np.linalg.norm(exact)
print(f"   |Hx - Bx| / |Bx| = {rel:.3e}")
print("   the compressed product costs O(nnz) instead of O(N^2) flops")
