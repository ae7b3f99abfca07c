"""Saving and loading assembled H-matrices.

Format: a single NumPy ``.npz`` archive, ``format_version`` 1.  Per-block
structure (index ranges, bounding boxes, admissibility, storage kind and
rank) is stored in flat arrays, and all dense and low-rank payloads are
concatenated with offset tables.  The build report, when given, rides along
as JSON.  A loaded H-matrix reproduces products, norms, and storage counts
of the original exactly; its partition carries standalone cluster nodes
(index ranges and boxes) rather than the full tree, which is not needed
after assembly.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .assembly import BuildReport, HMatrix
from .clustering import Block, BlockPartition, ClusterNode
from .lowrank import LowRankFactors
from .tolerances import Method

__all__ = ["FORMAT_VERSION", "save_hmatrix", "load_hmatrix"]

FORMAT_VERSION = 1


def save_hmatrix(h: HMatrix, path, report: BuildReport | None = None) -> None:
    """Write ``h`` (and optionally its build report) to ``path`` as ``.npz``."""
    blocks = h.partition.blocks
    nb = len(blocks)
    row_range = np.empty((nb, 2), dtype=np.int64)
    col_range = np.empty((nb, 2), dtype=np.int64)
    row_bbox = np.empty((nb, 6))
    col_bbox = np.empty((nb, 6))
    admissible = np.empty(nb, dtype=bool)
    kind = np.empty(nb, dtype=np.int8)  # 0 dense, 1 low-rank
    rank = np.zeros(nb, dtype=np.int64)
    dense_parts: list[np.ndarray] = []
    u_parts: list[np.ndarray] = []
    v_parts: list[np.ndarray] = []
    for b, (blk, st) in enumerate(zip(blocks, h.storage)):
        row_range[b] = (blk.row_cluster.start, blk.row_cluster.end)
        col_range[b] = (blk.col_cluster.start, blk.col_cluster.end)
        row_bbox[b, :3] = blk.row_cluster.bbox_min
        row_bbox[b, 3:] = blk.row_cluster.bbox_max
        col_bbox[b, :3] = blk.col_cluster.bbox_min
        col_bbox[b, 3:] = blk.col_cluster.bbox_max
        admissible[b] = blk.admissible
        if isinstance(st, np.ndarray):
            kind[b] = 0
            dense_parts.append(st.ravel())
        else:
            kind[b] = 1
            rank[b] = st.rank
            u_parts.append(st.u.ravel())
            v_parts.append(st.v.ravel())
    payload = {
        "format_version": np.asarray([FORMAT_VERSION], dtype=np.int64),
        "n": np.asarray([h.n], dtype=np.int64),
        "eta": np.asarray([h.partition.eta]),
        "perm": h.perm.astype(np.int64),
        "inverse_perm": h.inverse_perm.astype(np.int64),
        "row_range": row_range,
        "col_range": col_range,
        "row_bbox": row_bbox,
        "col_bbox": col_bbox,
        "admissible": admissible,
        "kind": kind,
        "rank": rank,
        "dense_data": np.concatenate(dense_parts) if dense_parts else np.zeros(0),
        "u_data": np.concatenate(u_parts) if u_parts else np.zeros(0),
        "v_data": np.concatenate(v_parts) if v_parts else np.zeros(0),
    }
    if report is not None:
        rep = asdict(report)
        rep["ranks"] = [int(r) for r in report.ranks]
        rep["method"] = report.method.value
        payload["report_json"] = np.asarray(json.dumps(rep))
    np.savez_compressed(path, **payload)


def _node(rng: np.ndarray, bbox: np.ndarray) -> ClusterNode:
    return ClusterNode(
        start=int(rng[0]),
        end=int(rng[1]),
        bbox_min=bbox[:3].copy(),
        bbox_max=bbox[3:].copy(),
    )


def load_hmatrix(path) -> tuple[HMatrix, BuildReport | None]:
    """Read an archive written by :func:`save_hmatrix`."""
    with np.load(path, allow_pickle=False) as z:
        version = int(z["format_version"][0])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format version {version}")
        n = int(z["n"][0])
        eta = float(z["eta"][0])
        perm = z["perm"].astype(np.intp)
        inverse_perm = z["inverse_perm"].astype(np.intp)
        row_range = z["row_range"]
        col_range = z["col_range"]
        row_bbox = z["row_bbox"]
        col_bbox = z["col_bbox"]
        admissible = z["admissible"]
        kind = z["kind"]
        rank = z["rank"]
        dense_data = z["dense_data"]
        u_data = z["u_data"]
        v_data = z["v_data"]
        report_json = str(z["report_json"]) if "report_json" in z.files else None

    blocks: list[Block] = []
    storage: list = []
    d_off = u_off = v_off = 0
    for b in range(row_range.shape[0]):
        row = _node(row_range[b], row_bbox[b])
        colc = _node(col_range[b], col_bbox[b])
        blocks.append(Block(row, colc, bool(admissible[b])))
        m, w = row.size, colc.size
        if kind[b] == 0:
            storage.append(dense_data[d_off : d_off + m * w].reshape(m, w).copy())
            d_off += m * w
        else:
            r = int(rank[b])
            u = u_data[u_off : u_off + m * r].reshape(m, r).copy()
            v = v_data[v_off : v_off + w * r].reshape(w, r).copy()
            u_off += m * r
            v_off += w * r
            storage.append(LowRankFactors(u=u, v=v))
    partition = BlockPartition(blocks=blocks, n=n, eta=eta)
    h = HMatrix(partition, storage, perm, inverse_perm)
    report = None
    if report_json is not None:
        rep = json.loads(report_json)
        rep["ranks"] = np.asarray(rep["ranks"], dtype=np.intp)
        rep["method"] = Method(rep["method"])
        report = BuildReport(**rep)
    return h, report
