"""Benchmark harness: sweep builds over geometries, kernels, sizes, and
tolerances, and write one CSV row per build.

Within one (geometry, N) the cloud, cluster tree, and block partition are
built once and shared by every kernel, tolerance, and method, so the
methods are compared on identical structure.  Rows are emitted in a fixed
sweep order and all numeric formatting is canonical, which makes the file
reproducible byte for byte from the same spec and seed apart from the
timing columns.

Also the implementation of the ``hmat-bench`` command:

    hmat-bench run --geometry surf,edge --kernel invpow:2 --n 2^9..2^12 \
        --eps 1e-5 --methods BREM,MREM --seed 0 --out results.csv
    hmat-bench report-if --csv results.csv

``report-if`` pairs BREM and MREM rows and prints the improvement factor
(BREM storage over MREM storage) per sweep point.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import BuildConfig, achieved_error, assemble
from .clustering import build_block_partition, build_cluster_tree
from .geometry import Geometry, Kernel, KernelMatrix, generate_points
from .normest import estimate_fro_stochastic, exact_fro_norm, induced_one_norm
from .serialization import save_hmatrix
from .tolerances import Method, TolerancePolicy

__all__ = ["CSV_COLUMNS", "ExperimentSpec", "run", "run_rows", "report_if", "main"]

CSV_COLUMNS = [
    "geometry",
    "kernel",
    "N",
    "epsilon",
    "method",
    "nnz",
    "compression",
    "achieved_rel_error",
    "error_mode",
    "norm_mu",
    "norm_jsd",
    "norm_cols",
    "rank_min",
    "rank_med",
    "rank_max",
    "t_tree_ms",
    "t_norm_ms",
    "t_assemble_ms",
    "t_error_ms",
    "seed",
]

TIMING_COLUMNS = ("t_tree_ms", "t_norm_ms", "t_assemble_ms", "t_error_ms")

DEFAULT_KERNELS = "invpow:1,invpow:2,invpow:3,log"


@dataclass
class ExperimentSpec:
    """One benchmark sweep: the cross product of the lists below."""

    geometries: list[Geometry] = field(
        default_factory=lambda: [Geometry.CUBE, Geometry.SURF, Geometry.EDGE]
    )
    kernels: list[Kernel] = field(
        default_factory=lambda: [Kernel.parse(k) for k in DEFAULT_KERNELS.split(",")]
    )
    sizes: list[int] = field(default_factory=lambda: [2**a for a in range(9, 14)])
    tolerances: list[float] = field(default_factory=lambda: [1e-5])
    methods: list[Method] = field(default_factory=lambda: [Method.BREM, Method.MREM])
    seed: int = 0
    eta: float = 2.0
    leaf_size: int = 32
    exact_error_max_n: int = 2**13
    norm_mode: str = "stochastic"  # or "exact"
    rel_jsd_tol: float = 1.0 / 50.0
    alpha: float = 0.5
    aca_safety: float = 0.1
    sample_cols: int = 256
    save_dir: str | None = None

    def __post_init__(self) -> None:
        for name in ("geometries", "kernels", "sizes", "tolerances", "methods"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if any(n < 1 for n in self.sizes):
            raise ValueError("sizes must be positive")
        if any(not eps > 0.0 for eps in self.tolerances):
            raise ValueError("tolerances must be positive")
        if self.norm_mode not in ("stochastic", "exact"):
            raise ValueError("norm_mode must be 'stochastic' or 'exact'")


def _derived_seed(*parts) -> int:
    """Stable sub-seed from string/int components (for samplers inside a sweep)."""
    return zlib.crc32(",".join(str(p) for p in parts).encode())


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_rows(spec: ExperimentSpec) -> tuple[list[dict], int]:
    """Execute the sweep; returns (rows, exit_code).

    A row that cannot be completed (unconverged norm estimate, numerical
    failure in assembly) is still emitted, with ``error_mode`` set to
    ``error:<reason>`` and the result fields blank, and the exit code
    becomes 1.
    """
    rows: list[dict] = []
    exit_code = 0
    for geometry in spec.geometries:
        for n in spec.sizes:
            cloud = generate_points(geometry, n, spec.seed)
            t0 = time.perf_counter()
            tree = build_cluster_tree(cloud, spec.leaf_size)
            partition = build_block_partition(tree, spec.eta)
            t_tree_ms = (time.perf_counter() - t0) * 1e3
            for kernel in spec.kernels:
                km = KernelMatrix(cloud, kernel)
                norm_cache: dict[str, tuple] = {}
                for eps in spec.tolerances:
                    for method in spec.methods:
                        row = _run_point(
                            spec,
                            geometry,
                            kernel,
                            km,
                            cloud,
                            tree,
                            partition,
                            n,
                            eps,
                            method,
                            t_tree_ms,
                            norm_cache,
                        )
                        if row["error_mode"].startswith("error:"):
                            exit_code = 1
                        rows.append(row)
    return rows, exit_code


def _norm_for(spec, method, km, n, geometry, kernel, norm_cache):
    """Matrix norm for a matrix-wise method, cached per (kernel, mode).

    Returns (policy_norm, mu, jsd, cols, converged, t_ms); ``policy_norm``
    is what budgets scale by (the safety-adjusted Frobenius norm for MREM,
    the induced 1-norm for MREMmax).
    """
    key = f"{method.value}:{spec.norm_mode}"
    if key in norm_cache:
        return norm_cache[key]
    t0 = time.perf_counter()
    if method is Method.MREMMAX:
        one = induced_one_norm(km)
        out = (one, one, 0.0, n, True)
    elif spec.norm_mode == "exact":
        fro = exact_fro_norm(km)
        out = (fro, fro * fro, 0.0, n, True)
    else:
        est = estimate_fro_stochastic(
            km,
            rel_jsd_tol=spec.rel_jsd_tol,
            seed=_derived_seed(spec.seed, geometry.value, kernel.label, n, "norm"),
        )
        out = (est.safe_fro_norm, est.mu, est.jsd, est.n_samples, est.converged)
    t_ms = (time.perf_counter() - t0) * 1e3
    norm_cache[key] = (*out, t_ms)
    return norm_cache[key]


def _run_point(
    spec, geometry, kernel, km, cloud, tree, partition, n, eps, method, t_tree_ms, norm_cache
):
    row = {
        "geometry": geometry.value,
        "kernel": kernel.label,
        "N": n,
        "epsilon": eps,
        "method": method.value,
        "nnz": None,
        "compression": None,
        "achieved_rel_error": None,
        "error_mode": "",
        "norm_mu": None,
        "norm_jsd": None,
        "norm_cols": None,
        "rank_min": None,
        "rank_med": None,
        "rank_max": None,
        "t_tree_ms": t_tree_ms,
        "t_norm_ms": 0.0,
        "t_assemble_ms": None,
        "t_error_ms": None,
        "seed": spec.seed,
    }
    if method is Method.BREM:
        policy = TolerancePolicy(method=method, epsilon=eps, n=n)
    else:
        policy_norm, mu, jsd, cols, converged, t_norm_ms = _norm_for(
            spec, method, km, n, geometry, kernel, norm_cache
        )
        row.update(norm_mu=mu, norm_jsd=jsd, norm_cols=cols, t_norm_ms=t_norm_ms)
        if not converged:
            row["error_mode"] = "error:unconverged-norm"
            return row
        policy = TolerancePolicy(method=method, epsilon=eps, n=n, matrix_norm=policy_norm)
    config = BuildConfig(
        policy=policy,
        alpha=spec.alpha,
        aca_safety=spec.aca_safety,
        eta=spec.eta,
        leaf_size=spec.leaf_size,
        seed=spec.seed,
    )
    try:
        h, report = assemble(cloud, kernel, config, tree=tree, partition=partition)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        row["error_mode"] = f"error:assembly-{type(exc).__name__}"
        return row
    t0 = time.perf_counter()
    err = achieved_error(
        h,
        km,
        mode="auto",
        exact_max_n=spec.exact_error_max_n,
        sample_cols=spec.sample_cols,
        seed=_derived_seed(spec.seed, geometry.value, kernel.label, n, eps, method.value, "err"),
    )
    t_error_ms = (time.perf_counter() - t0) * 1e3
    achieved = err.rel_max if method is Method.MREMMAX else err.rel_fro
    row.update(
        nnz=report.nnz,
        compression=report.compression,
        achieved_rel_error=achieved,
        error_mode=err.mode,
        rank_min=report.rank_min,
        rank_med=report.rank_med,
        rank_max=report.rank_max,
        t_assemble_ms=report.t_assemble_s * 1e3,
        t_error_ms=t_error_ms,
    )
    if spec.save_dir is not None:
        report.achieved_rel_error = achieved
        report.error_mode = err.mode
        report.t_error_s = t_error_ms / 1e3
        out = Path(spec.save_dir)
        out.mkdir(parents=True, exist_ok=True)
        name = f"{geometry.value}_{kernel.label.replace(':', '')}_{n}_{method.value}_{eps:g}.npz"
        save_hmatrix(h, out / name, report)
    return row


def write_csv(rows: list[dict], out_path) -> None:
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def run(spec: ExperimentSpec, out_path) -> int:
    """Run the sweep and write the CSV; returns the process exit code."""
    rows, exit_code = run_rows(spec)
    write_csv(rows, out_path)
    return exit_code


def report_if(rows: list[dict]) -> list[dict]:
    """Pair BREM and MREM rows per (geometry, kernel, N, epsilon, seed) and
    compute the improvement factor nnz_BREM / nnz_MREM.

    Points missing one side of the pair (or with errored rows) are skipped
    with a warning on stderr.
    """
    by_point: dict[tuple, dict[str, dict]] = {}
    for row in rows:
        key = (row["geometry"], row["kernel"], row["N"], row["epsilon"], row["seed"])
        by_point.setdefault(key, {})[row["method"]] = row
    out = []
    for key in sorted(by_point, key=lambda k: tuple(str(p) for p in k)):
        pair = by_point[key]
        brem, mrem = pair.get(Method.BREM.value), pair.get(Method.MREM.value)
        usable = (
            brem is not None
            and mrem is not None
            and not str(brem.get("error_mode", "")).startswith("error:")
            and not str(mrem.get("error_mode", "")).startswith("error:")
        )
        if not usable:
            print(f"report-if: skipping incomplete point {key}", file=sys.stderr)
            continue
        out.append(
            {
                "geometry": key[0],
                "kernel": key[1],
                "N": int(key[2]),
                "epsilon": float(key[3]),
                "improvement_factor": float(brem["nnz"]) / float(mrem["nnz"]),
            }
        )
    return out


def read_csv(path) -> list[dict]:
    """Read a benchmark CSV back into typed row dicts."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}")
        rows = []
        for row in reader:
            for col in ("N", "nnz", "norm_cols", "rank_min", "rank_max", "seed"):
                if row[col]:
                    row[col] = int(row[col])
            for col in (
                "epsilon",
                "compression",
                "achieved_rel_error",
                "norm_mu",
                "norm_jsd",
                "rank_med",
                "t_tree_ms",
                "t_norm_ms",
                "t_assemble_ms",
                "t_error_ms",
            ):
                if row[col]:
                    row[col] = float(row[col])
            rows.append(row)
    return rows


def parse_sizes(text: str) -> list[int]:
    """Sizes as a comma list (``512,1024``) or a power range (``2^9..2^13``)."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        if not (lo.startswith("2^") and hi.startswith("2^")):
            raise ValueError(f"bad size range: {text!r} (expected 2^a..2^b)")
        a, b = int(lo[2:]), int(hi[2:])
        if b < a:
            raise ValueError("size range is empty")
        return [2**k for k in range(a, b + 1)]
    out = []
    for part in text.split(","):
        part = part.strip()
        out.append(2 ** int(part[2:]) if part.startswith("2^") else int(part))
    return out


def _spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    return ExperimentSpec(
        geometries=[Geometry(g.strip()) for g in args.geometry.split(",")],
        kernels=[Kernel.parse(k) for k in args.kernel.split(",")],
        sizes=parse_sizes(args.n),
        tolerances=[float(e) for e in args.eps.split(",")],
        methods=[Method.parse(m) for m in args.methods.split(",")],
        seed=args.seed,
        eta=args.eta,
        leaf_size=args.leaf_size,
        exact_error_max_n=args.exact_error_max_n,
        norm_mode=args.norm,
        alpha=args.alpha,
        aca_safety=args.aca_safety,
        sample_cols=args.sample_cols,
        save_dir=args.save_hmatrix,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmat-bench",
        description="H-matrix tolerance-method benchmarks (BREM / MREM / MREMmax).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep and write a CSV of results")
    p_run.add_argument("--geometry", default="cube,surf,edge", help="comma list of cube|surf|edge")
    p_run.add_argument("--kernel", default=DEFAULT_KERNELS, help="comma list of invpow:<p>|log")
    p_run.add_argument("--n", default="2^9..2^13", help="sizes: comma list or 2^a..2^b")
    p_run.add_argument("--eps", default="1e-5", help="comma list of tolerances")
    p_run.add_argument("--methods", default="BREM,MREM", help="comma list of BREM|MREM|MREMmax")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--eta", type=float, default=2.0, help="admissibility parameter")
    p_run.add_argument("--leaf-size", type=int, default=32)
    p_run.add_argument(
        "--exact-error-max-n",
        type=int,
        default=2**13,
        help="largest N measured by an exact error sweep (sampled above)",
    )
    p_run.add_argument("--norm", choices=("stochastic", "exact"), default="stochastic")
    p_run.add_argument("--alpha", type=float, default=0.5)
    p_run.add_argument("--aca-safety", type=float, default=0.1)
    p_run.add_argument("--sample-cols", type=int, default=256)
    p_run.add_argument("--save-hmatrix", metavar="DIR", default=None)
    p_run.add_argument("--out", required=True, help="output CSV path")

    p_if = sub.add_parser("report-if", help="improvement factors from a results CSV")
    p_if.add_argument("--csv", required=True, help="CSV written by 'run'")
    p_if.add_argument("--out", default=None, help="output CSV (stdout when omitted)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        try:
            spec = _spec_from_args(args)
        except ValueError as exc:
            print(f"hmat-bench: {exc}", file=sys.stderr)
            return 2
        return run(spec, args.out)
    # report-if
    try:
        rows = read_csv(args.csv)
    except (OSError, ValueError) as exc:
        print(f"hmat-bench: {exc}", file=sys.stderr)
        return 2
    table = report_if(rows)
    lines = ["geometry,kernel,N,epsilon,improvement_factor"]
    lines += [
        f"{r['geometry']},{r['kernel']},{r['N']},{_fmt(r['epsilon'])},{_fmt(r['improvement_factor'])}"
        for r in table
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
