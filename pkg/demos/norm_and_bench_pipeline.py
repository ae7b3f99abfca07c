"""From norm estimation to a benchmark CSV.

MREM and MREMmax need a matrix norm before they can split the global
budget into per-block ones.  Forming all N^2 entries just to get a norm
would defeat the point of compression, so the norm is estimated from
randomly sampled columns, with a jackknife standard deviation deciding
when to stop and a two-deviation subtraction keeping the final bound
honest.  The benchmark harness then packages whole sweeps -- geometry,
kernel, size, tolerance, method -- into CSV rows ready for plotting.
"""

import numpy as np

from hmat import (
    Geometry,
    Kernel,
    KernelMatrix,
    Method,
    estimate_fro_stochastic,
    exact_fro_norm,
    generate_points,
)
from hmat.bench import ExperimentSpec, report_if, run_rows, write_csv

n = 1024
cloud = generate_points(Geometry.CUBE, n, seed=0)
km = KernelMatrix(cloud, Kernel.inverse_power(1))

print(f"== estimating |B|_F for {n} cube points, kernel {km.kernel.label}")
est = estimate_fro_stochastic(km, seed=5)
exact = exact_fro_norm(km)
print(f"   sampled {est.n_samples} of {n} columns")
print(f"   sqrt(mu) = {np.sqrt(est.mu):.6e}   exact = {exact:.6e}")
print(f"   jackknife sd / mu = {est.jsd / est.mu:.3e}   converged = {est.converged}")
print(f"   safe (two-sd) norm = {est.safe_fro_norm:.6e}  <= exact: "
      f"{est.safe_fro_norm <= exact}")

print("\n== a small benchmark sweep, straight to CSV")
spec = ExperimentSpec(
    geometries=(Geometry.CUBE,),
    kernels=(Kernel.inverse_power(1),),
    sizes=(256, 512, 1024),
    tolerances=(1e-4,),
    methods=(Method.BREM, Method.MREM),
    seed=0,
    norm_mode="exact",
)
rows, exit_code = run_rows(spec)
write_csv(rows, "demo_results.csv")
print(f"   {len(rows)} rows written to demo_results.csv (exit code {exit_code})")
print(f"   columns: geometry, kernel, N, epsilon, method, nnz, compression, ...")

print("\n== improvement factors recovered from the CSV rows")
for point in report_if(rows):
    print(f"   {point['geometry']}/{point['kernel']} N={point['N']:5d}: "
          f"IF = {point['improvement_factor']:.3f}")
print("\n   the same sweep runs from the shell:")
print("     hmat-bench run --geometry cube --kernel invpow:1 "
      "--n 2^8..2^10 --eps 1e-4 --methods BREM,MREM --norm exact --out demo_results.csv")
print("   and the companion package draws the figure panels:")
print("     hmat-plots render --csv demo_results.csv --out figures/")
