"""Amplitude-limited blind source separation on a box x Stiefel product.

Bounded sources live in the box factor, the unmixing matrix on the Stiefel
manifold; a log-cosh penalty promotes non-Gaussian sources.  The solver is
compared against a projected gradient baseline given the same wall-clock
budget, and the recovered sources are correlated with the ground truth.
"""

import time

import numpy as np

import rlbfgsb as rb

k, r, n = 3, 3, 50
instance = rb.synth_bss(k=k, r=r, n=n, amplitude=1.0, seed=42, lam=0.1)
problem = rb.bss_problem(instance, init_seed=42)
start = problem.initial_point

print(f"instance: {k} sources of length {n}, {r} sensors, amplitude 1, lam 0.1")
print(f"box part: {problem.geometry.box.n} bounded coordinates; "
      f"manifold part: Stiefel({k}, {r})\n")

t0 = time.perf_counter()
result = rb.solve(
    problem, start,
    rb.SolverOptions(pg_tolerance=1e-6, max_iterations=1000, cost_change_factor=1e-3),
)
budget = time.perf_counter() - t0
print(f"quasi-Newton solver : f = {result.cost:.8f} after {result.iterations} "
      f"iterations ({budget * 1e3:.0f} ms), projected gradient {result.pg_norm:.1e}")

_, f_baseline, it_baseline = rb.projected_gradient(
    problem, start, time_budget_s=max(budget, 0.05), pg_tolerance=1e-6
)
print(f"projected gradient  : f = {f_baseline:.8f} after {it_baseline} "
      f"iterations in the same wall-clock budget")
print(f"solver is better by : {f_baseline - result.cost:.2e}\n")

# correlate each recovered source with its best-matching true source
recovered = result.point.euclidean.reshape(k, n)
truth = instance.sources
for i in range(k):
    corrs = [abs(np.corrcoef(recovered[i], truth[j])[0, 1]) for j in range(k)]
    j = int(np.argmax(corrs))
    print(f"recovered source {i}: best match true source {j}, |corr| = {corrs[j]:.4f}")

violation = problem.geometry.box.violation(result.point.euclidean)
at_bounds = np.sum(np.abs(np.abs(recovered) - 1.0) < 1e-12)
print(f"\namplitude bound violation: {violation} "
      f"({at_bounds} samples pinned exactly at +-1)")
