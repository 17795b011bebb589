"""Solve one random graph with costs spread over six orders of magnitude.

For a few accuracy targets we compare the solver's cost with the exact
optimum and show the two certificates the solver reports.
"""

import numpy as np

from tship import SolveConfig, exact_opt, solve
from tship.approximator import build_approximator
from tship.generators import make_instance

inst = make_instance("random", 150, seed=3)
print(f"n = {inst.n}, m = {inst.m}, costs in [{inst.cost.min():.3g}, {inst.cost.max():.3g}]")

apx = build_approximator(inst)
opt = exact_opt(inst, inst.demands).opt
print(f"exact OPT = {opt:.6g}\n")

print(f"{'eps':>6} {'cost/OPT':>10} {'cost/LB':>10} {'rounds':>7} {'iters':>7} {'seconds':>8}")
for eps in (0.5, 0.25, 0.1, 0.05):
    rep = solve(inst, SolveConfig(eps=eps), apx)
    print(f"{eps:>6} {rep.cost / opt:>10.5f} {rep.gap_ratio:>10.5f} {rep.rounds:>7} "
          f"{rep.iterations:>7} {rep.wall_time:>8.2f}")

# cost / LB is what the solver can prove without knowing OPT
assert np.isfinite(rep.gap_ratio)
