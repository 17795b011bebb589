"""Walk through the pipeline on the four-vertex path 1-2-3-4.

One unit of supply sits at vertex 1 and one unit of demand at vertex 4.
We print the layer table, how the supervertex holding vertex 1 spreads
its mass in every layer, the approximate cost ||P b||_1, and a solved flow.
"""

import numpy as np

from tship import Instance, SolveConfig, build_approximator, exact_opt, solve

inst = Instance(4, [0, 1, 2], [1, 2, 3], [1.0, 1.0, 1.0], [1.0, 0.0, 0.0, -1.0])
apx = build_approximator(inst)

print("layers (index, reach, vertices, edges):")
for row in apx.layers.table():
    print("  ", row)

fam = apx.layers.family
print("\nwhere the supervertex holding vertex 1 spreads its mass:")
for g in reversed(fam.ancestors(int(fam.leaf_of[0]))):
    col = apx.D[:, g].toarray().ravel()
    spread = ", ".join(f"{fam.members(w) + 1}: {col[w]:.3f}" for w in np.flatnonzero(col))
    print(f"   layer {fam.layer[g]}: {spread}")

opt = exact_opt(inst, inst.demands).opt
print(f"\nOPT = {opt}, ||P b||_1 = {apx.norm(inst.demands):.3f}, alpha = {apx.alpha:.1f}")

rep = solve(inst, SolveConfig(eps=0.5), apx)
print(f"solved flow {rep.flow.value}, cost {rep.cost:.6f}, certified lower bound {rep.lower_bound:.6f}")
