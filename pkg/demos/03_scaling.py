"""Time the approximator on growing paths.

Linear growth would double both the build time and the cost of one
product with P per doubling of n. Expect roughly 2.5x to 3x instead, since
the bundle sizes and the number of layers grow polylogarithmically.
"""

import time

import numpy as np

from tship.approximator import build_approximator
from tship.generators import path_graph, random_demands

rng = np.random.default_rng(0)
prev = None
print(f"{'n':>6} {'build s':>9} {'apply_P ms':>11} {'nnz(R)':>9} {'growth':>16}")
for n in (500, 1000, 2000, 4000):
    g = path_graph(n)
    t = time.perf_counter()
    apx = build_approximator(g)
    build = time.perf_counter() - t
    b = random_demands(n, rng)
    runs = []
    for _ in range(7):
        t = time.perf_counter()
        apx.apply_P(b)
        runs.append(time.perf_counter() - t)
    apply = min(runs)
    growth = "" if prev is None else f"{build / prev[0]:.2f}x / {apply / prev[1]:.2f}x"
    print(f"{n:>6} {build:>9.2f} {apply * 1e3:>11.2f} {apx.R.nnz:>9} {growth:>16}")
    prev = (build, apply)
