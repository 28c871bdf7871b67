"""Slack of the improved delta(2,2) bound on random gradient graphs in C^5.

Run: python3 demos/random_graph_inequality.py [seeds] [points]
"""
import sys

import numpy as np

from lagdelta.curvature import second_fundamental_form
from lagdelta.delta import TupleSpec, point_delta
from lagdelta.immersion import random_gradient_graph, sample_points

seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 3
points = int(sys.argv[2]) if len(sys.argv) > 2 else 20
spec = TupleSpec(5, (2, 2))

for seed in range(seeds):
    chart = random_gradient_graph(seed)
    gaps = []
    for u in sample_points(chart, points, seed=seed):
        residual, res = point_delta(second_fundamental_form(chart, u), spec)
        gaps.append(residual)
    gaps = np.array(gaps)
    print(f"seed {seed}: delta - rhs in [{gaps.min():.4f}, {gaps.max():.4f}]"
          f"  (all <= 0: {bool(np.all(gaps <= 1e-7))})")
