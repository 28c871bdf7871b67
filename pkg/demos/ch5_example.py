"""Closed-form ratio-4 lift into H_1^11(-1) with mu = sech 2t."""
import numpy as np

from lagdelta.ambient import horizontality_residual, sphere_constraint_residual
from lagdelta.curvature import second_fundamental_form
from lagdelta.delta import canonical_frame_fit, point_delta
from lagdelta.families import example_ch5_chart
from lagdelta.immersion import evaluate_jet

chart = example_ch5_chart()
for t in np.linspace(-0.9, 0.9, 7):
    u = np.array([t, 0.2, -0.1, 0.3, 0.0])
    jt = evaluate_jet(chart, u, 1)
    horiz = max(horizontality_residual(jt.value, jt.d1[k], chart.space) for k in range(5))
    pg = second_fundamental_form(chart, u)
    residual, _ = point_delta(pg)
    fit = canonical_frame_fit(pg)
    print(f"t={t:+.2f}  <L,L>+1={sphere_constraint_residual(jt.value, chart.space):.1e}"
          f"  horiz={horiz:.1e}  mu={fit.mu:.8f}  sech2t={1 / np.cosh(2 * t):.8f}"
          f"  eq.res={residual:.1e}")
