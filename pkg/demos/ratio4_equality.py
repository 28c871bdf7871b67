"""Equality case: the ratio-4 complex extensor in C^5.

Along the extensor delta(2,2) = 16 mu^2 and H^2 = 64 mu^2 / 25, so
delta(2,2) = 25/4 H^2 exactly.
"""
from lagdelta.curvature import second_fundamental_form
from lagdelta.delta import canonical_frame_fit, point_delta
from lagdelta.families import ratio4_extensor
from lagdelta.families.extensor import extensor_mu
from lagdelta.immersion import sample_points

chart = ratio4_extensor(0.4)
print(f"{'mu':>10} {'delta22':>12} {'16 mu^2':>12} {'H^2':>10} {'residual':>10} {'a':>9} {'b':>9}")
for u in sample_points(chart, 8, seed=1):
    pg = second_fundamental_form(chart, u)
    residual, res = point_delta(pg)
    fit = canonical_frame_fit(pg)
    mu = extensor_mu(chart, u)
    print(f"{mu:10.6f} {res.value:12.8f} {16 * mu * mu:12.8f} {pg.mean_sq:10.6f} "
          f"{residual:10.1e} {fit.a:9.1e} {fit.b:9.1e}")
