"""Constructions of the improved delta(2,2)-ideal families and their ODEs."""

from .extensor import (PlanarCurve, build_family_C5, circle_curve, complex_extensor,
                       ratio4_extensor, ratio4_generating_curve, ray_curve)
from .lifts import build_family_CH5, build_family_CP5, example_ch5_chart, ratio4_lift
from .ode import (LegendreCurve, OdeState, Trajectory, first_integral_residual,
                  integrate_legendre, integrate_mu_nu, ratio_ode_residual)
from .plugins import (harmonic_gradient_surface, integrate_w, real_hyperboloid_lift,
                      real_sphere_lift, twisted_sphere, verify_plugin)
from .registry import FAMILIES, build_family

__all__ = [
    "FAMILIES", "LegendreCurve", "OdeState", "PlanarCurve", "Trajectory", "build_family",
    "build_family_C5", "build_family_CH5", "build_family_CP5", "circle_curve", "complex_extensor",
    "example_ch5_chart", "first_integral_residual", "harmonic_gradient_surface",
    "integrate_legendre", "integrate_mu_nu", "integrate_w", "ratio4_extensor",
    "ratio4_generating_curve", "ratio4_lift", "ratio_ode_residual", "ray_curve",
    "real_hyperboloid_lift", "real_sphere_lift", "twisted_sphere", "verify_plugin",
]
