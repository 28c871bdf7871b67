"""Built-in families by name, with parameter ranges."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from ..immersion import ChartImmersion, random_gradient_graph
from .extensor import build_family_C5, ratio4_extensor
from .lifts import build_family_CH5, build_family_CP5, example_ch5_chart, ratio4_lift


@dataclass(frozen=True)
class Param:
    name: str
    default: object
    lower: float | None = None
    upper: float | None = None
    kind: type = float
    choices: tuple = ()
    help: str = ""

    def coerce(self, value):
        v = self.kind(value)
        if self.choices and v not in self.choices:
            raise ValueError(f"{self.name} must be one of {self.choices}")
        if self.lower is not None and not v > self.lower:
            raise ValueError(f"{self.name} must be > {self.lower}")
        if self.upper is not None and not v < self.upper:
            raise ValueError(f"{self.name} must be < {self.upper}")
        return v

    def describe(self) -> str:
        if self.choices:
            rng = "{" + ", ".join(map(str, self.choices)) + "}"
        else:
            lo = "-inf" if self.lower is None else f"{self.lower:g}"
            hi = "inf" if self.upper is None else f"{self.upper:g}"
            rng = f"({lo}, {hi})"
        return f"{self.name}={self.default} in {rng}"


@dataclass(frozen=True)
class FamilyEntry:
    name: str
    builder: Callable[..., ChartImmersion]
    params: tuple = ()
    ideal: bool = True
    c: int = 0
    summary: str = ""
    extra: dict = field(default_factory=dict)


def _theta_rule():
    return Param("theta_rule", "proof", kind=str, choices=("proof", "statement"),
                 help="rate of theta(mu): 1/(2 sqrt(R)) or sqrt(R)/2")


CH5_III_CMAX = math.sqrt(2 / (3 * math.sqrt(3)))

FAMILIES: dict[str, FamilyEntry] = {e.name: e for e in [
    FamilyEntry("ratio4-extensor", lambda mu0: ratio4_extensor(mu0),
                (Param("mu0", 0.4, 0.0, None),), True, 0,
                "complex extensor of a planar curve with curvature 4 (arg gamma)' in C^5"),
    FamilyEntry("c5", lambda c: build_family_C5(c), (Param("c", 1.0, 0.0, None),), True, 0,
                "C^5 family over a horizontal lift in S^9 (totally real S^4 by default)"),
    FamilyEntry("cp5", lambda c: build_family_CP5(c), (Param("c", 1.5, 0.0, None),), True, 1,
                "CP^5 family lifted to S^11 (totally real S^4 plugin by default)"),
    FamilyEntry("ch5-iii", lambda c, theta_rule: build_family_CH5("iii", c, theta_rule=theta_rule),
                (Param("c", 0.5, 0.0, CH5_III_CMAX), _theta_rule()), True, -1,
                "CH^5 family over a lift into H_1^9 (real hyperboloid plugin by default)"),
    FamilyEntry("ch5-iv", lambda c, theta_rule: build_family_CH5("iv", c, theta_rule=theta_rule),
                (Param("c", 1.0, 0.0, None), _theta_rule()), True, -1,
                "CH^5 family over a lift into S^9 (totally real S^4 plugin by default)"),
    FamilyEntry("ch5-v", lambda: build_family_CH5("v"), (), True, -1,
                "CH^5 family over a minimal delta(2)-ideal psi in C^4 (surface x plane plugin)"),
    FamilyEntry("ch5-vi", lambda: build_family_CH5("vi"), (), True, -1,
                "CH^5 family over two harmonic gradient surfaces x1^2 - x2^2 and x1 x2"),
    FamilyEntry("ch5-vi-cubic", lambda: _ch5_vi_cubic(), (), True, -1,
                "CH^5 family over the harmonic surfaces Re z^3 and Im z^3 / 3 (a, b nonzero)"),
    FamilyEntry("ch5-example", lambda: example_ch5_chart(), (), True, -1,
                "closed-form ratio-4 lift into H_1^11 with mu = sech 2t"),
    FamilyEntry("ratio4-cp5-lift", lambda mu0, nu0: ratio4_lift("CP5", mu0, nu0),
                (Param("mu0", 0.5, 0.0, None), Param("nu0", 0.0)), True, 1,
                "ratio-4 H-umbilical lift (z1, z2 y) over a Legendre curve in S^3"),
    FamilyEntry("ratio4-ch5-lift", lambda mu0, nu0: ratio4_lift("CH5", mu0, nu0),
                (Param("mu0", 0.5, 0.0, None), Param("nu0", 0.3)), True, -1,
                "ratio-4 H-umbilical lift over a Legendre curve in H^3_1 (k != 0)"),
    FamilyEntry("random-graph", lambda seed, degree: random_gradient_graph(seed, 5, degree),
                (Param("seed", 0, kind=int), Param("degree", 3, 1, None, kind=int)), False, 0,
                "random gradient graph u + i grad f(u) in C^5 (inequality only)"),
]}


def _ch5_vi_cubic():
    from .plugins import HARMONIC_CUBICS
    return build_family_CH5("vi", f1=HARMONIC_CUBICS[0], f2=HARMONIC_CUBICS[1])


def family_entry(name: str) -> FamilyEntry:
    try:
        return FAMILIES[name]
    except KeyError:
        raise KeyError(f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}") from None


def resolve_params(name: str, params: dict | None = None) -> dict:
    entry = family_entry(name)
    params = dict(params or {})
    known = {p.name for p in entry.params}
    extra = set(params) - known
    if extra:
        raise ValueError(f"family {name!r} has no parameter(s) {sorted(extra)}")
    return {p.name: p.coerce(params.get(p.name, p.default)) for p in entry.params}


def build_family(name: str, **params) -> ChartImmersion:
    entry = family_entry(name)
    values = resolve_params(name, params)
    chart = entry.builder(**values)
    chart.params.setdefault("family", name)
    chart.params["registry_name"] = name
    chart.params["registry_params"] = values
    return chart
