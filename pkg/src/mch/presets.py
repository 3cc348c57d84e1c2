"""Named scenario configurations, one per checked property."""
from __future__ import annotations

import math

PI = math.pi

PRESETS: dict[str, tuple[str, dict]] = {
    "conservation": (
        "Gaussian 0.5 exp(-x^2); drift of I0, I1, I2 over t in [0, 1]",
        {"initial.kind": "gaussian", "initial.amplitude": 0.5, "initial.width": 1.0,
         "output.snapshots": [0.0, 1.0]},
    ),
    "peakon_speed": (
        "peakon c = 1 mollified over 4 dx; crest speed over t in [0, 1]",
        {"grid.L": 8 * PI, "grid.n": 4096, "initial.kind": "peakon", "initial.c": 1.0,
         "initial.epsilon_dx": 4.0, "control.exponential_filter": True,
         "output.snapshots": [0.0, 0.25, 0.5, 0.75, 1.0]},
    ),
    "flow_invariant": (
        "Gaussian 0.5 exp(-x^2); momentum times q_x along particle paths",
        {"grid.L": 8 * PI, "grid.n": 8192, "initial.kind": "gaussian",
         "initial.amplitude": 0.5, "initial.width": 1.0, "diagnostics.flow": True},
    ),
    "sign_preservation": (
        "positive momentum bump (A = 1, width 1); minimum of m over the run",
        {"grid.L": 8 * PI, "grid.n": 4096, "initial.kind": "bump_momentum",
         "initial.amplitude": 1.0, "initial.width": 1.0},
    ),
    "thm43_bound": (
        "Gaussian 0.5 exp(-x^2) to 0.9 of the guaranteed lifespan; sup m against the growth curve",
        {"initial.kind": "gaussian", "initial.amplitude": 0.5, "initial.width": 1.0,
         "control.t_end_fraction": 0.9},
    ),
    "thm51i": (
        "narrow momentum bump (A = 10, width 0.05); breaking before the steep-slope bound",
        {"grid.L": 8 * PI, "grid.n": 8192, "initial.kind": "bump_momentum",
         "initial.amplitude": 10.0, "initial.width": 0.05, "control.dt_max": 0.002,
         "control.tail_stop": 1e-2, "diagnostics.blowup_case": "i"},
    ),
    "thm51ii": (
        "narrower momentum bump (A = 10, width 0.02); breaking before the logarithmic bound",
        {"grid.L": 8 * PI, "grid.n": 32768, "initial.kind": "bump_momentum",
         "initial.amplitude": 10.0, "initial.width": 0.02, "control.dt_max": 0.002,
         "control.tail_stop": 1e-2, "diagnostics.blowup_case": "ii"},
    ),
    "thm51iii": (
        "momentum bump (A = 10, width 0.05); the u0'(x0) <= -I0 condition has no witness",
        {"grid.L": 8 * PI, "grid.n": 8192, "initial.kind": "bump_momentum",
         "initial.amplitude": 10.0, "initial.width": 0.05, "control.t_end": 0.05,
         "control.dt_max": 0.002, "control.tail_stop": 1e-2,
         "diagnostics.blowup_case": "iii"},
    ),
    "persistence": (
        "momentum bump (A = 1, width 1) with exp(-x) tail; weighted sup norms, theta = 0.5",
        {"grid.n": 4096, "initial.kind": "bump_momentum", "initial.amplitude": 1.0,
         "initial.width": 1.0, "diagnostics.persistence.theta": 0.5,
         "diagnostics.persistence.N": 10.0,
         "output.snapshots": [0.0, 0.25, 0.5, 0.75, 1.0]},
    ),
    "besov_stability": (
        "Gaussian 0.5 exp(-x^2) and a 1e-6 perturbation; B^{3/2}_{2,1} distance growth",
        {"grid.L": 8 * PI, "grid.n": 2048, "initial.kind": "gaussian",
         "initial.amplitude": 0.5, "initial.width": 1.0, "control.t_end": 0.5,
         "diagnostics.besov.s": 1.5, "diagnostics.stability.perturbation": 1e-6,
         "output.snapshots": [0.0, 0.25, 0.5]},
    ),
    "zero_curvature": (
        "Gaussian 0.5 exp(-x^2); Lax-pair compatibility residual, lambda = 1",
        {"grid.L": 8 * PI, "grid.n": 16384, "initial.kind": "gaussian",
         "initial.amplitude": 0.5, "initial.width": 1.0,
         "diagnostics.zero_curvature.lambda": 1.0,
         "output.snapshots": [0.0, 0.25, 0.5, 0.75, 1.0]},
    ),
    "traveling_wave": (
        "Gaussian profile as a traveling-wave candidate with c = 1",
        {"initial.kind": "gaussian", "initial.amplitude": 1.0, "initial.width": 1.0,
         "control.t_end": 0.0, "diagnostics.traveling_wave.c": 1.0},
    ),
}


def preset_values(name: str) -> dict:
    from .config import ConfigError

    try:
        return dict(PRESETS[name][1], preset=name)
    except KeyError:
        raise ConfigError(f"preset: unknown preset {name!r}") from None


def describe() -> list[tuple[str, str]]:
    return [(k, v[0]) for k, v in PRESETS.items()]
