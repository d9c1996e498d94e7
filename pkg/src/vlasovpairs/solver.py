"""Single-mode integration of the quantum kinetic equation.

The production path (:func:`solve_mode`) integrates the local three-variable
system

    df/dt = q*g/2
    dg/dt = q*(1 - 2f) - 2*omega*w
    dw/dt = 2*omega*g

with q(t) = eE(t)*eps_perp/omega^2 and omega(t)^2 = eps_perp^2 + (P3 - eA)^2,
from vacuum initial conditions (0, 0, 0) at the start of the span to its end,
where the field is switched off and f is a genuine occupation number.

:func:`solve_mode_direct` integrates the equivalent non-Markovian
integro-differential form on a uniform grid with explicit history storage
(O(steps^2) cost) and serves as an independent cross-check of the ODE path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernel
from .exceptions import ConfigurationError, IntegrationError, ResourceError
from .fields import FieldConfig, field_model

TWO_PI = 2.0 * math.pi

_STATUS_MESSAGES = {
    1: "step size underflow",
    2: "step budget exceeded",
    3: "occupation left [0, 1] beyond tolerance",
}


@dataclass
class ModeState:
    """Occupation f, source accumulator g, counter-term w at time t."""

    f: float = 0.0
    g: float = 0.0
    w: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class ModeKinematics:
    """Canonical momentum of one mode; transverse momentum is 0 here."""

    P3: float
    p_perp: float = 0.0

    @property
    def eps_perp(self) -> float:
        # exact transverse energy, = m when p_perp = 0
        return math.sqrt(1.0 + self.p_perp * self.p_perp)


@dataclass(frozen=True)
class SolverSettings:
    """Adaptive embedded Runge-Kutta settings.

    max_step defaults to one tenth of the fastest carrier period of the
    field configuration when left as None.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-13
    max_step: float | None = None
    max_steps: int = 20_000_000
    method: str = "dopri5"

    def __post_init__(self):
        if not self.rel_tol > 0.0 or not self.abs_tol > 0.0:
            raise ConfigurationError("tolerances must be positive")
        if self.max_step is not None and not self.max_step > 0.0:
            raise ConfigurationError("max_step must be positive")
        if self.max_steps < 100:
            raise ConfigurationError("max_steps too small to integrate anything")
        if self.method != "dopri5":
            raise ConfigurationError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class ModeResult:
    """Full diagnostics of one mode integration."""

    f: float
    g: float
    w: float
    steps: int
    rejected: int
    min_f: float
    max_f: float


@lru_cache(maxsize=64)
def _workspace(config: FieldConfig):
    model = field_model(config)
    tab = model.table
    seg_ncells = np.diff(tab.seg_cell0, append=len(tab.coeffs)).astype(np.int64)
    ws = kernel.active.prepare(
        model.mod_params, model.pulse_params,
        tab.seg_bounds, tab.seg_h, tab.seg_cell0, seg_ncells,
        tab.coeffs,
    )
    return model, ws


def _resolved_max_step(config, settings) -> float:
    if settings.max_step is not None:
        return settings.max_step
    model = field_model(config)
    wc = model.fastest_carrier
    if wc > 0.0:
        return (TWO_PI / wc) / 10.0
    return model.t_end / 100.0


def vlasov_rhs(state: ModeState, kin: ModeKinematics, config: FieldConfig, t: float):
    """Time derivatives (df, dg, dw) of the local kinetic system."""
    model, _ = _workspace(config)
    e = model.field(t)
    pp = kin.P3 - model.potential(t)
    om2 = kin.eps_perp**2 + pp * pp
    om = math.sqrt(om2)
    q = e * kin.eps_perp / om2
    return (
        0.5 * q * state.g,
        q * (1.0 - 2.0 * state.f) - 2.0 * om * state.w,
        2.0 * om * state.g,
    )


def integrate_mode(kin: ModeKinematics, config: FieldConfig,
                   settings: SolverSettings = SolverSettings()) -> ModeResult:
    """Integrate one mode over the full span and return diagnostics."""
    model, ws = _workspace(config)
    max_step = _resolved_max_step(config, settings)
    h0 = 0.01 * max_step
    out = kernel.active.integrate_mode_rk(
        ws, kin.P3, kin.eps_perp, model.t_start, model.t_end,
        settings.rel_tol, settings.abs_tol, max_step, h0, settings.max_steps,
    )
    f, g, w, accepted, rejected, minf, maxf, status, t_last = out
    if status != 0:
        raise IntegrationError(
            _STATUS_MESSAGES.get(status, f"kernel status {status}"),
            p3=kin.P3, t=t_last, state=(f, g, w),
        )
    return ModeResult(f=f, g=g, w=w, steps=accepted, rejected=rejected,
                      min_f=minf, max_f=maxf)


def solve_mode(kin: ModeKinematics, config: FieldConfig,
               settings: SolverSettings = SolverSettings()) -> float:
    """Final occupation f at the end of the span (asymptotic time)."""
    return integrate_mode(kin, config, settings).f


# history-path cost budget: n^2 kernel evaluations, n above this is abusive
_MAX_HISTORY_CELLS = 400_000


def solve_mode_direct(kin: ModeKinematics, config: FieldConfig,
                      grid_step: float, max_sweeps: int = 12) -> float:
    """Final occupation from the explicit memory-kernel integration.

    ``grid_step`` must resolve the fastest phase oscillation 2*omega:
    at most pi/(20*omega_max) per cell.  Intended for short, weak
    configurations only; cost grows quadratically with span/grid_step.
    """
    model, _ = _workspace(config)
    span = model.t_end - model.t_start
    if not grid_step > 0.0:
        raise ConfigurationError("grid_step must be positive")
    n = max(1, math.ceil(span / grid_step))
    if n > _MAX_HISTORY_CELLS:
        raise ResourceError(
            f"history integration needs {n} cells (> {_MAX_HISTORY_CELLS}); "
            "use solve_mode for long spans"
        )
    a_max = float(np.max(np.abs(model.table.coeffs[:, 0]))) * 1.05
    om_max = math.hypot(kin.eps_perp, abs(kin.P3) + a_max)
    if span / n > math.pi / (20.0 * om_max):
        raise ConfigurationError(
            f"grid_step {span / n:.4g} too coarse for omega_max {om_max:.4g}; "
            f"need <= {math.pi / (20.0 * om_max):.4g}"
        )
    f, sweeps, delta = kernel.active.solve_mode_history(
        model.mod_params, model.pulse_params, kin.P3, kin.eps_perp,
        model.t_start, model.t_end, n, max_sweeps,
    )
    return f


def equivalence_suite() -> list:
    """Fixed weak/short instances for the ODE-vs-history cross-check.

    Each entry is (label, kinematics, config, grid_step).  Fields are weak
    (E0 <= 0.01 E_cr) and short (span <= 200 tau0) so the history path stays
    cheap; carriers sit in the one/two-photon range so the final occupations
    are far above the integrator noise floor.
    """
    from .fields import ModulatedFieldConfig, PulseTrainConfig

    instances = []
    pulses = [
        ("gaussian-resonant", 0.01, 2.10, 12.0, 55.0, 0.30),
        ("gaussian-detuned", 0.008, 2.30, 10.0, 50.0, -0.55),
        ("gaussian-high-carrier", 0.005, 2.60, 14.0, 58.0, 0.80),
    ]
    for label, e0, wc, tau, t_m, p3 in pulses:
        cfg = PulseTrainConfig(E0=e0, omega_c=wc, tau=tau, T_m=t_m, N=1)
        instances.append((label, ModeKinematics(P3=p3), cfg))
    mods = [
        ("modulated-weak", 0.01, 2.05, 0.20, 1.0, 8.0 * math.pi, 40.0 * math.pi, 0.25),
        ("modulated-unmodulated", 0.006, 2.40, 0.30, 0.0, 6.0 * math.pi, 44.0 * math.pi, -0.70),
    ]
    for label, e0, wc, wm, m, t_sw, t_d, p3 in mods:
        cfg = ModulatedFieldConfig(E0=e0, omega_c=wc, omega_m=wm, M=m,
                                   t_switch=t_sw, t_d=t_d)
        instances.append((label, ModeKinematics(P3=p3), cfg))

    out = []
    for label, kin, cfg in instances:
        model = field_model(cfg)
        a_max = float(np.max(np.abs(model.table.coeffs[:, 0]))) * 1.05
        om_max = math.hypot(kin.eps_perp, abs(kin.P3) + a_max)
        grid_step = math.pi / (40.0 * om_max)
        out.append((label, kin, cfg, grid_step))
    return out
