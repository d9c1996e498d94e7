"""Pure-Python integration kernels (fallback for the compiled extension).

Two entry points do the heavy lifting:

* ``integrate_mode_rk`` advances one momentum mode of the local kinetic
  system (f, g, w) with an adaptive Dormand-Prince 5(4) embedded pair and
  PI step-size control; the vector potential comes from the precomputed
  quintic-Hermite table, the field is evaluated in closed form.

* ``solve_mode_history`` integrates the non-Markovian form of the kinetic
  equation directly on a uniform grid, keeping the full source history and
  the cumulative phase, with end-corrected (Gregory) trapezoid weights and
  outer self-consistency sweeps for the Pauli-blocking factor.  Cost is
  O(steps^2); it exists as a small-instance cross-validation oracle.

The compiled extension implements the same algorithms statement for
statement; both are selected through :mod:`vlasovpairs.kernel`.
"""

from __future__ import annotations

import math

import numpy as np

IMPLEMENTATION = "python"

# Gaussian sub-pulse contributions are dropped beyond 9 widths (< 1e-35).
_PULSE_CUTOFF = 9.0

# Dormand-Prince 5(4) tableau.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
# error = b - b_hat
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

# PI controller (Hairer's DOPRI5 defaults).
_SAFE = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - _BETA * 0.75
_FACMIN = 0.2
_FACMAX = 10.0

_PAULI_TOL = 1e-12

# Gregory end-correction deltas relative to trapezoid weights, by number of
# difference corrections k (order h^{k+2}); applied symmetrically when the
# stencils fit without overlap.
_GREGORY_DELTAS = {
    1: (-1.0 / 12.0, 1.0 / 12.0),
    2: (-1.0 / 8.0, 1.0 / 6.0, -1.0 / 24.0),
    3: (-109.0 / 720.0, 59.0 / 240.0, -29.0 / 240.0, 19.0 / 720.0),
    4: (-49.0 / 288.0, 77.0 / 240.0, -7.0 / 30.0, 73.0 / 720.0, -3.0 / 160.0),
}


class Workspace:
    """Field parameters and potential table unpacked to plain Python lists."""

    __slots__ = ("mod", "pulse", "seg_bounds", "seg_h", "seg_cell0",
                 "seg_ncells", "coeffs", "nseg")

    def __init__(self, mod, pulse, seg_bounds, seg_h, seg_cell0, seg_ncells, coeffs):
        self.mod = [tuple(map(float, row)) for row in mod]
        self.pulse = [tuple(map(float, row)) for row in pulse]
        self.seg_bounds = [float(x) for x in seg_bounds]
        self.seg_h = [float(x) for x in seg_h]
        self.seg_cell0 = [int(x) for x in seg_cell0]
        self.seg_ncells = [int(x) for x in seg_ncells]
        self.coeffs = [tuple(map(float, row)) for row in coeffs]
        self.nseg = len(self.seg_h)


def prepare(mod, pulse, seg_bounds, seg_h, seg_cell0, seg_ncells, coeffs):
    return Workspace(mod, pulse, seg_bounds, seg_h, seg_cell0, seg_ncells, coeffs)


def _field(ws, t):
    out = 0.0
    for E0, wc, wm, M, t_on, t_off, tau_s in ws.mod:
        if tau_s > 0.0:
            if t < t_on:
                env = math.exp((t - t_on) / tau_s)
            elif t > t_off:
                env = math.exp(-(t - t_off) / tau_s)
            else:
                env = 1.0
        else:
            env = 1.0
        out += env * (1.0 - M * (1.0 + math.cos(wm * t)) / 2.0) * E0 * math.sin(wc * t)
    for E0, wc, tau, T_m, N in ws.pulse:
        gauss = 0.0
        for n in range(1, int(N) + 1):
            x = (t - n * T_m) / tau
            if -_PULSE_CUTOFF < x < _PULSE_CUTOFF:
                gauss += math.exp(-x * x)
        if gauss != 0.0:
            out += E0 * gauss * math.sin(wc * t)
    return out


def _potential(ws, t):
    seg = ws.nseg - 1
    for i in range(ws.nseg - 1):
        if t < ws.seg_bounds[i + 1]:
            seg = i
            break
    h = ws.seg_h[seg]
    base = ws.seg_bounds[seg]
    k = int((t - base) / h)
    if k < 0:
        k = 0
    elif k >= ws.seg_ncells[seg]:
        k = ws.seg_ncells[seg] - 1
    u = (t - (base + k * h)) / h
    c = ws.coeffs[ws.seg_cell0[seg] + k]
    return ((((c[5] * u + c[4]) * u + c[3]) * u + c[2]) * u + c[1]) * u + c[0]


def eval_field(ws, t):
    return _field(ws, float(t))


def eval_potential(ws, t):
    return _potential(ws, float(t))


def integrate_mode_rk(ws, p3, eps_perp, t0, t1, rtol, atol, max_step, h0, max_steps):
    """Adaptive DOPRI5 integration of (f, g, w) from rest at t0 to t1.

    Returns (f, g, w, accepted, rejected, min_f, max_f, status, t) with
    status 0 = ok, 1 = step underflow, 2 = step budget exceeded,
    3 = Pauli bound violated.
    """
    eps2 = eps_perp * eps_perp

    def rhs(t, f, g, w):
        e = _field(ws, t)
        pp = p3 - _potential(ws, t)
        om2 = eps2 + pp * pp
        om = math.sqrt(om2)
        q = e * eps_perp / om2
        return 0.5 * q * g, q * (1.0 - 2.0 * f) - 2.0 * om * w, 2.0 * om * g

    t = t0
    f = g = w = 0.0
    minf = maxf = 0.0
    k1f, k1g, k1w = rhs(t, f, g, w)
    h = min(h0, max_step, t1 - t0)
    facold = 1e-4
    accepted = rejected = 0
    status = 0
    last_rejected = False

    while t < t1:
        if accepted + rejected >= max_steps:
            status = 2
            break
        if h < 1e-14 * max(abs(t), 1.0):
            status = 1
            break
        if t + h > t1:
            h = t1 - t

        k2f, k2g, k2w = rhs(t + _C2 * h,
                            f + h * _A21 * k1f,
                            g + h * _A21 * k1g,
                            w + h * _A21 * k1w)
        k3f, k3g, k3w = rhs(t + _C3 * h,
                            f + h * (_A31 * k1f + _A32 * k2f),
                            g + h * (_A31 * k1g + _A32 * k2g),
                            w + h * (_A31 * k1w + _A32 * k2w))
        k4f, k4g, k4w = rhs(t + _C4 * h,
                            f + h * (_A41 * k1f + _A42 * k2f + _A43 * k3f),
                            g + h * (_A41 * k1g + _A42 * k2g + _A43 * k3g),
                            w + h * (_A41 * k1w + _A42 * k2w + _A43 * k3w))
        k5f, k5g, k5w = rhs(t + _C5 * h,
                            f + h * (_A51 * k1f + _A52 * k2f + _A53 * k3f + _A54 * k4f),
                            g + h * (_A51 * k1g + _A52 * k2g + _A53 * k3g + _A54 * k4g),
                            w + h * (_A51 * k1w + _A52 * k2w + _A53 * k3w + _A54 * k4w))
        k6f, k6g, k6w = rhs(t + h,
                            f + h * (_A61 * k1f + _A62 * k2f + _A63 * k3f + _A64 * k4f + _A65 * k5f),
                            g + h * (_A61 * k1g + _A62 * k2g + _A63 * k3g + _A64 * k4g + _A65 * k5g),
                            w + h * (_A61 * k1w + _A62 * k2w + _A63 * k3w + _A64 * k4w + _A65 * k5w))
        fn = f + h * (_B1 * k1f + _B3 * k3f + _B4 * k4f + _B5 * k5f + _B6 * k6f)
        gn = g + h * (_B1 * k1g + _B3 * k3g + _B4 * k4g + _B5 * k5g + _B6 * k6g)
        wn = w + h * (_B1 * k1w + _B3 * k3w + _B4 * k4w + _B5 * k5w + _B6 * k6w)
        k7f, k7g, k7w = rhs(t + h, fn, gn, wn)

        erf = h * (_E1 * k1f + _E3 * k3f + _E4 * k4f + _E5 * k5f + _E6 * k6f + _E7 * k7f)
        erg = h * (_E1 * k1g + _E3 * k3g + _E4 * k4g + _E5 * k5g + _E6 * k6g + _E7 * k7g)
        erw = h * (_E1 * k1w + _E3 * k3w + _E4 * k4w + _E5 * k5w + _E6 * k6w + _E7 * k7w)
        scf = atol + rtol * max(abs(f), abs(fn))
        scg = atol + rtol * max(abs(g), abs(gn))
        scw = atol + rtol * max(abs(w), abs(wn))
        err = math.sqrt(((erf / scf) ** 2 + (erg / scg) ** 2 + (erw / scw) ** 2) / 3.0)

        if err == 0.0:
            fac = _FACMAX
        else:
            fac = _SAFE * err ** -_EXPO1 * facold ** _BETA
            if fac > _FACMAX:
                fac = _FACMAX
            elif fac < _FACMIN:
                fac = _FACMIN

        if err <= 1.0:
            t += h
            f, g, w = fn, gn, wn
            k1f, k1g, k1w = k7f, k7g, k7w  # FSAL
            accepted += 1
            if f < minf:
                minf = f
            if f > maxf:
                maxf = f
            if f < -_PAULI_TOL or f > 1.0 + _PAULI_TOL:
                status = 3
                break
            facold = max(err, 1e-4)
            if last_rejected and fac > 1.0:
                fac = 1.0
            last_rejected = False
            h *= fac
            if h > max_step:
                h = max_step
        else:
            rejected += 1
            last_rejected = True
            h *= fac

    return f, g, w, accepted, rejected, minf, maxf, status, t


# ---------------------------------------------------------------------------
# direct history integration of the non-Markovian equation

_GL5_X, _GL5_W = (lambda xw: (0.5 * (xw[0] + 1.0), 0.5 * xw[1]))(
    np.polynomial.legendre.leggauss(5))


def _history_weights_apply(v, i, h):
    """Integral of sampled values v[0..i] with Gregory-corrected trapezoid."""
    s = v[:i + 1].sum() - 0.5 * (v[0] + v[i])
    k = min(4, (i - 1) // 2)
    if k:
        d = _GREGORY_DELTAS[k]
        for m in range(k + 1):
            s += d[m] * (v[m] + v[i - m])
    return h * s


def solve_mode_history(mod, pulse, p3, eps_perp, t0, t1, ncells, max_sweeps):
    """Uniform-grid integration of the memory-kernel form of the equation.

    Maintains the source history q(t') and cumulative phase, evaluates the
    memory integral with the full O(steps^2) double sum, and sweeps the
    solution to self-consistency in the Pauli factor (1 - 2f).

    Returns (f_final, sweeps, last_delta).
    """
    ws = Workspace(mod, pulse, [t0, t1], [t1 - t0], [0], [1],
                   np.zeros((1, 6)))  # only the field parameters are used
    n = int(ncells)
    h = (t1 - t0) / n
    tg = t0 + h * np.arange(n + 1)

    e_grid = np.array([_field(ws, t) for t in tg])
    # cumulative A on the grid: per-cell Gauss-Legendre of E
    pts = tg[:-1, None] + h * _GL5_X[None, :]
    e_pts = np.array([_field(ws, t) for t in pts.ravel()]).reshape(n, 5)
    a_grid = np.concatenate(([0.0], np.cumsum(-h * (e_pts @ _GL5_W))))
    # A inside each cell (at the GL nodes), then the cumulative phase
    nested = tg[:-1, None, None] + h * _GL5_X[None, :, None] * _GL5_X[None, None, :]
    e_nested = np.array([_field(ws, t) for t in nested.ravel()]).reshape(n, 5, 5)
    partial = h * _GL5_X[None, :] * (e_nested @ _GL5_W)
    a_nodes = a_grid[:-1, None] - partial
    om_nodes = np.sqrt(eps_perp**2 + (p3 - a_nodes) ** 2)
    phi = np.concatenate(([0.0], np.cumsum(h * (om_nodes @ _GL5_W))))

    om_grid = np.sqrt(eps_perp**2 + (p3 - a_grid) ** 2)
    q = e_grid * eps_perp / om_grid**2

    f = np.zeros(n + 1)
    fdot = np.zeros(n + 1)
    delta = math.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        u = q * (1.0 - 2.0 * f)
        for i in range(1, n + 1):
            mem = u[:i + 1] * np.cos(2.0 * (phi[i] - phi[:i + 1]))
            fdot[i] = 0.5 * q[i] * _history_weights_apply(mem, i, h)
        f_new = np.empty(n + 1)
        f_new[0] = 0.0
        prefix = np.cumsum(fdot)
        for i in range(1, n + 1):
            s = prefix[i] - 0.5 * (fdot[0] + fdot[i])
            k = min(4, (i - 1) // 2)
            if k:
                d = _GREGORY_DELTAS[k]
                for m in range(k + 1):
                    s += d[m] * (fdot[m] + fdot[i - m])
            f_new[i] = h * s
        delta = float(np.max(np.abs(f_new - f)))
        f = f_new
        if delta <= 1e-18 + 1e-12 * float(np.max(np.abs(f))):
            break
    return float(f[n]), sweeps, delta
