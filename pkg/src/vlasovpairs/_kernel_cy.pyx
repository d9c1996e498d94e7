# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels.

Statement-for-statement mirror of :mod:`vlasovpairs._kernel_py`; see that
module for the algorithm documentation.  Selected automatically through
:mod:`vlasovpairs.kernel` when the extension is built.
"""

from libc.math cimport cos, exp, fabs, pow, sin, sqrt

import numpy as np

IMPLEMENTATION = "compiled"

cdef double PULSE_CUTOFF = 9.0

# Dormand-Prince 5(4) tableau
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

# PI controller
cdef double SAFE = 0.9
cdef double BETA = 0.04
cdef double EXPO1 = 0.2 - 0.04 * 0.75
cdef double FACMIN = 0.2
cdef double FACMAX = 10.0

cdef double PAULI_TOL = 1e-12

# Gauss-Legendre 5 on [0, 1] (filled at import)
cdef double GL5_X[5]
cdef double GL5_W[5]

# Gregory end-correction deltas, GD[k][m] for k = 1..4 corrections
cdef double GD[5][5]

def _init_tables():
    x, w = np.polynomial.legendre.leggauss(5)
    for j in range(5):
        GL5_X[j] = 0.5 * (x[j] + 1.0)
        GL5_W[j] = 0.5 * w[j]
    deltas = {
        1: (-1.0 / 12.0, 1.0 / 12.0),
        2: (-1.0 / 8.0, 1.0 / 6.0, -1.0 / 24.0),
        3: (-109.0 / 720.0, 59.0 / 240.0, -29.0 / 240.0, 19.0 / 720.0),
        4: (-49.0 / 288.0, 77.0 / 240.0, -7.0 / 30.0, 73.0 / 720.0, -3.0 / 160.0),
    }
    for k, row in deltas.items():
        for m, val in enumerate(row):
            GD[k][m] = val

_init_tables()


cdef class Workspace:
    cdef double[:, ::1] mod
    cdef double[:, ::1] pulse
    cdef double[::1] seg_bounds
    cdef double[::1] seg_h
    cdef long long[::1] seg_cell0
    cdef long long[::1] seg_ncells
    cdef double[:, ::1] coeffs
    cdef int nseg, nmod, npulse

    def __init__(self, mod, pulse, seg_bounds, seg_h, seg_cell0, seg_ncells, coeffs):
        self.mod = np.ascontiguousarray(mod, dtype=np.float64).reshape(-1, 7)
        self.pulse = np.ascontiguousarray(pulse, dtype=np.float64).reshape(-1, 5)
        self.seg_bounds = np.ascontiguousarray(seg_bounds, dtype=np.float64)
        self.seg_h = np.ascontiguousarray(seg_h, dtype=np.float64)
        self.seg_cell0 = np.ascontiguousarray(seg_cell0, dtype=np.longlong)
        self.seg_ncells = np.ascontiguousarray(seg_ncells, dtype=np.longlong)
        self.coeffs = np.ascontiguousarray(coeffs, dtype=np.float64).reshape(-1, 6)
        self.nseg = self.seg_h.shape[0]
        self.nmod = self.mod.shape[0]
        self.npulse = self.pulse.shape[0]


def prepare(mod, pulse, seg_bounds, seg_h, seg_cell0, seg_ncells, coeffs):
    return Workspace(mod, pulse, seg_bounds, seg_h, seg_cell0, seg_ncells, coeffs)


cdef double _field(Workspace ws, double t) noexcept nogil:
    cdef double out = 0.0
    cdef double E0, wc, wm, M, t_on, t_off, tau_s, env, tau, T_m, gauss, x
    cdef int i, n, N
    for i in range(ws.nmod):
        E0 = ws.mod[i, 0]; wc = ws.mod[i, 1]; wm = ws.mod[i, 2]; M = ws.mod[i, 3]
        t_on = ws.mod[i, 4]; t_off = ws.mod[i, 5]; tau_s = ws.mod[i, 6]
        if tau_s > 0.0:
            if t < t_on:
                env = exp((t - t_on) / tau_s)
            elif t > t_off:
                env = exp(-(t - t_off) / tau_s)
            else:
                env = 1.0
        else:
            env = 1.0
        out += env * (1.0 - M * (1.0 + cos(wm * t)) / 2.0) * E0 * sin(wc * t)
    for i in range(ws.npulse):
        E0 = ws.pulse[i, 0]; wc = ws.pulse[i, 1]; tau = ws.pulse[i, 2]
        T_m = ws.pulse[i, 3]; N = <int> ws.pulse[i, 4]
        gauss = 0.0
        for n in range(1, N + 1):
            x = (t - n * T_m) / tau
            if -PULSE_CUTOFF < x < PULSE_CUTOFF:
                gauss += exp(-x * x)
        if gauss != 0.0:
            out += E0 * gauss * sin(wc * t)
    return out


cdef double _potential(Workspace ws, double t) noexcept nogil:
    cdef int seg = ws.nseg - 1
    cdef int i
    cdef long long k
    cdef double h, base, u
    for i in range(ws.nseg - 1):
        if t < ws.seg_bounds[i + 1]:
            seg = i
            break
    h = ws.seg_h[seg]
    base = ws.seg_bounds[seg]
    k = <long long> ((t - base) / h)
    if k < 0:
        k = 0
    elif k >= ws.seg_ncells[seg]:
        k = ws.seg_ncells[seg] - 1
    u = (t - (base + k * h)) / h
    cdef const double* c = &ws.coeffs[ws.seg_cell0[seg] + k, 0]
    return ((((c[5] * u + c[4]) * u + c[3]) * u + c[2]) * u + c[1]) * u + c[0]


def eval_field(Workspace ws, double t):
    return _field(ws, t)


def eval_potential(Workspace ws, double t):
    return _potential(ws, t)


cdef inline void _rhs(Workspace ws, double p3, double eps_perp, double eps2,
                      double t, double f, double g, double w,
                      double* df, double* dg, double* dw) noexcept nogil:
    cdef double e = _field(ws, t)
    cdef double pp = p3 - _potential(ws, t)
    cdef double om2 = eps2 + pp * pp
    cdef double om = sqrt(om2)
    cdef double q = e * eps_perp / om2
    df[0] = 0.5 * q * g
    dg[0] = q * (1.0 - 2.0 * f) - 2.0 * om * w
    dw[0] = 2.0 * om * g


def integrate_mode_rk(Workspace ws, double p3, double eps_perp, double t0,
                      double t1, double rtol, double atol, double max_step,
                      double h0, long max_steps):
    """Adaptive DOPRI5; see the Python kernel for the contract."""
    cdef double eps2 = eps_perp * eps_perp
    cdef double t = t0, f = 0.0, g = 0.0, w = 0.0
    cdef double minf = 0.0, maxf = 0.0
    cdef double k1f, k1g, k1w, k2f, k2g, k2w, k3f, k3g, k3w
    cdef double k4f, k4g, k4w, k5f, k5g, k5w, k6f, k6g, k6w, k7f, k7g, k7w
    cdef double fn, gn, wn, erf, erg, erw, scf, scg, scw, err, fac
    cdef double h, facold = 1e-4
    cdef long accepted = 0, rejected = 0
    cdef int status = 0
    cdef bint last_rejected = False

    with nogil:
        _rhs(ws, p3, eps_perp, eps2, t, f, g, w, &k1f, &k1g, &k1w)
        h = h0
        if max_step < h:
            h = max_step
        if t1 - t0 < h:
            h = t1 - t0

        while t < t1:
            if accepted + rejected >= max_steps:
                status = 2
                break
            if h < 1e-14 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                status = 1
                break
            if t + h > t1:
                h = t1 - t

            _rhs(ws, p3, eps_perp, eps2, t + C2 * h,
                 f + h * A21 * k1f, g + h * A21 * k1g, w + h * A21 * k1w,
                 &k2f, &k2g, &k2w)
            _rhs(ws, p3, eps_perp, eps2, t + C3 * h,
                 f + h * (A31 * k1f + A32 * k2f),
                 g + h * (A31 * k1g + A32 * k2g),
                 w + h * (A31 * k1w + A32 * k2w),
                 &k3f, &k3g, &k3w)
            _rhs(ws, p3, eps_perp, eps2, t + C4 * h,
                 f + h * (A41 * k1f + A42 * k2f + A43 * k3f),
                 g + h * (A41 * k1g + A42 * k2g + A43 * k3g),
                 w + h * (A41 * k1w + A42 * k2w + A43 * k3w),
                 &k4f, &k4g, &k4w)
            _rhs(ws, p3, eps_perp, eps2, t + C5 * h,
                 f + h * (A51 * k1f + A52 * k2f + A53 * k3f + A54 * k4f),
                 g + h * (A51 * k1g + A52 * k2g + A53 * k3g + A54 * k4g),
                 w + h * (A51 * k1w + A52 * k2w + A53 * k3w + A54 * k4w),
                 &k5f, &k5g, &k5w)
            _rhs(ws, p3, eps_perp, eps2, t + h,
                 f + h * (A61 * k1f + A62 * k2f + A63 * k3f + A64 * k4f + A65 * k5f),
                 g + h * (A61 * k1g + A62 * k2g + A63 * k3g + A64 * k4g + A65 * k5g),
                 w + h * (A61 * k1w + A62 * k2w + A63 * k3w + A64 * k4w + A65 * k5w),
                 &k6f, &k6g, &k6w)
            fn = f + h * (B1 * k1f + B3 * k3f + B4 * k4f + B5 * k5f + B6 * k6f)
            gn = g + h * (B1 * k1g + B3 * k3g + B4 * k4g + B5 * k5g + B6 * k6g)
            wn = w + h * (B1 * k1w + B3 * k3w + B4 * k4w + B5 * k5w + B6 * k6w)
            _rhs(ws, p3, eps_perp, eps2, t + h, fn, gn, wn, &k7f, &k7g, &k7w)

            erf = h * (E1 * k1f + E3 * k3f + E4 * k4f + E5 * k5f + E6 * k6f + E7 * k7f)
            erg = h * (E1 * k1g + E3 * k3g + E4 * k4g + E5 * k5g + E6 * k6g + E7 * k7g)
            erw = h * (E1 * k1w + E3 * k3w + E4 * k4w + E5 * k5w + E6 * k6w + E7 * k7w)
            scf = atol + rtol * (fabs(f) if fabs(f) > fabs(fn) else fabs(fn))
            scg = atol + rtol * (fabs(g) if fabs(g) > fabs(gn) else fabs(gn))
            scw = atol + rtol * (fabs(w) if fabs(w) > fabs(wn) else fabs(wn))
            err = sqrt(((erf / scf) * (erf / scf) + (erg / scg) * (erg / scg)
                        + (erw / scw) * (erw / scw)) / 3.0)

            if err == 0.0:
                fac = FACMAX
            else:
                fac = SAFE * pow(err, -EXPO1) * pow(facold, BETA)
                if fac > FACMAX:
                    fac = FACMAX
                elif fac < FACMIN:
                    fac = FACMIN

            if err <= 1.0:
                t += h
                f = fn; g = gn; w = wn
                k1f = k7f; k1g = k7g; k1w = k7w  # FSAL
                accepted += 1
                if f < minf:
                    minf = f
                if f > maxf:
                    maxf = f
                if f < -PAULI_TOL or f > 1.0 + PAULI_TOL:
                    status = 3
                    break
                facold = err if err > 1e-4 else 1e-4
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


def solve_mode_history(mod, pulse, double p3, double eps_perp, double t0,
                       double t1, long ncells, long max_sweeps):
    """Uniform-grid history integration; see the Python kernel."""
    cdef Workspace ws = Workspace(mod, pulse, np.array([t0, t1]),
                                  np.array([t1 - t0]), np.array([0]),
                                  np.array([1]), np.zeros((1, 6)))
    cdef long n = ncells
    cdef double h = (t1 - t0) / n
    cdef double eps2 = eps_perp * eps_perp

    tg_arr = t0 + h * np.arange(n + 1)
    cdef double[::1] tg = tg_arr
    cdef double[::1] e_grid = np.empty(n + 1)
    cdef double[::1] a_grid = np.empty(n + 1)
    cdef double[::1] phi = np.empty(n + 1)
    cdef double[::1] q = np.empty(n + 1)
    cdef double[::1] u = np.empty(n + 1)
    cdef double[::1] f = np.zeros(n + 1)
    cdef double[::1] f_new = np.zeros(n + 1)
    cdef double[::1] fdot = np.zeros(n + 1)
    cdef double[::1] prefix = np.zeros(n + 1)

    cdef long i, j, m, sweeps_done = 0
    cdef int jj, kk, kcorr
    cdef double s, node, a_node, om, dphi, om_grid, delta, diff, fmax
    cdef double break_tol

    with nogil:
        for i in range(n + 1):
            e_grid[i] = _field(ws, tg[i])
        a_grid[0] = 0.0
        phi[0] = 0.0
        for i in range(n):
            s = 0.0
            for jj in range(5):
                s += GL5_W[jj] * _field(ws, tg[i] + h * GL5_X[jj])
            a_grid[i + 1] = a_grid[i] - h * s
            dphi = 0.0
            for jj in range(5):
                s = 0.0
                for kk in range(5):
                    s += GL5_W[kk] * _field(ws, tg[i] + h * GL5_X[jj] * GL5_X[kk])
                a_node = a_grid[i] - h * GL5_X[jj] * s
                om = sqrt(eps2 + (p3 - a_node) * (p3 - a_node))
                dphi += GL5_W[jj] * om
            phi[i + 1] = phi[i] + h * dphi
        for i in range(n + 1):
            om_grid = eps2 + (p3 - a_grid[i]) * (p3 - a_grid[i])
            q[i] = e_grid[i] * eps_perp / om_grid

    delta = 0.0
    for sweep in range(1, max_sweeps + 1):
        sweeps_done = sweep
        with nogil:
            for i in range(n + 1):
                u[i] = q[i] * (1.0 - 2.0 * f[i])
            fdot[0] = 0.0
            for i in range(1, n + 1):
                s = 0.0
                for j in range(i + 1):
                    s += u[j] * cos(2.0 * (phi[i] - phi[j]))
                s -= 0.5 * (u[0] * cos(2.0 * (phi[i] - phi[0])) + u[i])
                kcorr = <int> ((i - 1) // 2)
                if kcorr > 4:
                    kcorr = 4
                if kcorr > 0:
                    for m in range(kcorr + 1):
                        s += GD[kcorr][m] * (u[m] * cos(2.0 * (phi[i] - phi[m]))
                                             + u[i - m] * cos(2.0 * (phi[i] - phi[i - m])))
                fdot[i] = 0.5 * q[i] * h * s
            prefix[0] = fdot[0]
            for i in range(1, n + 1):
                prefix[i] = prefix[i - 1] + fdot[i]
            f_new[0] = 0.0
            for i in range(1, n + 1):
                s = prefix[i] - 0.5 * (fdot[0] + fdot[i])
                kcorr = <int> ((i - 1) // 2)
                if kcorr > 4:
                    kcorr = 4
                if kcorr > 0:
                    for m in range(kcorr + 1):
                        s += GD[kcorr][m] * (fdot[m] + fdot[i - m])
                f_new[i] = h * s
            delta = 0.0
            fmax = 0.0
            for i in range(n + 1):
                diff = fabs(f_new[i] - f[i])
                if diff > delta:
                    delta = diff
                if fabs(f_new[i]) > fmax:
                    fmax = fabs(f_new[i])
                f[i] = f_new[i]
            break_tol = 1e-18 + 1e-12 * fmax
        if delta <= break_tol:
            break
    return f[n], sweeps_done, delta
