"""Momentum spectra, number densities, peaks, and resonance predictions."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .exceptions import ConfigurationError, DataError, IntegrationError
from .fields import FieldConfig
from .provenance import fingerprint
from .solver import ModeKinematics, SolverSettings, solve_mode

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid of canonical longitudinal momenta (units of m)."""

    p_min: float
    p_max: float
    n_points: int

    def __post_init__(self):
        if not self.p_min < self.p_max:
            raise ConfigurationError(f"p_min must be below p_max: {self.p_min}, {self.p_max}")
        if self.n_points < 2:
            raise ConfigurationError(f"n_points must be >= 2, got {self.n_points}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.p_max - self.p_min) / (self.n_points - 1)


# spectrum grid wide enough for every multiphoton peak studied here
DEFAULT_SPECTRUM_GRID = MomentumGrid(-2.0, 2.0, 401)
# density scans integrate a narrower window with the same resolution
DEFAULT_DENSITY_GRID = MomentumGrid(-1.5, 1.5, 301)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Final occupation per grid node, with input fingerprint."""

    grid: MomentumGrid
    values: np.ndarray
    fingerprint: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if len(values) != self.grid.n_points:
            raise DataError("spectrum length does not match its grid")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


def _solve_chunk(args):
    config, settings, p_values = args
    return [solve_mode(ModeKinematics(P3=p), config, settings) for p in p_values]


def momentum_spectrum(config: FieldConfig, grid: MomentumGrid = DEFAULT_SPECTRUM_GRID,
                      settings: SolverSettings = SolverSettings(),
                      workers: int = 1) -> Spectrum:
    """Solve every grid mode at p_perp = 0 and assemble the spectrum.

    Modes are independent; with workers > 1 they are distributed over a
    process pool and reassembled in node order, so the result does not
    depend on the worker count.
    """
    nodes = grid.nodes
    values = np.empty(grid.n_points)
    if workers <= 1:
        for i, p in enumerate(nodes):
            try:
                values[i] = solve_mode(ModeKinematics(P3=p), config, settings)
            except IntegrationError as exc:
                raise IntegrationError(f"node {i} failed: {exc}", p3=p,
                                       t=exc.t, state=exc.state) from exc
    else:
        chunk = max(1, math.ceil(grid.n_points / (workers * 4)))
        slices = [slice(i, min(i + chunk, grid.n_points))
                  for i in range(0, grid.n_points, chunk)]
        jobs = [(config, settings, list(nodes[s])) for s in slices]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for s, result in zip(slices, pool.map(_solve_chunk, jobs)):
                values[s] = result
    return Spectrum(grid=grid, values=values,
                    fingerprint=fingerprint(config, grid, settings))


def number_density(spectrum: Spectrum) -> float:
    """Reduced 1D number density 2 * int dp/(2*pi) f(p) at p_perp = 0.

    Trapezoidal rule with end-point halving; the factor 2 counts the spin
    degeneracy of the created electrons.
    """
    values = np.asarray(spectrum.values)
    if not np.all(np.isfinite(values)):
        raise DataError("spectrum contains non-finite values")
    dp = spectrum.grid.spacing
    weights = np.ones_like(values)
    weights[0] = weights[-1] = 0.5
    return float(2.0 * dp / TWO_PI * (weights @ values))


def peak_positions(x: np.ndarray, y: np.ndarray, min_prominence: float = 0.05) -> list:
    """Local maxima of y(x) with parabolic refinement.

    Peaks must have prominence of at least ``min_prominence * max(y)``.
    Returns (x_peak, y_peak) pairs sorted by descending height.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y) or len(x) < 3:
        raise DataError("need matching x/y with at least 3 points")
    top = float(np.max(y))
    if top <= 0.0:
        return []
    idx, _ = _scipy_find_peaks(y, prominence=min_prominence * top)
    peaks = []
    for i in idx:
        ym, y0, yp = y[i - 1], y[i], y[i + 1]
        denom = ym - 2.0 * y0 + yp
        shift = 0.0 if denom == 0.0 else 0.5 * (ym - yp) / denom
        xp = x[i] + shift * (x[i + 1] - x[i])
        yv = y0 - 0.25 * (ym - yp) * shift
        peaks.append((float(xp), float(yv)))
    peaks.sort(key=lambda p: -p[1])
    return peaks


def find_peaks(spectrum: Spectrum, min_prominence: float = 0.05) -> list:
    """Spectral peaks as (p_parallel, occupation), highest first."""
    return peak_positions(spectrum.grid.nodes, spectrum.values, min_prominence)


@dataclass(frozen=True)
class ResonanceCombo:
    """Photon counts absorbed from the carrier and the two sidebands."""

    k_c: int
    k_plus: int = 0
    k_minus: int = 0

    def __post_init__(self):
        if min(self.k_c, self.k_plus, self.k_minus) < 0:
            raise ConfigurationError("photon counts must be nonnegative")
        if self.k_c + self.k_plus + self.k_minus < 1:
            raise ConfigurationError("at least one photon is required")

    def total_energy(self, omega_c: float, omega_m: float) -> float:
        return (self.k_c * omega_c
                + self.k_plus * (omega_c + omega_m)
                + self.k_minus * (omega_c - omega_m))


def resonance_momentum(combo: ResonanceCombo, omega_c: float, omega_m: float,
                       m_star: float = 1.0):
    """Longitudinal momentum where the n-photon energy balance peaks.

    Solves k photons = 2*sqrt(p^2 + m*^2); returns None when the total
    photon energy is below the pair threshold 2*m*.
    """
    if omega_c <= 0.0 or omega_m <= 0.0:
        raise ConfigurationError("frequencies must be positive")
    if m_star < 1.0:
        raise ConfigurationError("effective mass cannot be below the bare mass")
    total = combo.total_energy(omega_c, omega_m)
    half = 0.5 * total
    if half < m_star:
        return None
    return math.sqrt(half * half - m_star * m_star)


@dataclass(frozen=True)
class PowerLawFit:
    """n = prefactor * N**exponent with RMS residual in log space."""

    exponent: float
    prefactor: float
    rms_residual: float


def fit_power_law(points) -> PowerLawFit:
    """Least-squares fit of log n against log N."""
    points = list(points)
    if len(points) < 3:
        raise DataError("power-law fit needs at least 3 points")
    n_vals = np.array([p[0] for p in points], dtype=float)
    d_vals = np.array([p[1] for p in points], dtype=float)
    if np.any(n_vals <= 0.0) or np.any(d_vals <= 0.0) or not np.all(np.isfinite(d_vals)):
        raise DataError("power-law fit needs positive finite data")
    lx, ly = np.log(n_vals), np.log(d_vals)
    exponent, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (exponent * lx + intercept)
    return PowerLawFit(exponent=float(exponent), prefactor=float(np.exp(intercept)),
                       rms_residual=float(np.sqrt(np.mean(resid**2))))
