"""Vacuum electron-positron pair production in time-dependent electric fields.

Simulates the quantum Vlasov kinetic equation for spatially homogeneous,
linearly polarized fields: amplitude-modulated carriers and Gaussian pulse
trains.  Provides momentum spectra, reduced number densities, multiphoton
resonance bookkeeping, and resumable parameter sweeps, with a compiled
integration kernel and a pure-Python fallback.
"""

from .exceptions import (CheckpointError, ConfigurationError, DataError,
                         IntegrationError, NumericalError, ResourceError)
from .fields import (Envelope, FieldConfig, ModulatedFieldConfig,
                     PulseTrainConfig, Superposition, effective_mass,
                     field_value, fourier_components, power_suppression_factor,
                     vector_potential)
from .kernel import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .observables import (MomentumGrid, PowerLawFit, ResonanceCombo, Spectrum,
                          find_peaks, fit_power_law, momentum_spectrum,
                          number_density, peak_positions, resonance_momentum)
from .provenance import ARTIFACT_VERSION as __version__
from .scans import ScanPoint, ScanResult, ScanSpec, enhancement_curve, run_scan
from .solver import (ModeKinematics, ModeResult, ModeState, SolverSettings,
                     integrate_mode, solve_mode, solve_mode_direct, vlasov_rhs)
from .units import UNITS, NaturalUnits

__all__ = [
    "CheckpointError", "ConfigurationError", "DataError", "IntegrationError",
    "NumericalError", "ResourceError",
    "Envelope", "FieldConfig", "ModulatedFieldConfig", "PulseTrainConfig",
    "Superposition", "effective_mass", "field_value", "fourier_components",
    "power_suppression_factor", "vector_potential",
    "KERNEL_IMPLEMENTATION",
    "MomentumGrid", "PowerLawFit", "ResonanceCombo", "Spectrum", "find_peaks",
    "fit_power_law", "momentum_spectrum", "number_density", "peak_positions",
    "resonance_momentum",
    "ScanPoint", "ScanResult", "ScanSpec", "enhancement_curve", "run_scan",
    "ModeKinematics", "ModeResult", "ModeState", "SolverSettings",
    "integrate_mode", "solve_mode", "solve_mode_direct", "vlasov_rhs",
    "UNITS", "NaturalUnits",
    "__version__",
]
