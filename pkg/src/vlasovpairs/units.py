"""Natural-unit conventions used throughout the package.

Everything is expressed in electron-mass units with hbar = c = 1:

* energies and frequencies in units of the electron mass m,
* times in units of the Compton time tau0 = 1/m,
* momenta in units of m,
* electric field strengths in units of the critical (Schwinger) field
  E_cr = m^2/e, so a dimensionless field strength Ebar means eE = Ebar * m^2.

With this convention the elementary charge never appears explicitly: the
combination eE(t) that drives the kinetic equation equals the dimensionless
field strength, and eA(t) (the quantity entering p_par = P3 - eA) carries
units of m.  Configuration files use exactly these units, so parameter values
can be copied verbatim from the literature.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class NaturalUnits:
    """Record of the unit convention; all entries are fixed at 1."""

    electron_mass: float = 1.0
    critical_field: float = 1.0
    compton_time: float = 1.0


UNITS = NaturalUnits()

# Electron mass in internal units; kept symbolic for readability in formulas.
ELECTRON_MASS = UNITS.electron_mass
