"""Physical constants in SI units (CODATA 2018)."""

from scipy import constants

# tabulated value; constants.hbar is h / 2pi to full float precision
HBAR = constants.physical_constants["reduced Planck constant"][0]  # 1.054571817e-34 J s
K_B = constants.k  # 1.380649e-23 J/K
C_LIGHT = constants.c  # 299792458 m/s

TWO_PI = 2.0 * constants.pi

# omega_m must stay below this fraction of the free spectral range c/(2L)
ADIABATIC_FRACTION = 0.01
