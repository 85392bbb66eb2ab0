"""Physical constants and unit conventions used throughout the package.

Constants are CODATA 2018 (h and k_B are exact SI defining constants).

Unit conventions, fixed here once for every module:

* Frequencies (``f_r``, linewidths, ``kerr``, ``two_photon``) are stored as
  ordinary frequencies in Hz.  Angular rates (rad/s) are formed internally,
  ``omega = 2*pi*f``, only where an equation of motion demands them.
* Losses ``delta_i = 1/Q_i`` and ``delta_c = 1/Q_c`` are dimensionless, so
  the loaded linewidth is ``f_r*(delta_i + delta_c)`` in Hz and
  ``2*pi*f_r*(delta_i + delta_c)`` in rad/s.
* The normalized detuning ``(f - f_r)/(f_r*(delta_i + delta_c))`` is the
  same number in either unit system; per-photon rate ratios such as
  ``two_photon*n/f_r`` are likewise 2*pi-free.
* Drive photon flux ``|a_in|^2`` is in photons per second,
  ``P_in/(h*f_r)`` for on-chip power ``P_in`` in watts.
"""

import math

# Planck constant, J s (exact).
PLANCK = 6.62607015e-34

# Reduced Planck constant, J s.
HBAR = PLANCK / (2.0 * math.pi)

# Boltzmann constant, J/K (exact).
BOLTZMANN = 1.380649e-23

TWO_PI = 2.0 * math.pi
