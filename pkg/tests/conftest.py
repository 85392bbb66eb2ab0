"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from hangerfit import LinearParams, NonlinearParams, normalized_drive_params


def cubic_coefficients(xi, eta, dtilde):
    """Coefficients (c3, c2, c1, c0) of the drive-normalized photon cubic."""
    return (xi * xi + eta * eta / 4.0,
            eta / 2.0 - 2.0 * xi * dtilde,
            0.25 + dtilde * dtilde,
            -0.5)


def cubic_value(xi, eta, dtilde, x):
    c3, c2, c1, c0 = cubic_coefficients(xi, eta, dtilde)
    return ((c3 * x + c2) * x + c1) * x + c0


def bisection_roots(xi, eta, dtilde, n_grid=4000, tol=1e-13):
    """Independent oracle: all positive real roots by sign-scan + bisection.

    Scans a logarithmic-ish grid up to a Cauchy-style bound on the largest
    root, brackets every sign change, and bisects each bracket.  Entirely
    independent of the closed-form solver under test.
    """
    c3, c2, c1, c0 = cubic_coefficients(xi, eta, dtilde)
    if c3 == 0.0:
        # c2 vanishes identically with c3 for this family: linear equation.
        return [-c0 / c1]
    bound = 1.0 + max(abs(c2), abs(c1), abs(c0)) / c3
    grid = np.concatenate([[1e-12], np.geomspace(1e-9, bound * 1.0000001, n_grid)])
    values = ((c3 * grid + c2) * grid + c1) * grid + c0
    roots = []
    for lo, hi, v_lo, v_hi in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if v_lo == 0.0:
            roots.append(lo)
            continue
        if v_lo * v_hi < 0:
            a, b = lo, hi
            for _ in range(200):
                mid = 0.5 * (a + b)
                v_mid = ((c3 * mid + c2) * mid + c1) * mid + c0
                if v_lo * v_mid <= 0:
                    b = mid
                else:
                    a = mid
                if b - a < tol * max(1.0, b):
                    break
            roots.append(0.5 * (a + b))
    if values[-1] == 0.0:
        roots.append(grid[-1])
    return sorted(roots)


def oracle_root_count(xi, eta, dtilde):
    """Positive-real-root count via numpy's companion-matrix roots."""
    c3, c2, c1, c0 = cubic_coefficients(xi, eta, dtilde)
    if c3 == 0.0:
        return 1
    roots = np.roots([c3, c2, c1, c0])
    return sum(1 for r in roots
               if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real > 0)


def drive_flux_for_xi(linear: LinearParams, kerr: float, xi_target: float) -> float:
    """Drive flux that produces the requested xi for the given Kerr rate."""
    probe = NonlinearParams(linear=linear, kerr=kerr, two_photon=0.0, drive_flux=1.0)
    xi_unit, _, _ = normalized_drive_params(probe)
    return xi_target / xi_unit


@pytest.fixture
def base_linear():
    return LinearParams(amplitude=1.0, electric_delay=0.0, phase_offset=0.0,
                        fano_asymmetry=0.0, resonant_freq=5e9,
                        internal_loss=5e-7, coupling_loss=1e-6)
