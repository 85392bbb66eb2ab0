"""Power-dependent two-level-system (TLS) loss model and its fit.

The internal loss of a resonator versus mean photon number n follows the
saturable TLS form (Phillips, J. Low Temp. Phys. 7, 351 (1972); see also
Wang et al., Appl. Phys. Lett. 95, 233508 (2009) for the phenomenological
exponent):

    delta_i(n) = (1/q_tls) * tanh(h*f_r/(2*k_B*T)) / (1 + n/n_c)**alpha_tls
                 + delta_0

Fits run on log10(delta_i) residuals: sweeps span many decades in photon
number and loss, and linear-space residuals would let the lossiest points
dominate.  An optional two-photon term ``two_photon*n/f_r`` models loss
that *grows* with photon number.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import least_squares

from .errors import InsufficientSpanError, NonConvergenceError, ParameterError
from .linearfit import FitReport, covariance_std_errors
from .model import TlsParams, thermal_tanh_factor

__all__ = ["eval_tls_loss", "eval_combined_loss", "fit_tls"]


def eval_tls_loss(t: TlsParams, photon_number) -> np.ndarray | float:
    """TLS internal loss delta_i at mean photon number(s) n >= 0."""
    n = np.asarray(photon_number, dtype=float)
    if np.any(n < 0):
        raise ParameterError("photon number must be >= 0")
    tanh_factor = thermal_tanh_factor(t.f_r, t.temperature)
    loss = (1.0 / t.q_tls) * tanh_factor / (1.0 + n / t.n_c) ** t.alpha_tls + t.delta_0
    return loss if loss.ndim else float(loss)


def eval_combined_loss(t: TlsParams, two_photon: float, photon_number) -> np.ndarray | float:
    """TLS loss plus the two-photon contribution ``two_photon*n/f_r``.

    ``two_photon`` is an ordinary frequency in Hz, so the ratio against
    ``f_r`` needs no 2*pi.
    """
    if two_photon < 0:
        raise ParameterError("two_photon must be >= 0")
    n = np.asarray(photon_number, dtype=float)
    loss = eval_tls_loss(t, n) + two_photon * n / t.f_r
    return loss if np.ndim(loss) else float(loss)


def _tls_model(x: np.ndarray, n: np.ndarray, tanh_factor: float, f_r: float,
               include_two_photon: bool) -> np.ndarray:
    tls_amp, log10_nc, alpha, delta_0 = x[:4]
    loss = tls_amp * tanh_factor / (1.0 + n / 10.0**log10_nc) ** alpha + delta_0
    if include_two_photon:
        loss = loss + x[4] * n / f_r
    return loss


def _initial_guess(n: np.ndarray, loss: np.ndarray, tanh_factor: float) -> np.ndarray:
    order = np.argsort(n)
    n_sorted, loss_sorted = n[order], loss[order]
    # High-power tail approximates the power-independent floor.
    delta_0 = 0.8 * float(np.min(loss))
    amp = max((float(np.max(loss)) - delta_0) / tanh_factor, 1e-12)
    # Knee: photon number where the TLS part has dropped to half its amplitude.
    half = delta_0 + 0.5 * amp * tanh_factor
    above = loss_sorted > half
    if above.any() and not above.all():
        idx = int(np.nonzero(above)[0][-1])
        idx = min(idx, n_sorted.size - 2)
        n_c = float(np.sqrt(max(n_sorted[idx], 1e-12) * max(n_sorted[idx + 1], 1e-12)))
    else:
        n_c = float(np.sqrt(max(n_sorted[0], 1e-3) * n_sorted[-1]))
    return np.array([min(amp, 0.99), np.log10(min(max(n_c, 1e-6), 1e15)), 0.5,
                     min(max(delta_0, 0.0), 0.99)])


def fit_tls(photon_numbers, losses, temperature: float, f_r: float,
            include_two_photon: bool = False) -> FitReport:
    """Fit the TLS model to (photon number, internal loss) points.

    Parameters
    ----------
    photon_numbers, losses : array-like
        Paired mean photon numbers and measured ``delta_i`` values.
    temperature : float
        Sample temperature in K (fixed, not fitted).
    f_r : float
        Resonance frequency in Hz (fixed, not fitted).
    include_two_photon : bool
        Also fit a non-negative two-photon loss rate (Hz).

    Returns
    -------
    FitReport
        ``params`` is a :class:`TlsParams`; when ``include_two_photon`` is
        set the fitted rate appears in ``details['two_photon_hz']``.  The
        raw TLS amplitude ``1/q_tls`` and its standard error are reported in
        ``details`` so a power-independent device can be recognized as
        "amplitude consistent with zero" without dividing by it.

    Raises
    ------
    InsufficientSpanError
        Fewer than 6 points or less than 3 decades of photon-number span.
    NonConvergenceError
        The least-squares fit did not converge.
    """
    n = np.asarray(photon_numbers, dtype=float)
    loss = np.asarray(losses, dtype=float)
    if n.shape != loss.shape or n.ndim != 1:
        raise ParameterError("photon_numbers and losses must be 1-d and paired")
    if np.any(n < 0) or np.any(loss <= 0) or not np.all(np.isfinite(n)):
        raise ParameterError("photon numbers must be >= 0 and losses > 0")
    if n.size < 6:
        raise InsufficientSpanError(f"need >= 6 points, got {n.size}")
    positive = n[n > 0]
    span = np.max(positive) / np.min(positive) if positive.size else 0.0
    if span < 1e3:
        raise InsufficientSpanError(
            f"photon numbers span {np.log10(span) if span > 0 else 0:.2f} decades, need >= 3")

    tanh_factor = thermal_tanh_factor(f_r, temperature)
    x0 = _initial_guess(n, loss, tanh_factor)
    lower = [0.0, -6.0, 1e-6, 0.0]
    upper = [1.0, 16.0, 2.0, 1.0]
    x_scale = [max(x0[0], 1e-9), 1.0, 0.3, max(x0[3], 1e-9)]
    if include_two_photon:
        x0 = np.append(x0, 1e-3)
        lower.append(0.0)
        upper.append(1e12)
        x_scale.append(max(float(np.max(loss)) * f_r / max(np.max(n), 1.0), 1e-3))

    scales = np.asarray(x_scale, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    # Optimize in unit-scale variables so finite-difference steps stay
    # proportional to each parameter (losses are ~1e-7 and would otherwise
    # be probed with steps comparable to their own size).
    def residuals(u):
        model = _tls_model(u * scales, n, tanh_factor, f_r, include_two_photon)
        return np.log10(np.maximum(model, 1e-300)) - np.log10(loss)

    result = least_squares(residuals, x0 / scales,
                           bounds=(lower / scales, upper / scales), method="trf",
                           ftol=1e-14, xtol=1e-14, gtol=1e-14, max_nfev=2000)
    if not result.success:
        raise NonConvergenceError(f"TLS fit did not converge: {result.message}")
    x_fit = result.x * scales

    tls_amp, log10_nc, alpha, delta_0 = x_fit[:4]
    n_c = 10.0**log10_nc
    q_tls = 1.0 / tls_amp if tls_amp > 0 else np.inf
    params = TlsParams(q_tls=q_tls, n_c=n_c, alpha_tls=alpha, delta_0=delta_0,
                       temperature=temperature, f_r=f_r)

    names = ["tls_loss", "log10_n_c", "alpha_tls", "delta_0"]
    if include_two_photon:
        names.append("two_photon_hz")
    scaled_errors = covariance_std_errors(result.jac, result.fun, names)
    raw_errors = {name: err * scale
                  for (name, err), scale in zip(scaled_errors.items(), scales)}
    ln10 = np.log(10.0)
    std_errors = {
        "tls_loss": raw_errors["tls_loss"],
        "q_tls": raw_errors["tls_loss"] / tls_amp**2 if tls_amp > 0 else np.inf,
        "n_c": ln10 * n_c * raw_errors["log10_n_c"],
        "alpha_tls": raw_errors["alpha_tls"],
        "delta_0": raw_errors["delta_0"],
    }
    details: dict = {"tls_loss": float(tls_amp), "tanh_factor": tanh_factor}
    if include_two_photon:
        std_errors["two_photon_hz"] = raw_errors["two_photon_hz"]
        details["two_photon_hz"] = float(x_fit[4])

    residual_rms = float(np.sqrt(np.mean(result.fun**2)))
    return FitReport(params=params, std_errors=std_errors, residual_rms=residual_rms,
                     n_points=int(n.size), converged=True, diagnostics=frozenset(),
                     details=details)
