"""Linear line-shape fitting: initial estimation, least squares, segmentation.

The fit minimizes the stacked real/imaginary residuals of the model in
:mod:`hangerfit.model` with a damped (trust-region) least-squares solver
and a finite-difference Jacobian.  Standard errors come from the Jacobian
covariance scaled by the residual variance.

The fit window is the trace as given; carving windows out of a wideband
scan is a separate, explicit step (:func:`segment_resonances`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .constants import TWO_PI
from .errors import (
    NoResonanceError,
    ParameterError,
    SegmentationMismatchError,
    SingularJacobianError,
)
from .model import (
    FrequencyTrace,
    LinearParams,
    eval_linear_s21,
    loaded_linewidth,
    normalized_detuning,
    raw_qc,
)

__all__ = [
    "FitReport",
    "estimate_initial",
    "fit_linear",
    "segment_resonances",
    "covariance_std_errors",
]

# Fraction of points on each side of the window treated as off-resonant
# baseline when estimating amplitude, delay and noise.
_WING_FRACTION = 0.10

# Dips shallower than 3 sigma of the baseline noise are not resonances.
_MIN_DIP_SIGMA = 3.0


@dataclass(frozen=True)
class FitReport:
    """Result of a parameter fit.

    ``diagnostics`` flags: ``nonlinear_suspected`` (structured residuals),
    ``bifurcated`` (a nonlinear fit crossed the multi-root region),
    ``low_snr`` (baseline noise too close to the signal).
    ``details`` carries derived scalars such as ``q_i``, ``q_c`` (diameter
    corrected, equal to ``1/coupling_loss``) and ``q_c_raw``.
    """

    params: object
    std_errors: dict = field(default_factory=dict)
    residual_rms: float = 0.0
    n_points: int = 0
    converged: bool = False
    diagnostics: frozenset = frozenset()
    details: dict = field(default_factory=dict)


def covariance_matrix(jac: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    """Parameter covariance from a least-squares Jacobian at the solution.

    Uses the SVD pseudo-inverse of J^T J scaled by the residual variance;
    directions the data does not constrain get variances from the rank
    tolerance (large but finite).
    """
    m, p = jac.shape
    dof = max(m - p, 1)
    s_squared = float(np.sum(residuals**2)) / dof
    _, sv, vt = np.linalg.svd(jac, full_matrices=False)
    if sv.size == 0 or sv[0] <= 0.0:
        raise SingularJacobianError("Jacobian is identically zero")
    tol = sv[0] * max(m, p) * np.finfo(float).eps
    inv_sv2 = 1.0 / np.maximum(sv, tol) ** 2
    return (vt.T * inv_sv2) @ vt * s_squared


def covariance_std_errors(jac: np.ndarray, residuals: np.ndarray,
                          names: list[str]) -> dict:
    """Standard errors (sqrt of the covariance diagonal) keyed by name."""
    if len(names) != jac.shape[1]:
        raise ValueError("one name per column required")
    diag = np.diag(covariance_matrix(jac, residuals))
    return {name: float(np.sqrt(max(c, 0.0))) for name, c in zip(names, diag)}


def _wing_indices(n: int) -> np.ndarray:
    k = max(3, int(round(_WING_FRACTION * n)))
    return np.concatenate([np.arange(k), np.arange(n - k, n)])


def _noise_sigma(mag: np.ndarray, wings: np.ndarray) -> float:
    wing_mag = mag[wings]
    return 1.4826 * float(np.median(np.abs(wing_mag - np.median(wing_mag))))


def estimate_initial(trace: FrequencyTrace) -> LinearParams:
    """Heuristic starting point for :func:`fit_linear`.

    The guess locates the dip, reads the loaded linewidth from the
    full-width-half-depth of |S21|^2, splits the losses from the dip depth,
    and estimates the electric delay from the off-resonant wing phase
    (including a 1/detuning term so the resonance's own wing phase does not
    leak into the delay).

    Raises
    ------
    NoResonanceError
        If no dip at least 3 sigma below the baseline median exists.
    """
    freqs = trace.freqs
    mag = np.abs(trace.s21)
    n = mag.size
    wings = _wing_indices(n)

    baseline = float(np.median(mag[wings]))
    if baseline <= 0:
        raise NoResonanceError("baseline magnitude is zero")
    sigma = _noise_sigma(mag, wings)

    # Light smoothing so single noisy points do not pose as dips.
    kernel = min(5, n // 4 * 2 + 1)
    smooth = np.convolve(mag, np.ones(kernel) / kernel, mode="same") if kernel >= 3 else mag
    dip_idx = int(np.argmin(smooth))
    lo_r, hi_r = max(dip_idx - kernel, 0), min(dip_idx + kernel + 1, n)
    dip_idx = lo_r + int(np.argmin(mag[lo_r:hi_r]))
    dip_mag = float(mag[dip_idx])

    depth = baseline - dip_mag
    if depth < _MIN_DIP_SIGMA * sigma or depth <= 1e-9 * baseline:
        raise NoResonanceError(
            f"deepest point is {depth:.3g} below baseline, "
            f"need > {_MIN_DIP_SIGMA} * sigma = {_MIN_DIP_SIGMA * sigma:.3g}")

    f_r = float(freqs[dip_idx])

    # Full width at half depth of |S21|^2 equals the loaded linewidth.
    half_power = 0.5 * (dip_mag**2 + baseline**2)
    below = mag**2 <= half_power
    lo = dip_idx
    while lo > 0 and below[lo - 1]:
        lo -= 1
    hi = dip_idx
    while hi < n - 1 and below[hi + 1]:
        hi += 1
    width = float(freqs[hi] - freqs[lo])
    min_width = 2.0 * float(np.min(np.diff(freqs)))
    width = max(width, min_width)
    total_loss = width / f_r

    rel_depth = min(max(dip_mag / baseline, 1e-3), 1.0 - 1e-3)
    internal_loss = rel_depth * total_loss
    coupling_loss = (1.0 - rel_depth) * total_loss

    # Wing phase: 2*pi*t_d*f + phi + (resonator tail ~ 1/detuning).
    phase = np.unwrap(np.angle(trace.s21))
    f_mean = float(np.mean(freqs))
    dt_wings = (freqs[wings] - f_r) / (f_r * total_loss)
    design = np.column_stack([
        np.ones(wings.size),
        freqs[wings] - f_mean,
        1.0 / np.where(np.abs(dt_wings) < 0.5, np.sign(dt_wings + 1e-300) * 0.5, dt_wings),
    ])
    coeff, *_ = np.linalg.lstsq(design, phase[wings], rcond=None)
    electric_delay = float(coeff[1]) / TWO_PI
    phase_offset = float(coeff[0]) - TWO_PI * electric_delay * f_mean
    phase_offset = math.remainder(phase_offset, TWO_PI)

    return LinearParams(
        amplitude=baseline,
        electric_delay=electric_delay,
        phase_offset=phase_offset,
        fano_asymmetry=0.0,
        resonant_freq=f_r,
        internal_loss=min(max(internal_loss, 1e-12), 0.5),
        coupling_loss=min(max(coupling_loss, 1e-12), 0.5),
    )


_PARAM_NAMES = ["amplitude", "electric_delay", "phase_offset", "fano_asymmetry",
                "resonant_freq", "internal_loss", "coupling_loss"]


def _params_to_vector(p: LinearParams) -> np.ndarray:
    return np.array([p.amplitude, p.electric_delay, p.phase_offset,
                     p.fano_asymmetry, p.resonant_freq, p.internal_loss,
                     p.coupling_loss])


def _vector_to_params(x: np.ndarray) -> LinearParams:
    return LinearParams(amplitude=x[0], electric_delay=x[1], phase_offset=x[2],
                        fano_asymmetry=x[3], resonant_freq=x[4],
                        internal_loss=x[5], coupling_loss=x[6])


def _linear_bounds(trace: FrequencyTrace) -> tuple[np.ndarray, np.ndarray]:
    span = float(trace.freqs[-1] - trace.freqs[0])
    f_lo = float(trace.freqs[0]) - 0.25 * span
    f_hi = float(trace.freqs[-1]) + 0.25 * span
    lower = np.array([1e-12, -np.inf, -np.inf, -(np.pi / 2 - 1e-9), f_lo, 1e-12, 1e-12])
    upper = np.array([np.inf, np.inf, np.inf, np.pi / 2 - 1e-9, f_hi,
                      1.0 - 1e-12, 1.0 - 1e-12])
    return lower, upper


def _linear_scales(x0: np.ndarray, trace: FrequencyTrace) -> np.ndarray:
    span = float(trace.freqs[-1] - trace.freqs[0])
    linewidth = max(x0[4] * (x0[5] + x0[6]), span / 100.0)
    return np.array([x0[0], 1.0 / (TWO_PI * span), 1.0, 0.3,
                     linewidth, x0[5], x0[6]])


def _residual_autocorr(resid: np.ndarray) -> float:
    power = float(np.sum(np.abs(resid) ** 2))
    if power == 0:
        return 0.0
    return float(np.abs(np.sum(resid[:-1] * np.conj(resid[1:]))) / power)


def fit_linear(trace: FrequencyTrace, guess: LinearParams | None = None,
               max_iterations: int = 200) -> FitReport:
    """Least-squares fit of the linear hanger model to one trace.

    ``guess`` defaults to :func:`estimate_initial`.  ``converged`` is False
    when the iteration budget is exhausted or the solution sits outside the
    parameter domain.

    Raises
    ------
    ParameterError
        Fewer than 10 points (under-determined for 7 parameters).
    NoResonanceError
        Propagated from the initial estimate.
    SingularJacobianError
        Degenerate data, e.g. all points identical.
    """
    if len(trace) < 10:
        raise ParameterError("need >= 10 points to fit 7 parameters")
    if np.ptp(trace.s21.real) == 0.0 and np.ptp(trace.s21.imag) == 0.0:
        raise SingularJacobianError("trace is constant; nothing to fit")
    if guess is None:
        guess = estimate_initial(trace)

    x0 = _params_to_vector(guess)
    lower, upper = _linear_bounds(trace)
    x0 = np.minimum(np.maximum(x0, lower + 0.0), upper)
    scales = _linear_scales(x0, trace)
    data = trace.s21
    f_center = float(np.mean(trace.freqs))

    # Two internal reparametrizations keep the problem well conditioned:
    # unit-scale variables (finite-difference steps on the raw parameters
    # would be wildly wrong, e.g. ~1e-8 s on the delay winds the phase by
    # hundreds of radians across a GHz trace), and the phase referenced to
    # the window center (the raw offset compensates 2*pi*f*t_d with f at
    # carrier scale, an extremely narrow valley).
    x0[2] = x0[2] + TWO_PI * f_center * x0[1]

    def to_params(u):
        x = u * scales
        return _vector_to_params(
            np.array([x[0], x[1],
                      math.remainder(x[2] - TWO_PI * f_center * x[1], TWO_PI),
                      x[3], x[4], x[5], x[6]]))

    def residuals(u):
        model = eval_linear_s21(to_params(u), trace.freqs)
        diff = model - data
        return np.concatenate([diff.real, diff.imag])

    max_nfev = max_iterations * (x0.size + 1)
    result = least_squares(residuals, x0 / scales,
                           bounds=(lower / scales, upper / scales), method="trf",
                           ftol=1e-14, xtol=1e-14, gtol=1e-14, max_nfev=max_nfev)

    try:
        params = to_params(result.x)
        in_domain = True
    except ParameterError:
        params = guess
        in_domain = False
    converged = bool(result.status > 0 and result.nfev < max_nfev and in_domain)

    cov_scaled = covariance_matrix(result.jac, result.fun)
    cov = cov_scaled * np.outer(scales, scales)
    # phase_offset = phi_center - 2*pi*f_center*t_d: propagate linearly.
    transform = np.eye(x0.size)
    transform[2, 1] = -TWO_PI * f_center
    cov = transform @ cov @ transform.T
    std_errors = {name: float(np.sqrt(max(cov[i, i], 0.0)))
                  for i, name in enumerate(_PARAM_NAMES)}
    n = len(trace)
    residual_rms = float(np.sqrt(np.sum(result.fun**2) / n))

    mag = np.abs(data)
    wings = _wing_indices(n)
    sigma = _noise_sigma(mag, wings)
    snr = params.amplitude / sigma if sigma > 0 else np.inf
    complex_resid = (result.fun[:n] + 1j * result.fun[n:])
    autocorr = _residual_autocorr(complex_resid)

    diagnostics = set()
    if snr < 10.0:
        diagnostics.add("low_snr")
    if autocorr > 0.5 and residual_rms > 3.0 * max(sigma, 1e-16):
        diagnostics.add("nonlinear_suspected")

    details = {
        "q_i": params.q_internal,
        "q_c": params.q_coupling,
        "q_c_raw": raw_qc(params),
        "loaded_linewidth_hz": loaded_linewidth(params),
        "snr": float(snr),
        "residual_autocorr_lag1": autocorr,
    }
    return FitReport(params=params, std_errors=std_errors, residual_rms=residual_rms,
                     n_points=n, converged=converged, diagnostics=frozenset(diagnostics),
                     details=details)


def segment_resonances(wideband: FrequencyTrace, expected: int | None = None,
                       window_linewidths: float = 10.0) -> list[FrequencyTrace]:
    """Split a wideband scan into per-resonance windows.

    Dips are detected on |S21| with a prominence threshold of 5 sigma of
    the point-to-point noise (at least 2% of the baseline); each window
    spans ``window_linewidths`` estimated linewidths centered on the dip.
    Overlapping windows are merged and their labels flagged.  Windows are
    returned in ascending frequency order.

    Raises
    ------
    SegmentationMismatchError
        If ``expected`` is given and the number of detected dips differs.
    """
    mag = np.abs(wideband.s21)
    n = mag.size
    baseline = float(np.median(mag))
    # Successive differences are immune to the slow dip structure.
    sigma = 1.4826 * float(np.median(np.abs(np.diff(mag)))) / math.sqrt(2.0)
    prominence = max(5.0 * sigma, 0.02 * baseline)

    peaks, properties = find_peaks(-mag, prominence=prominence)
    centers = [float(wideband.freqs[i]) for i in peaks]
    if expected is not None and len(peaks) != expected:
        raise SegmentationMismatchError(expected, centers)
    if len(peaks) == 0:
        return []

    step = float(np.min(np.diff(wideband.freqs)))
    min_width = 3.0 * step

    # Full width at half depth of |S21|^2 estimates the loaded linewidth.
    power = mag**2
    def half_power_width(peak_idx):
        threshold = 0.5 * (power[peak_idx] + baseline**2)
        lo = peak_idx
        while lo > 0 and power[lo - 1] <= threshold:
            lo -= 1
        hi = peak_idx
        while hi < n - 1 and power[hi + 1] <= threshold:
            hi += 1
        return float(wideband.freqs[hi] - wideband.freqs[lo])

    # Deepest dips claim their windows first.
    order = np.argsort(-properties["prominences"])
    intervals = []
    for k in order:
        center = wideband.freqs[peaks[k]]
        width = max(half_power_width(peaks[k]), min_width)
        half_span = 0.5 * window_linewidths * width
        intervals.append([center - half_span, center + half_span, False])

    intervals.sort(key=lambda iv: iv[0])
    merged: list[list] = []
    for iv in intervals:
        if merged and iv[0] <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], iv[1])
            merged[-1][2] = True
        else:
            merged.append(iv)

    windows = []
    for k, (f_lo, f_hi, was_merged) in enumerate(merged):
        sel = (wideband.freqs >= f_lo) & (wideband.freqs <= f_hi)
        idx = np.nonzero(sel)[0]
        if idx.size < 8:
            mid = int(np.clip(np.searchsorted(wideband.freqs, 0.5 * (f_lo + f_hi)), 4, n - 4))
            idx = np.arange(mid - 4, mid + 4)
        label = f"{wideband.label}/window{k}" + ("+merged" if was_merged else "")
        windows.append(FrequencyTrace(
            freqs=wideband.freqs[idx], s21=wideband.s21[idx],
            instrument_power=wideband.instrument_power,
            attenuation=wideband.attenuation,
            temperature=wideband.temperature, label=label))
    return windows
