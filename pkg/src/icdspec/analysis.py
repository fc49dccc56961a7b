"""Time-domain and line-shape analysis of simulated spectra.

A detuned continuum energy beats against the decaying state, so the signal
at fixed kinetic energy oscillates as

    cos[(E_r - E_kin - E_fin) t] exp(-Gamma_r t / 2)

and the heights of its maxima decay with the state's lifetime.  Fitting
``a exp[-(t - b)/(2 d)] + c`` to those maxima estimates the lifetime d;
the leading maxima are biased by faster ``exp(-Gamma_r t)`` pieces of the
probability and are flagged for omission.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ResonanceChannel
from .units import au_to_fs, ev_to_au, fs_to_au


class InsufficientMaximaError(ValueError):
    """Trace has too few local maxima for period or lifetime analysis."""


class FitConvergenceError(RuntimeError):
    """Nonlinear fit stalled; carries the last iterate for diagnostics."""

    def __init__(self, message: str, last_params: tuple, residual_norm: float):
        super().__init__(message)
        self.last_params = last_params
        self.residual_norm = residual_norm


class LineMetricsError(ValueError):
    """Energy slice is not a clean single-peaked line."""


def oscillation_reference(e_kin_ev: float, t_fs: float,
                          channel: ResonanceChannel) -> float:
    """Reference beat cos[(E_r - E_kin - E_fin) t] exp(-Gamma t / 2)."""
    detune = channel.e_r_au - ev_to_au(e_kin_ev) - channel.e_fin_au
    t_au = fs_to_au(t_fs)
    return math.cos(detune * t_au) * math.exp(-0.5 * channel.gamma_au * t_au)


def oscillation_period_fs(e_kin_ev: float, channel: ResonanceChannel) -> float:
    """Beat period 2 pi / |detuning|; infinite exactly on resonance."""
    detune = channel.e_r_au - ev_to_au(e_kin_ev) - channel.e_fin_au
    if detune == 0.0:
        return math.inf
    return au_to_fs(2.0 * math.pi / abs(detune))


@dataclass(frozen=True)
class Maxima:
    """Local maxima of a trace, parabolic-refined, with leading-bias flags."""

    times: np.ndarray
    values: np.ndarray
    n_flagged_leading: int

    def __len__(self):
        return len(self.times)


def extract_maxima(times, values, flag_threshold: float = 0.1) -> Maxima:
    """Interior local maxima via the three-point test, refined by parabola.

    The trace should sample at least ~8 points per expected beat period.
    Leading maxima still inside the fast-decay region (where the squared
    resonance amplitude has not yet died off) are counted by
    ``n_flagged_leading``: after a rough envelope fit, maximum k is flagged
    while exp[-(t_k - t_0)/d_rough] stays above ``flag_threshold``.  Fewer
    than 3 maxima raise :class:`InsufficientMaximaError`.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape:
        raise ValueError("times and values must be 1-D and congruent")
    if np.any(np.diff(t) <= 0.0):
        raise ValueError("times must be strictly increasing")
    interior = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])
    idx = np.nonzero(interior)[0] + 1
    if len(idx) < 3:
        raise InsufficientMaximaError(
            f"found {len(idx)} local maxima; need at least 3"
        )
    tm = np.empty(len(idx))
    vm = np.empty(len(idx))
    for k, i in enumerate(idx):
        y0, y1, y2 = v[i - 1], v[i], v[i + 1]
        curv = y0 - 2.0 * y1 + y2
        if curv < 0.0:
            shift = 0.5 * (y0 - y2) / curv
            h = 0.5 * (t[i + 1] - t[i - 1])
            tm[k] = t[i] + shift * h
            vm[k] = y1 - 0.25 * (y0 - y2) * shift
        else:
            tm[k], vm[k] = t[i], y1
    n_flagged = 1
    if len(tm) >= 4:
        try:
            rough = fit_lifetime(Maxima(tm, vm, 0), omit_leading=1)
            decay = np.exp(-(tm - tm[0]) / max(rough.d, 1e-12))
            n_flagged = int(np.sum(decay > flag_threshold))
            n_flagged = max(1, min(n_flagged, len(tm) - 3))
        except (FitConvergenceError, InsufficientMaximaError):
            n_flagged = 1
    return Maxima(times=tm, values=vm, n_flagged_leading=n_flagged)


@dataclass(frozen=True)
class LifetimeFit:
    """Parameters of a exp[-(t-b)/(2d)] + c fitted to oscillation maxima."""

    a: float
    b: float
    c: float
    d: float
    residual_norm: float
    maxima_used: int
    omitted_leading: int


def fit_lifetime(maxima: Maxima, omit_leading: int = 1,
                 d0: float | None = None, max_iter: int = 200) -> LifetimeFit:
    """Least-squares fit of the maxima envelope a exp[-(t-b)/(2d)] + c.

    Damped Gauss-Newton with the analytic Jacobian in (a, c, d); b is
    pinned to the first used maximum time, which removes the exact (a, b)
    degeneracy of the model.  Initial values: a from the first-to-last
    drop, c from the last maximum, d from ``d0`` (defaults to a third of
    the fitted span).  Scaling the ordinates rescales (a, c) and leaves d
    unchanged.
    """
    if omit_leading < 0:
        raise ValueError("omit_leading must be non-negative")
    t = np.asarray(maxima.times, dtype=float)[omit_leading:]
    y = np.asarray(maxima.values, dtype=float)[omit_leading:]
    if len(t) < 3:
        raise InsufficientMaximaError(
            f"{len(t)} maxima left after omitting {omit_leading}; need >= 3"
        )
    b = float(t[0])
    a = float(y[0] - y[-1]) or float(abs(y[0])) or 1.0
    c = float(y[-1])
    d = float(d0) if d0 else max((t[-1] - t[0]) / 3.0, 1e-6)
    lam = 1e-3
    scale = max(np.max(np.abs(y)), 1e-300)

    def residual(a, c, d):
        return a * np.exp(-(t - b) / (2.0 * d)) + c - y

    r = residual(a, c, d)
    cost = float(r @ r)
    for _ in range(max_iter):
        expf = np.exp(-(t - b) / (2.0 * d))
        jac = np.column_stack([
            expf,                                  # d/da
            np.ones_like(t),                       # d/dc
            a * expf * (t - b) / (2.0 * d * d),    # d/dd
        ])
        g = jac.T @ r
        h = jac.T @ jac
        for _ in range(60):
            step = np.linalg.solve(h + lam * np.diag(np.diag(h) + 1e-30), -g)
            a2, c2, d2 = a + step[0], c + step[1], d + step[2]
            if d2 <= 0.0:
                lam *= 10.0
                continue
            r2 = residual(a2, c2, d2)
            cost2 = float(r2 @ r2)
            if cost2 <= cost:
                break
            lam *= 10.0
        else:
            raise FitConvergenceError(
                "damping saturated without cost decrease",
                last_params=(a, b, c, d), residual_norm=math.sqrt(cost),
            )
        moved = np.max(np.abs(step) / (np.abs([a2, c2, d2]) + scale * 1e-12))
        a, c, d, r, cost = a2, c2, d2, r2, cost2
        lam = max(lam * 0.3, 1e-12)
        if moved < 1e-12:
            break
    else:
        raise FitConvergenceError(
            f"no convergence within {max_iter} iterations",
            last_params=(a, b, c, d), residual_norm=math.sqrt(cost),
        )
    if not d > 0.0:
        raise FitConvergenceError("converged to non-positive lifetime",
                                  last_params=(a, b, c, d),
                                  residual_norm=math.sqrt(cost))
    return LifetimeFit(a=a, b=b, c=c, d=d, residual_norm=math.sqrt(cost),
                       maxima_used=len(t), omitted_leading=omit_leading)


def measured_period_fs(maxima: Maxima, omit_leading: int = 0) -> float:
    """Mean spacing of successive maxima."""
    t = maxima.times[omit_leading:]
    if len(t) < 2:
        raise InsufficientMaximaError("need >= 2 maxima to measure a period")
    return float(np.mean(np.diff(t)))


@dataclass(frozen=True)
class LineMetrics:
    fwhm_ev: float
    peak_ev: float
    asymmetry: float


def line_metrics(e_ev, p) -> LineMetrics:
    """FWHM, refined peak position and area asymmetry of a single line.

    FWHM by linear interpolation at half maximum (outermost crossings);
    more than one crossing pair means the slice is not single-peaked and
    raises :class:`LineMetricsError`.  Asymmetry is the area difference
    above/below the peak within +-5 FWHM over the total area there.
    """
    e = np.asarray(e_ev, dtype=float)
    y = np.asarray(p, dtype=float)
    if e.ndim != 1 or e.shape != y.shape or len(e) < 5:
        raise ValueError("need congruent 1-D arrays with >= 5 samples")
    if np.any(np.diff(e) <= 0.0):
        raise ValueError("energies must be strictly increasing")
    i_max = int(np.argmax(y))
    ymax, ymin = float(y[i_max]), float(np.min(y))
    if ymax <= 0.0 or (ymax - ymin) < 1e-12 * abs(ymax):
        raise LineMetricsError("flat input, no line to measure")
    if i_max == 0 or i_max == len(y) - 1:
        raise LineMetricsError("peak sits on the slice boundary")
    half = 0.5 * ymax
    above = y >= half
    crossings = np.nonzero(np.diff(above.astype(int)) != 0)[0]
    if len(crossings) != 2:
        raise LineMetricsError(
            f"{len(crossings)} half-maximum crossings; expected a single peak"
        )

    def cross(i):
        f = (half - y[i]) / (y[i + 1] - y[i])
        return e[i] + f * (e[i + 1] - e[i])

    e_lo, e_hi = cross(crossings[0]), cross(crossings[1])
    fwhm = e_hi - e_lo
    # parabolic peak refinement
    y0, y1, y2 = y[i_max - 1 : i_max + 2]
    denom = y0 - 2.0 * y1 + y2
    peak = float(e[i_max])
    if denom < 0.0:
        peak += 0.5 * (y0 - y2) / denom * 0.5 * (e[i_max + 1] - e[i_max - 1])
    lo, hi = peak - 5.0 * fwhm, peak + 5.0 * fwhm
    sel = (e >= lo) & (e <= hi)
    if np.sum(sel) < 5:
        raise LineMetricsError("too few samples within +-5 FWHM of the peak")
    es, ys = e[sel], y[sel]
    total = np.trapezoid(ys, es)
    above_area = np.trapezoid(np.where(es >= peak, ys, 0.0), es)
    below_area = total - above_area
    if total <= 0.0:
        raise LineMetricsError("non-positive total area")
    return LineMetrics(fwhm_ev=float(fwhm), peak_ev=float(peak),
                       asymmetry=float((above_area - below_area) / total))
