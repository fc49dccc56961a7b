"""First-order continuum amplitude of the sRICD electron.

The projection of the wavefunction on a continuum state of kinetic energy
``E_kin`` (total energy ``Sig = E_kin + E_fin``) is a sum of a direct
ionization path and a resonance-mediated part.  With the absorption-only
(rotating-wave) field

    E_abs(t') = (i A0X Omega / 2) f(t') exp(-i Omega t'),   |t'| <= T_X/2,

f the Gaussian envelope, the amplitude is

    <E|Psi(t)> = i mu_C  I_dir(t)  +  P * I_core(t),
    P = V mu_RG  - i pi V^2 mu_CsR  - i pi V W mu_Co,

where the three prefactor pieces are the resonant and the two indirect
(continuum-mediated) pathways.  For detection after the field window both
integrals close over erf:

    I_dir  -> -(A0X Omega / 2) G(Sig - Omega) exp(-i Sig t) / (i mu_C) ...
    I_core ->  (A0X Omega / 2D) [ G(Sig - Omega) exp(-i Sig t)
                                  - G(Ebar - Omega) exp(-i Ebar t) ],

with ``G`` the windowed Gaussian Fourier integral
(:func:`icdspec.specfun.gaussian_window_ft`), ``Ebar = E_r - i Gamma_r/2``
the complex pole and ``D = Ebar - Sig``.  The ``exp(-i Ebar t)`` piece
decays at ``Gamma_r/2`` in amplitude; everything else only dephases.  For
arbitrary detection times (inside the field window) the outer ``t'``
integral is done by adaptive Gauss-Legendre panels instead, with the inner
emission-time integral in closed form; both paths share the exact same
field convention and agree to quadrature accuracy after the pulse.

Energies and times are atomic units throughout; ``e_kin`` may be a scalar
or an array.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .params import ModelSystem, XuvPulse
from .specfun import gaussian_window_ft


class QuadratureError(RuntimeError):
    """Outer time quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, estimate=None, error: float = math.nan):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the outer t' integration of the general-time evaluator."""

    panel_width_sigma: float = 0.25   # panel width as a fraction of sigma
    nodes: int = 16
    tol: float = 1e-9
    max_doublings: int = 4


DEFAULT_QUAD = QuadratureSpec()


def free_phase(e_kin: float, e_fin: float, t: float, t_prime: float) -> complex:
    """Free-particle phase exp[-i (e_kin + e_fin)(t - t')], unit magnitude."""
    if t < t_prime:
        raise ValueError("free_phase requires t >= t_prime")
    return complex(np.exp(-1j * (e_kin + e_fin) * (t - t_prime)))


def prefactor_pieces(sys: ModelSystem) -> tuple[complex, complex, complex]:
    """(resonant, indirect-sRICD, indirect-other) prefactors of the core."""
    v = sys.sricd.coupling_au
    w = sys.other.coupling_au
    return (
        v * sys.mu_rg,
        -1j * math.pi * v * v * sys.mu_c_sricd,
        -1j * math.pi * v * w * sys.mu_c_other,
    )


@dataclass(frozen=True)
class AmplitudeBreakdown:
    """One amplitude split by ionization pathway; total is the plain sum."""

    direct: complex
    resonant: complex
    indirect_sricd: complex
    indirect_other: complex
    total: complex


@dataclass(frozen=True)
class PostPulseParts:
    """Per-energy coefficients of the two post-pulse time dependencies.

    amplitude(t) = direct_coef * exp(-i Sig t)
                   + core stationary/decaying pieces as below; all arrays
    follow the shape of the e_kin input.
    """

    sig: np.ndarray            # total energies E_kin + E_fin
    pole: complex              # Ebar
    denom: np.ndarray          # D = Ebar - Sig
    g_sig: np.ndarray          # windowed FT at Sig - Omega
    g_pole: complex            # windowed FT at Ebar - Omega
    direct_coef: np.ndarray    # multiplies exp(-i Sig t)
    core_stat_coef: np.ndarray   # core piece multiplying exp(-i Sig t)
    core_dec_coef: np.ndarray    # core piece multiplying exp(-i pole t)


def post_pulse_parts(e_kin, sys: ModelSystem, pulse: XuvPulse) -> PostPulseParts:
    """Precompute every energy-dependent coefficient of the closed form."""
    e_kin = np.asarray(e_kin, dtype=float)
    sig = e_kin + sys.sricd.e_fin_au
    pole = sys.pole_au
    om = pulse.omega_au
    denom = pole - sig
    g_sig = gaussian_window_ft(sig - om, pulse.sigma_au, pulse.half_window_au)
    g_pole = gaussian_window_ft(pole - om, pulse.sigma_au, pulse.half_window_au)
    scale = pulse.a0x_au * om / 2.0
    direct_coef = -scale * sys.mu_c_sricd * g_sig
    core_stat_coef = scale * g_sig / denom
    core_dec_coef = -scale * g_pole / denom
    return PostPulseParts(sig=np.atleast_1d(sig), pole=pole,
                          denom=np.atleast_1d(denom),
                          g_sig=np.atleast_1d(np.asarray(g_sig, complex)),
                          g_pole=complex(g_pole),
                          direct_coef=np.atleast_1d(np.asarray(direct_coef, complex)),
                          core_stat_coef=np.atleast_1d(np.asarray(core_stat_coef, complex)),
                          core_dec_coef=np.atleast_1d(np.asarray(core_dec_coef, complex)))


def _require_post_pulse(t: float, pulse: XuvPulse, what: str):
    if t <= pulse.half_window_au:
        raise ValueError(
            f"{what} is valid only after the field window "
            f"(t = {t} <= T_X/2 = {pulse.half_window_au}); "
            "use amplitude_numeric inside the pulse"
        )


def direct_term(e_kin, t: float, sys: ModelSystem, pulse: XuvPulse):
    """Direct-ionization amplitude for detection after the field window.

    Magnitude is time-independent; the phase advances at the total energy.
    """
    _require_post_pulse(t, pulse, "direct_term")
    parts = post_pulse_parts(e_kin, sys, pulse)
    out = parts.direct_coef * np.exp(-1j * parts.sig * t)
    return complex(out[0]) if np.isscalar(e_kin) else out


def resonant_indirect_core(e_kin, t: float, sys: ModelSystem, pulse: XuvPulse):
    """Shared emission-time double integral of the resonance-mediated paths.

    Multiplied by each prefactor piece it yields the resonant and the two
    indirect amplitudes.  Contains one non-decaying term oscillating at the
    total energy and one term decaying at Gamma_r/2 on the pole phase.
    """
    stat, dec = core_terms(e_kin, t, sys, pulse)
    out = stat + dec
    return complex(np.atleast_1d(out)[0]) if np.isscalar(e_kin) else out


def core_terms(e_kin, t: float, sys: ModelSystem, pulse: XuvPulse):
    """(stationary, decaying) parts of the core; their sum is the core."""
    _require_post_pulse(t, pulse, "resonant_indirect_core")
    parts = post_pulse_parts(e_kin, sys, pulse)
    stat = parts.core_stat_coef * np.exp(-1j * parts.sig * t)
    dec = parts.core_dec_coef * np.exp(-1j * parts.pole * t)
    if np.isscalar(e_kin):
        return complex(stat[0]), complex(dec[0])
    return stat, dec


def amplitude_post_pulse(e_kin, t: float, sys: ModelSystem,
                         pulse: XuvPulse) -> AmplitudeBreakdown:
    """Full pathway-resolved amplitude for detection after the field window."""
    d = direct_term(e_kin, t, sys, pulse)
    core = resonant_indirect_core(e_kin, t, sys, pulse)
    p_res, p_ind_s, p_ind_o = prefactor_pieces(sys)
    resonant = p_res * core
    ind_s = p_ind_s * core
    ind_o = p_ind_o * core
    return AmplitudeBreakdown(direct=d, resonant=resonant, indirect_sricd=ind_s,
                              indirect_other=ind_o,
                              total=d + resonant + ind_s + ind_o)


def _field_abs(t_nodes: np.ndarray, pulse: XuvPulse) -> np.ndarray:
    """Absorption component of the field on the quadrature nodes."""
    env = np.exp(-t_nodes ** 2 / (2.0 * pulse.sigma_au ** 2))
    return (0.5j * pulse.a0x_au * pulse.omega_au) * env * \
        np.exp(-1j * pulse.omega_au * t_nodes)


def amplitude_numeric(e_kin, t: float, sys: ModelSystem, pulse: XuvPulse,
                      quad: QuadratureSpec = DEFAULT_QUAD):
    """Amplitude at any detection time by outer-t' quadrature.

    The excitation-time integral runs over the populated part of the field
    window [-T_X/2, min(t, T_X/2)]; the emission-time integral is closed
    form.  Converges to :func:`amplitude_post_pulse` (total) once t clears
    the window.  Raises :class:`QuadratureError` with the achieved estimate
    if panel-node doubling stalls above ``quad.tol``.
    """
    scalar = np.isscalar(e_kin)
    e_arr = np.atleast_1d(np.asarray(e_kin, dtype=float))
    lo = -pulse.half_window_au
    hi = min(t, pulse.half_window_au)
    if hi <= lo:
        out = np.zeros(e_arr.shape, complex)
        return complex(out[0]) if scalar else out

    sig = e_arr + sys.sricd.e_fin_au
    pole = sys.pole_au
    beta = sig - pole                      # = -D
    mu_c = sys.mu_c_sricd
    p_total = sum(prefactor_pieces(sys))
    n_panels = max(1, int(math.ceil((hi - lo) / (quad.panel_width_sigma * pulse.sigma_au))))
    edges = np.linspace(lo, hi, n_panels + 1)

    def evaluate(nodes: int) -> np.ndarray:
        xg, wg = leggauss(nodes)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        tp = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        wp = (half[:, None] * np.broadcast_to(wg, (n_panels, nodes))).ravel()
        ex = _field_abs(tp, pulse) * wp
        phase_sig = np.exp(1j * np.outer(sig, tp))
        s_sig = phase_sig @ ex                       # per energy
        s_pole = np.sum(ex * np.exp(1j * pole * tp))  # scalar
        core = (np.exp(1j * beta * t) * s_pole - s_sig) / (1j * beta)
        return np.exp(-1j * sig * t) * (1j * mu_c * s_sig + p_total * core)

    nodes = quad.nodes
    prev = evaluate(nodes)
    for _ in range(quad.max_doublings):
        nodes *= 2
        cur = evaluate(nodes)
        scale = np.max(np.abs(cur))
        err = np.max(np.abs(cur - prev))
        if err <= quad.tol * max(scale, 1e-300):
            return complex(cur[0]) if scalar else cur
        prev = cur
    raise QuadratureError(
        f"outer quadrature stalled at relative error {err / max(scale, 1e-300):.2e}",
        estimate=complex(cur[0]) if scalar else cur,
        error=err,
    )


def sricd_amplitude(e_kin, t: float, sys: ModelSystem, pulse: XuvPulse,
                    quad: QuadratureSpec = DEFAULT_QUAD):
    """Unquenched amplitude at any time: zero before the field, numeric
    inside it, closed form after it."""
    if t <= pulse.half_window_au:
        return amplitude_numeric(e_kin, t, sys, pulse, quad)
    parts = post_pulse_parts(e_kin, sys, pulse)
    p_total = sum(prefactor_pieces(sys))
    stat = (parts.direct_coef + p_total * parts.core_stat_coef) \
        * np.exp(-1j * parts.sig * t)
    dec = p_total * parts.core_dec_coef * np.exp(-1j * parts.pole * t)
    out = stat + dec
    return complex(out[0]) if np.isscalar(e_kin) else out
