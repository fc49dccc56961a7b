"""Physical parameters of the model system, pulses and grids.

Holds the decaying-state data (energies, lifetimes, derived widths and
continuum couplings), the exciting-pulse and quench-pulse parameters, and
the plain-text config file front end.  Everything is immutable after
construction and safe to share across workers.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources

from .units import (
    EV_PER_HARTREE,
    FS_PER_AU_TIME,
    INTENSITY_AU_WCM2,
    ev_to_au,
    fs_to_au,
)

TWO_SQRT_2LN2 = 2.0 * math.sqrt(2.0 * math.log(2.0))  # FWHM / sigma for a Gaussian


class ConfigError(ValueError):
    """Invalid or inconsistent configuration input."""


# ---------------------------------------------------------------------------
# scalar parameter algebra
# ---------------------------------------------------------------------------

def width_from_lifetime(tau_au: float) -> float:
    """Decay width Gamma = 1/tau, both in atomic units."""
    if not tau_au > 0.0:
        raise ValueError(f"lifetime must be positive, got {tau_au}")
    return 1.0 / tau_au


def coupling_from_width(gamma_au: float) -> float:
    """Continuum coupling V = sqrt(Gamma / 2 pi); inverse of Gamma = 2 pi V^2."""
    if gamma_au < 0.0:
        raise ValueError(f"width must be non-negative, got {gamma_au}")
    return math.sqrt(gamma_au / (2.0 * math.pi))


def effective_lifetime(tau_a_fs: float, tau_b_fs: float) -> float:
    """Harmonic combination 1/tau_eff = 1/tau_a + 1/tau_b (fs in, fs out).

    Either argument may be math.inf to mark an absent channel.
    """
    if not tau_a_fs > 0.0 or not tau_b_fs > 0.0:
        raise ValueError("lifetimes must be positive")
    if math.isinf(tau_a_fs):
        return tau_b_fs
    if math.isinf(tau_b_fs):
        return tau_a_fs
    return 1.0 / (1.0 / tau_a_fs + 1.0 / tau_b_fs)


def continuum_dipole_from_q(q: float, mu_rg: float, v: float) -> float:
    """Continuum dipole from the line-asymmetry parameter: mu_C = mu_RG / (q pi V)."""
    if q == 0.0:
        raise ValueError("q = 0 implies an infinite continuum dipole")
    if not v > 0.0:
        raise ValueError(f"coupling must be positive, got {v}")
    return mu_rg / (q * math.pi * v)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceChannel:
    """One decaying state / decay channel: energies, lifetime and deriveds."""

    label: str
    e_r_ev: float      # resonance energy (total, relative to the ground state)
    e_fin_ev: float    # final ionic state energy
    tau_fs: float      # partial lifetime

    def __post_init__(self):
        if not self.tau_fs > 0.0:
            raise ValueError(f"{self.label}: lifetime must be positive")
        if not self.e_r_ev > self.e_fin_ev:
            raise ValueError(
                f"{self.label}: channel closed (E_r = {self.e_r_ev} eV "
                f"<= E_fin = {self.e_fin_ev} eV)"
            )

    @property
    def e_r_au(self) -> float:
        return ev_to_au(self.e_r_ev)

    @property
    def e_fin_au(self) -> float:
        return ev_to_au(self.e_fin_ev)

    @property
    def tau_au(self) -> float:
        return fs_to_au(self.tau_fs)

    @property
    def gamma_au(self) -> float:
        return width_from_lifetime(self.tau_au)

    @property
    def coupling_au(self) -> float:
        return coupling_from_width(self.gamma_au)

    @property
    def electron_ev(self) -> float:
        """Nominal kinetic energy of the emitted electron."""
        return self.e_r_ev - self.e_fin_ev

    @property
    def electron_au(self) -> float:
        return ev_to_au(self.electron_ev)


@dataclass(frozen=True)
class ModelSystem:
    """Full parameter set: sRICD resonance, competing channel, ICD resonance.

    The sRICD resonant state decays into two continua, the sRICD final-state
    continuum (coupling V) and the shared pRICD/autoionization continuum
    (coupling W); both channels share the resonance energy.  The ICD state is
    populated only by the quench.  The ground-state energy is the zero of the
    energy axis.
    """

    sricd: ResonanceChannel
    other: ResonanceChannel
    icd: ResonanceChannel
    q: float = 10.0
    mu_rg: float = 1.0      # bound-bound dipole, arbitrary-units normalization

    def __post_init__(self):
        if self.other.e_r_ev != self.sricd.e_r_ev:
            raise ValueError(
                "sRICD and competing channel must share the resonance energy "
                f"({self.sricd.e_r_ev} != {self.other.e_r_ev} eV)"
            )
        if self.q == 0.0:
            raise ValueError("q must be nonzero")

    @property
    def gamma_r_au(self) -> float:
        """Total width of the decaying state: partial widths add."""
        return self.sricd.gamma_au + self.other.gamma_au

    @property
    def tau_eff_fs(self) -> float:
        return effective_lifetime(self.sricd.tau_fs, self.other.tau_fs)

    @property
    def mu_c_sricd(self) -> float:
        """Ground-to-continuum dipole of the sRICD channel (equal-q convention)."""
        return continuum_dipole_from_q(self.q, self.mu_rg, self.sricd.coupling_au)

    @property
    def mu_c_other(self) -> float:
        """Ground-to-continuum dipole of the competing channel (equal-q convention)."""
        return continuum_dipole_from_q(self.q, self.mu_rg, self.other.coupling_au)

    @property
    def pole_au(self) -> complex:
        """Complex energy of the decaying state, E_r - i Gamma_r/2."""
        return self.sricd.e_r_au - 0.5j * self.gamma_r_au

    @property
    def icd_pole_au(self) -> complex:
        return self.icd.e_r_au - 0.5j * self.icd.gamma_au


@dataclass(frozen=True)
class XuvPulse:
    """Exciting-pulse parameters.

    The field is a carrier at the mean photon energy under a Gaussian
    envelope of standard deviation sigma, switched on only inside the hard
    window [-T_X/2, +T_X/2] whose length is an integer number of carrier
    cycles.  sigma and T_X are independent stored quantities; with the
    bundled defaults (FWHM 6.1 fs but 50 cycles of a 47.693 eV carrier,
    i.e. T_X = 4.34 fs) the envelope is noticeably truncated at the window
    edges.  See the README for why both are kept.
    """

    omega_ev: float
    n_cycles: int = 50
    fwhm_fs: float = 6.1
    intensity_wcm2: float = 5e8

    def __post_init__(self):
        if not self.omega_ev > 0.0:
            raise ValueError("photon energy must be positive")
        if self.n_cycles < 1:
            raise ValueError("need at least one carrier cycle")
        if not self.fwhm_fs > 0.0:
            raise ValueError("FWHM must be positive")
        if not self.intensity_wcm2 > 0.0:
            raise ValueError("intensity must be positive")

    @property
    def omega_au(self) -> float:
        return ev_to_au(self.omega_ev)

    @property
    def sigma_au(self) -> float:
        return fs_to_au(self.fwhm_fs / TWO_SQRT_2LN2)

    @property
    def t_x_au(self) -> float:
        """Hard window length, n_cycles carrier periods."""
        return self.n_cycles * 2.0 * math.pi / self.omega_au

    @property
    def half_window_au(self) -> float:
        return 0.5 * self.t_x_au

    @property
    def a0x_au(self) -> float:
        """Vector-potential amplitude from the peak intensity.

        The peak field is sqrt(I / I_atomic); amplitudes are linear in it,
        so probabilities scale exactly with intensity.
        """
        return math.sqrt(self.intensity_wcm2 / INTENSITY_AU_WCM2) / self.omega_au


def pulse_from_cycles(omega_ev: float, n_cycles: int, fwhm_fs: float,
                      intensity_wcm2: float = 5e8) -> XuvPulse:
    """Build a pulse recording both the envelope width and the cycle window."""
    return XuvPulse(omega_ev=omega_ev, n_cycles=n_cycles, fwhm_fs=fwhm_fs,
                    intensity_wcm2=intensity_wcm2)


@dataclass(frozen=True)
class IrQuench:
    """Quench-pulse parameters (population transfer R -> I).

    The transfer acts inside the window [t_s - delta_t, t_s + delta_t] with
    delta_t = 2.5 sigma_ir, so the default sigma_ir = 3 fs realizes a 15 fs
    total transfer window.  alpha = 8 empties the decaying state to a
    3.5e-4 residue.
    """

    t_s_fs: float = 35.0
    sigma_ir_fs: float = 3.0
    alpha: float = 8.0
    enabled: bool = True
    n_source: int = 4000            # source-time discretization of the transfer
    mode: str = "increment"         # "increment" | "literal"
    include_source_phase: bool = True

    def __post_init__(self):
        if not self.sigma_ir_fs > 0.0:
            raise ValueError("sigma_ir must be positive")
        if self.alpha < 0.0:
            raise ValueError("alpha must be non-negative")
        if self.n_source < 8:
            raise ValueError("need at least 8 source-time steps")
        if self.mode not in ("increment", "literal"):
            raise ValueError(f"unknown quench mode {self.mode!r}")

    @property
    def t_s_au(self) -> float:
        return fs_to_au(self.t_s_fs)

    @property
    def sigma_ir_au(self) -> float:
        return fs_to_au(self.sigma_ir_fs)

    @property
    def delta_t_au(self) -> float:
        return 2.5 * self.sigma_ir_au

    @property
    def onset_au(self) -> float:
        return self.t_s_au - self.delta_t_au

    @property
    def end_au(self) -> float:
        return self.t_s_au + self.delta_t_au


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (E_kin, t) evaluation grids, one energy window per channel."""

    sricd_window_ev: tuple[float, float] = (4.3, 6.3)
    icd_window_ev: tuple[float, float] = (0.1, 1.1)
    de_ev: float = 0.002
    t_min_fs: float = -10.0
    t_max_fs: float = 400.0
    dt_fs: float = 0.25

    def __post_init__(self):
        for name, (lo, hi) in (("sricd", self.sricd_window_ev),
                               ("icd", self.icd_window_ev)):
            if not hi > lo:
                raise ValueError(f"{name} window must be increasing, got ({lo}, {hi})")
        if not self.de_ev > 0.0 or not self.dt_fs > 0.0:
            raise ValueError("grid steps must be positive")
        if not self.t_max_fs > self.t_min_fs:
            raise ValueError("time axis must be increasing")


@dataclass(frozen=True)
class SimulationConfig:
    system: ModelSystem
    pulse: XuvPulse
    quench: IrQuench
    grid: GridSpec
    echo: tuple[tuple[str, str], ...]   # resolved "section.key" -> value strings


# ---------------------------------------------------------------------------
# config file front end
# ---------------------------------------------------------------------------

_SCHEMA = {
    "system": {
        "e_res_ev": float,
        "e_fin_sricd_ev": float,
        "tau_sricd_fs": float,
        "e_fin_other_ev": float,
        "tau_other_fs": float,
        "e_icd_ev": float,
        "e_fin_icd_ev": float,
        "tau_icd_fs": float,
        "q": float,
        "mu_rg": float,
    },
    "xuv": {
        "omega_ev": float,
        "n_cycles": int,
        "fwhm_fs": float,
        "intensity_wcm2": float,
    },
    "quench": {
        "enabled": bool,
        "t_s_fs": float,
        "sigma_ir_fs": float,
        "alpha": float,
        "n_source": int,
        "mode": str,
        "include_source_phase": bool,
    },
    "grid": {
        "sricd_min_ev": float,
        "sricd_max_ev": float,
        "icd_min_ev": float,
        "icd_max_ev": float,
        "de_ev": float,
        "t_min_fs": float,
        "t_max_fs": float,
        "dt_fs": float,
    },
}

_BOOL_VALUES = {"true": True, "yes": True, "1": True, "on": True,
                "false": False, "no": False, "0": False, "off": False}


def _convert(section: str, key: str, raw: str):
    kind = _SCHEMA[section][key]
    try:
        if kind is bool:
            return _BOOL_VALUES[raw.strip().lower()]
        return kind(raw)
    except (KeyError, ValueError):
        raise ConfigError(
            f"[{section}] {key}: cannot parse {raw!r} as {kind.__name__}"
        ) from None


def _read_ini(path) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return {s: dict(cp.items(s)) for s in cp.sections()}


def default_config_text() -> str:
    """The bundled neon-dimer defaults as config-file text."""
    return resources.files("icdspec.data").joinpath("neon_dimer.cfg").read_text()


def load_config(path=None, overrides: tuple[str, ...] = ()) -> SimulationConfig:
    """Load a config file, apply ``section.key=value`` overrides, validate.

    With no path the bundled neon-dimer defaults are used.  Every key must
    belong to the schema; values are syntax- and range-checked with the
    offending key named in the error.
    """
    values = {s: {} for s in _SCHEMA}
    base = _parse_default()
    for sec, kv in base.items():
        values[sec].update(kv)
    if path is not None:
        for sec, kv in _read_ini(path).items():
            if sec not in _SCHEMA:
                raise ConfigError(f"unknown config section [{sec}]")
            for key, raw in kv.items():
                if key not in _SCHEMA[sec]:
                    raise ConfigError(f"unknown config key [{sec}] {key}")
                values[sec][key] = _convert(sec, key, raw)
    for ov in overrides:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ConfigError(
                f"override {ov!r} must have the form section.key=value"
            )
        target, raw = ov.split("=", 1)
        sec, key = target.split(".", 1)
        sec, key = sec.strip(), key.strip()
        if sec not in _SCHEMA or key not in _SCHEMA[sec]:
            raise ConfigError(f"unknown override target [{sec}] {key}")
        values[sec][key] = _convert(sec, key, raw)
    return _build(values)


def _parse_default() -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read_string(default_config_text())
    out = {}
    for sec in cp.sections():
        out[sec] = {k: _convert(sec, k, v) for k, v in cp.items(sec)}
    return out


def _build(v: dict) -> SimulationConfig:
    s = v["system"]
    try:
        sricd = ResonanceChannel("sricd", s["e_res_ev"], s["e_fin_sricd_ev"],
                                 s["tau_sricd_fs"])
        other = ResonanceChannel("pricd_ai", s["e_res_ev"], s["e_fin_other_ev"],
                                 s["tau_other_fs"])
        icd = ResonanceChannel("icd", s["e_icd_ev"], s["e_fin_icd_ev"],
                               s["tau_icd_fs"])
        system = ModelSystem(sricd=sricd, other=other, icd=icd,
                             q=s["q"], mu_rg=s["mu_rg"])
        x = v["xuv"]
        pulse = XuvPulse(omega_ev=x["omega_ev"], n_cycles=x["n_cycles"],
                         fwhm_fs=x["fwhm_fs"], intensity_wcm2=x["intensity_wcm2"])
        qv = v["quench"]
        quench = IrQuench(t_s_fs=qv["t_s_fs"], sigma_ir_fs=qv["sigma_ir_fs"],
                          alpha=qv["alpha"], enabled=qv["enabled"],
                          n_source=qv["n_source"], mode=qv["mode"],
                          include_source_phase=qv["include_source_phase"])
        g = v["grid"]
        grid = GridSpec(sricd_window_ev=(g["sricd_min_ev"], g["sricd_max_ev"]),
                        icd_window_ev=(g["icd_min_ev"], g["icd_max_ev"]),
                        de_ev=g["de_ev"], t_min_fs=g["t_min_fs"],
                        t_max_fs=g["t_max_fs"], dt_fs=g["dt_fs"])
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    echo = tuple(
        (f"{sec}.{key}", repr(v[sec][key]) if isinstance(v[sec][key], str)
         else str(v[sec][key]))
        for sec in _SCHEMA for key in _SCHEMA[sec]
    )
    return SimulationConfig(system=system, pulse=pulse, quench=quench,
                            grid=grid, echo=echo)


def default_config() -> SimulationConfig:
    return load_config(None)
