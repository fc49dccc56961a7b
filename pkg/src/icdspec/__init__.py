"""Time-resolved sRICD / ICD electron spectra with fixed nuclei.

Closed-form first-order amplitudes for the buildup of the spectator-RICD
line, its termination by a strong-field quench, the quench-initiated ICD
line, a discretized-continuum propagation cross-check, and lifetime
extraction from the time-domain beat of the signal.
"""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    GridSpec,
    IrQuench,
    ModelSystem,
    ResonanceChannel,
    SimulationConfig,
    XuvPulse,
    coupling_from_width,
    continuum_dipole_from_q,
    default_config,
    effective_lifetime,
    load_config,
    pulse_from_cycles,
    width_from_lifetime,
)
from .specfun import erf_complex, gaussian_envelope, gaussian_window_ft  # noqa: F401
from .fano import (  # noqa: F401
    FanoResonance,
    fano_quadrature_oracle,
    uf_r_cont_integral,
    uf_rr,
    uf_rr_single,
)
from .amplitude import (  # noqa: F401
    AmplitudeBreakdown,
    amplitude_numeric,
    amplitude_post_pulse,
    direct_term,
    free_phase,
    resonant_indirect_core,
    sricd_amplitude,
)
from .quench import (  # noqa: F401
    PopulationTrace,
    icd_amplitude,
    population_n0,
    population_trace,
    quenched_sricd_amplitude,
    survival_fraction,
)
from .spectrum import (  # noqa: F401
    SpectrumGrid,
    probability,
    read_csv,
    simulate_grid,
    voigt_reference,
    write_csv,
    write_heatmap_svg,
)
from .analysis import (  # noqa: F401
    LifetimeFit,
    LineMetrics,
    Maxima,
    extract_maxima,
    fit_lifetime,
    line_metrics,
    oscillation_period_fs,
    oscillation_reference,
)
