"""Assembly of P(E_kin, t) over configured grids and its serialization.

The sRICD and ICD electron lines live in disjoint kinetic-energy windows,
so each grid carries a single channel; the competing-channel electrons
(~26 eV) are reported as a constant in the metadata and never simulated.
Probabilities are |amplitude|^2 in arbitrary units, exactly linear in the
pulse intensity.

CSV layout: ``# key = value`` header lines echoing the resolved config,
then one row with the energy axis, then one row per time step
``t, P(e_1,t), ..., P(e_n,t)``.  Floats are written as their shortest
round-trip decimal so identical configs produce byte-identical files.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .params import GridSpec, IrQuench, ModelSystem, SimulationConfig, XuvPulse
from .quench import IcdEvaluator, SricdEvaluator
from .units import ev_to_au, fs_to_au

CHANNELS = ("sricd", "icd")


@dataclass(frozen=True)
class SpectrumGrid:
    """Rectangular (E_kin, t) lattice of probabilities for one channel."""

    e_axis: np.ndarray          # kinetic energies, eV, strictly increasing
    t_axis: np.ndarray          # times, fs, strictly increasing
    values: np.ndarray          # shape (len(t_axis), len(e_axis)), >= 0
    channel: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (len(self.t_axis), len(self.e_axis)):
            raise ValueError(
                f"values shape {self.values.shape} does not match axes "
                f"({len(self.t_axis)}, {len(self.e_axis)})"
            )
        if len(self.e_axis) == 0 or len(self.t_axis) == 0:
            raise ValueError("axes must be non-empty")
        if np.any(np.diff(self.e_axis) <= 0) or np.any(np.diff(self.t_axis) <= 0):
            raise ValueError("axes must be strictly increasing")
        if np.any(self.values < 0.0):
            raise ValueError("probabilities must be non-negative")


def channel_for_energy(e_kin_ev: float, grid: GridSpec) -> str | None:
    """Which channel window contains this kinetic energy, if any."""
    lo, hi = grid.sricd_window_ev
    if lo <= e_kin_ev <= hi:
        return "sricd"
    lo, hi = grid.icd_window_ev
    if lo <= e_kin_ev <= hi:
        return "icd"
    return None


def probability(e_kin_ev: float, t_fs: float, sys: ModelSystem, pulse: XuvPulse,
                quench: IrQuench | None = None,
                grid: GridSpec = GridSpec()) -> float:
    """|channel amplitude|^2 at one point; zero outside every channel window."""
    channel = channel_for_energy(e_kin_ev, grid)
    if channel is None:
        return 0.0
    e_au = ev_to_au(e_kin_ev)
    t_au = fs_to_au(t_fs)
    if channel == "sricd":
        amp = SricdEvaluator(sys, pulse, quench, np.array([e_au])).amplitude(t_au)
    else:
        if quench is None or not quench.enabled:
            return 0.0
        amp = IcdEvaluator(sys, pulse, quench, np.array([e_au])).amplitude(t_au)
    return float(abs(amp[0]) ** 2)


def voigt_reference(e_kin_ev, sys: ModelSystem, pulse: XuvPulse):
    """Interference-free line-shape reference for the sRICD channel.

    exp[-sigma^2 (Sig - Omega)^2] / [(Sig - E_R)^2 + Gamma_R^2/4] with
    Sig = E_kin + E_fin, unnormalized; a pulse-bandwidth Gaussian over a
    decay-width Lorentzian.
    """
    e_au = np.asarray(ev_to_au(np.asarray(e_kin_ev, dtype=float)))
    sig = e_au + sys.sricd.e_fin_au
    gauss = np.exp(-(pulse.sigma_au ** 2) * (sig - pulse.omega_au) ** 2)
    lor = (sig - sys.sricd.e_r_au) ** 2 + sys.gamma_r_au ** 2 / 4.0
    out = gauss / lor
    return float(out) if out.ndim == 0 else out


def _energy_axis(window_ev: tuple[float, float], de_ev: float) -> np.ndarray:
    lo, hi = window_ev
    n = int(math.floor((hi - lo) / de_ev + 1e-9)) + 1
    return lo + de_ev * np.arange(n)


def _time_axis(grid: GridSpec) -> np.ndarray:
    n = int(math.floor((grid.t_max_fs - grid.t_min_fs) / grid.dt_fs + 1e-9)) + 1
    return grid.t_min_fs + grid.dt_fs * np.arange(n)


def _grid_metadata(config: SimulationConfig, channel: str) -> dict:
    md = {"version": __version__, "channel": channel}
    md.update({k: v for k, v in config.echo})
    md["pricd_ai_electron_ev"] = repr(config.system.other.electron_ev)
    md["tau_eff_fs"] = repr(config.system.tau_eff_fs)
    return md


def _rows_for_channel(args) -> np.ndarray:
    config, channel, e_axis_ev, t_chunk_fs = args
    sys, pulse, quench = config.system, config.pulse, config.quench
    e_au = ev_to_au(np.asarray(e_axis_ev))
    quench_eff = quench if quench.enabled else None
    if channel == "sricd":
        ev = SricdEvaluator(sys, pulse, quench_eff, e_au)
    else:
        ev = IcdEvaluator(sys, pulse, quench, e_au)
    out = np.empty((len(t_chunk_fs), len(e_axis_ev)))
    for i, t_fs in enumerate(t_chunk_fs):
        t_au = fs_to_au(float(t_fs))
        if channel == "sricd" and t_au < -pulse.half_window_au:
            out[i] = 0.0
        elif channel == "icd" and not quench.enabled:
            out[i] = 0.0
        else:
            out[i] = np.abs(ev.amplitude(t_au)) ** 2
    return out


def simulate_grid(config: SimulationConfig, workers: int = 1) -> dict[str, SpectrumGrid]:
    """Evaluate both channel grids; deterministic for a given config.

    ``workers > 1`` splits the time axis across processes; chunks are
    reassembled in order, so the result does not depend on the worker count.
    """
    t_axis = _time_axis(config.grid)
    out: dict[str, SpectrumGrid] = {}
    for channel in CHANNELS:
        window = config.grid.sricd_window_ev if channel == "sricd" \
            else config.grid.icd_window_ev
        e_axis = _energy_axis(window, config.grid.de_ev)
        if workers <= 1:
            values = _rows_for_channel((config, channel, e_axis, t_axis))
        else:
            chunks = np.array_split(t_axis, workers)
            chunks = [c for c in chunks if len(c)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(
                    _rows_for_channel,
                    [(config, channel, e_axis, c) for c in chunks],
                ))
            values = np.vstack(parts)
        out[channel] = SpectrumGrid(
            e_axis=e_axis, t_axis=t_axis, values=values, channel=channel,
            metadata=_grid_metadata(config, channel),
        )
    return out


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_csv(grid: SpectrumGrid, path) -> None:
    try:
        with open(path, "w") as fh:
            for key, value in grid.metadata.items():
                fh.write(f"# {key} = {value}\n")
            fh.write("e_kin_ev," + ",".join(repr(float(e)) for e in grid.e_axis)
                     + "\n")
            for t, row in zip(grid.t_axis, grid.values):
                fh.write(repr(float(t)) + ","
                         + ",".join(repr(float(v)) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write spectrum CSV {path}: {exc}") from exc


def read_csv(path) -> SpectrumGrid:
    metadata: dict = {}
    e_axis = None
    times = []
    rows = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        k, v = body.split("=", 1)
                        metadata[k.strip()] = v.strip()
                    continue
                cells = line.split(",")
                if e_axis is None:
                    if cells[0] != "e_kin_ev":
                        raise ValueError(
                            f"{path}: expected energy-axis row, got {cells[0]!r}")
                    e_axis = np.array([float(c) for c in cells[1:]])
                else:
                    times.append(float(cells[0]))
                    rows.append([float(c) for c in cells[1:]])
    except OSError as exc:
        raise OSError(f"cannot read spectrum CSV {path}: {exc}") from exc
    if e_axis is None or not rows:
        raise ValueError(f"{path}: no spectrum data found")
    return SpectrumGrid(e_axis=e_axis, t_axis=np.array(times),
                        values=np.array(rows),
                        channel=metadata.get("channel", "unknown"),
                        metadata=metadata)


def write_frames(grid: SpectrumGrid, directory, stem: str | None = None) -> list:
    """One CSV per time step (zero-padded index): energy, probability rows."""
    import os

    stem = stem or grid.channel
    os.makedirs(directory, exist_ok=True)
    width = max(6, len(str(len(grid.t_axis))))
    paths = []
    for i, (t, row) in enumerate(zip(grid.t_axis, grid.values)):
        path = os.path.join(directory, f"{stem}_{i:0{width}d}.csv")
        with open(path, "w") as fh:
            fh.write(f"# channel = {grid.channel}\n")
            fh.write(f"# t_fs = {float(t)!r}\n")
            fh.write("e_kin_ev,probability\n")
            for e, v in zip(grid.e_axis, row):
                fh.write(f"{float(e)!r},{float(v)!r}\n")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# SVG heatmap
# ---------------------------------------------------------------------------

# fixed five-stop colormap (dark blue -> purple -> rose -> orange -> yellow)
_STOPS = np.array([
    (0.00, 13, 8, 135),
    (0.25, 126, 3, 168),
    (0.50, 204, 71, 120),
    (0.75, 248, 149, 64),
    (1.00, 240, 249, 33),
])


def _color(u: float) -> str:
    u = min(max(u, 0.0), 1.0)
    pos = _STOPS[:, 0]
    i = int(np.searchsorted(pos, u, side="right")) - 1
    i = min(max(i, 0), len(_STOPS) - 2)
    f = (u - pos[i]) / (pos[i + 1] - pos[i])
    rgb = (1 - f) * _STOPS[i, 1:] + f * _STOPS[i + 1, 1:]
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


def _pool(values: np.ndarray, max_rows: int, max_cols: int) -> np.ndarray:
    nt, ne = values.shape
    rt = max(1, int(math.ceil(nt / max_rows)))
    re_ = max(1, int(math.ceil(ne / max_cols)))
    nt2, ne2 = nt - nt % rt, ne - ne % re_
    pooled = values[:nt2, :ne2].reshape(nt2 // rt, rt, ne2 // re_, re_).mean(axis=(1, 3))
    return pooled


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    raw = np.linspace(lo, hi, n)
    return [float(f"{v:.4g}") for v in raw]


def write_heatmap_svg(grid: SpectrumGrid, path, max_cells: int = 200) -> None:
    """Static self-contained heatmap: time on x, energy on y, linear color."""
    pooled = _pool(grid.values, max_cells, max_cells)
    vmax = float(pooled.max()) or 1.0
    nt, ne = pooled.shape
    width, height = 800, 560
    ml, mr, mt, mb = 80, 30, 40, 60
    pw, ph = width - ml - mr, height - mt - mb
    cw, ch = pw / nt, ph / ne
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{grid.channel} spectrum '
        f'(arb. units)</text>',
    ]
    for i in range(nt):
        for j in range(ne):
            c = _color(pooled[i, j] / vmax)
            x = ml + i * cw
            y = mt + ph - (j + 1) * ch
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.3:.2f}" '
                f'height="{ch + 0.3:.2f}" fill="{c}"/>'
            )
    parts.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="black" stroke-width="1"/>'
    )
    t_lo, t_hi = float(grid.t_axis[0]), float(grid.t_axis[-1])
    e_lo, e_hi = float(grid.e_axis[0]), float(grid.e_axis[-1])
    for tv in _ticks(t_lo, t_hi):
        x = ml + (tv - t_lo) / (t_hi - t_lo or 1.0) * pw
        parts.append(f'<line x1="{x:.1f}" y1="{mt+ph}" x2="{x:.1f}" '
                     f'y2="{mt+ph+5}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{mt+ph+20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="12">{tv:g}</text>')
    for ev_ in _ticks(e_lo, e_hi):
        y = mt + ph - (ev_ - e_lo) / (e_hi - e_lo or 1.0) * ph
        parts.append(f'<line x1="{ml-5}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" '
                     f'stroke="black"/>')
        parts.append(f'<text x="{ml-8}" y="{y+4:.1f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="12">{ev_:g}</text>')
    parts.append(f'<text x="{ml+pw/2:.1f}" y="{height-15}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="14">t (fs)</text>')
    parts.append(f'<text x="20" y="{mt+ph/2:.1f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="14" '
                 f'transform="rotate(-90 20 {mt+ph/2:.1f})">E_kin (eV)</text>')
    parts.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write SVG {path}: {exc}") from exc
