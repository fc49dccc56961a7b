"""Unit conversions between eV/fs (I/O) and Hartree atomic units (internal).

All physics modules work in atomic units; energies and times cross this
boundary exactly once, on input and output.
"""

EV_PER_HARTREE = 27.211386245988       # CODATA 2018
FS_PER_AU_TIME = 0.024188843265857     # CODATA 2018
INTENSITY_AU_WCM2 = 3.50944758e16      # atomic unit of intensity in W/cm^2


def ev_to_au(energy_ev: float) -> float:
    return energy_ev / EV_PER_HARTREE


def au_to_ev(energy_au: float) -> float:
    return energy_au * EV_PER_HARTREE


def fs_to_au(time_fs: float) -> float:
    return time_fs / FS_PER_AU_TIME


def au_to_fs(time_au: float) -> float:
    return time_au * FS_PER_AU_TIME
