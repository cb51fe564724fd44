"""Physical constants in the {eV, fs, nm, e} unit system.

In these units an electric field in V/nm equals an energy gradient in
eV/(e*nm), velocities are nm/fs, and currents come out in e/fs.  Planck's
constant enters as the single constant HBAR below; the elementary charge
is the charge unit itself.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    """Immutable constant set shared by every module."""

    hbar: float = 0.6582119569    # eV*fs
    c: float = 299.792458         # nm/fs
    e: float = 1.0                # elementary charge (charge unit)
    gs: float = 2.0               # spin degeneracy


CONST = Constants()
