"""Material/drive parameters, closed-form adiabaticity parameters and the
five-regime classifier.

All quantities are dimensionless or in {eV, fs, nm, e} units.  The report
collects every parameter needed to place one working point on the
(gamma, M) plane:

    gamma   = omega*Delta / (2*v_F*e*E0)       Keldysh adiabaticity
    M       = Delta / (hbar*omega)             gap in photon energies
    z_R     = 2*Omega_R / omega                resonant adiabaticity
    delta_LZ = Delta^2 / (8*hbar*v_F*e*E0)     Landau-Zener adiabaticity
    P_LZ    = exp(-2*pi*delta_LZ)              single-passage transfer
    Omega_R = v_F*e*E0 / (hbar*omega)          Rabi frequency
    a0      = v_F / (gamma*c)                  normalized vector potential
"""

import math
from dataclasses import dataclass
from enum import Enum

from .constants import CONST


class Regime(Enum):
    PERTURBATIVE_MULTIPHOTON = "PerturbativeMultiphoton"
    IMPULSIVE_LZ = "ImpulsiveLZ"
    NON_IMPULSIVE_LZ = "NonImpulsiveLZ"
    ADIABATIC = "Adiabatic"
    ADIABATIC_IMPULSIVE_LZS = "AdiabaticImpulsiveLZS"


@dataclass(frozen=True)
class MaterialSpec:
    """Two-band linear crossing: gap Delta (eV) and Fermi velocity (nm/fs)."""

    gap: float
    fermi_velocity: float

    def __post_init__(self):
        if self.gap < 0:
            raise ValueError(f"gap must be >= 0, got {self.gap}")
        if self.fermi_velocity <= 0:
            raise ValueError(
                f"fermi_velocity must be > 0, got {self.fermi_velocity}"
            )


@dataclass(frozen=True)
class DriveParams:
    """Monochromatic drive: photon energy hbar*omega (eV), peak field E0 (V/nm)."""

    photon_energy: float
    peak_field: float

    def __post_init__(self):
        if self.photon_energy <= 0:
            raise ValueError(
                f"photon_energy must be > 0, got {self.photon_energy}"
            )
        if self.peak_field <= 0:
            raise ValueError(f"peak_field must be > 0, got {self.peak_field}")

    @property
    def omega(self) -> float:
        """Angular frequency in 1/fs."""
        return self.photon_energy / CONST.hbar


@dataclass(frozen=True)
class RegimeThresholds:
    """Boundaries of the regime cascade; the defaults trace the map's dashed
    lines (gamma = 1, z_R = 1) with a P_LZ band [p_lo, p_hi] separating the
    impulsive, adiabatic, and mixed strong-field regimes."""

    gamma_boundary: float = 1.0
    z_r_boundary: float = 1.0
    p_hi: float = 0.9
    p_lo: float = 0.1
    relativistic_gamma: float = 0.007


@dataclass(frozen=True)
class AdiabaticityReport:
    gamma: float
    m_photon: float
    z_r: float
    delta_lz: float
    p_lz: float
    rabi_freq: float
    transition_time: float
    sweep_rate: float
    eff_mass: float
    a0: float
    regime: Regime
    relativistic_flag: bool


def classify_regime(gamma: float, z_r: float, p_lz: float,
                    thresholds: RegimeThresholds = RegimeThresholds()) -> Regime:
    """Total decision cascade over the (gamma, M) plane.

    gamma >= 1 is perturbative regardless of the other parameters; below
    that, z_R < 1 means the interband transition does not fit into one
    optical cycle (non-impulsive), and otherwise P_LZ decides between
    impulsive (P high), adiabatic (P low) and the mixed LZS band.
    """
    if gamma >= thresholds.gamma_boundary:
        return Regime.PERTURBATIVE_MULTIPHOTON
    if z_r < thresholds.z_r_boundary:
        return Regime.NON_IMPULSIVE_LZ
    if p_lz >= thresholds.p_hi:
        return Regime.IMPULSIVE_LZ
    if p_lz <= thresholds.p_lo:
        return Regime.ADIABATIC
    return Regime.ADIABATIC_IMPULSIVE_LZS


def relativistic_boundary(gamma: float,
                          threshold: float = RegimeThresholds.relativistic_gamma) -> bool:
    """True iff gamma < threshold (strict); flags where the magnetic field
    component can no longer be neglected.  Downstream maps still compute but
    carry a validity warning."""
    return gamma < threshold


def compute_report(mat: MaterialSpec, drive: DriveParams,
                   thresholds: RegimeThresholds = RegimeThresholds()) -> AdiabaticityReport:
    """Evaluate every closed-form adiabaticity parameter for one working point."""
    hbar = CONST.hbar
    omega = drive.omega
    e_field = CONST.e * drive.peak_field
    vf = mat.fermi_velocity

    rabi = vf * e_field / (hbar * omega)
    gamma = omega * mat.gap / (2.0 * vf * e_field)
    m_photon = mat.gap / drive.photon_energy
    z_r = 2.0 * rabi / omega
    delta_lz = mat.gap**2 / (8.0 * hbar * vf * e_field)
    p_lz = math.exp(-2.0 * math.pi * delta_lz)
    a0 = vf / (gamma * CONST.c) if gamma > 0 else math.inf

    return AdiabaticityReport(
        gamma=gamma,
        m_photon=m_photon,
        z_r=z_r,
        delta_lz=delta_lz,
        p_lz=p_lz,
        rabi_freq=rabi,
        transition_time=math.pi / rabi,
        sweep_rate=2.0 * vf * e_field,
        eff_mass=mat.gap / (4.0 * vf**2),
        a0=a0,
        regime=classify_regime(gamma, z_r, p_lz, thresholds),
        relativistic_flag=relativistic_boundary(gamma, thresholds.relativistic_gamma),
    )


def specs_from_gamma_m(gamma: float, m_photon: float, photon_energy: float,
                       fermi_velocity: float) -> tuple[MaterialSpec, DriveParams]:
    """Invert (gamma, M) to a concrete (MaterialSpec, DriveParams) at fixed
    photon energy; the round trip through compute_report is exact."""
    if gamma <= 0 or m_photon <= 0:
        raise ValueError("gamma and M must be > 0 to invert")
    gap = m_photon * photon_energy
    omega = photon_energy / CONST.hbar
    peak_field = omega * gap / (2.0 * fermi_velocity * CONST.e * gamma)
    return (MaterialSpec(gap=gap, fermi_velocity=fermi_velocity),
            DriveParams(photon_energy=photon_energy, peak_field=peak_field))
