"""Few-cycle pulse synthesis, spectral-phase dispersion, and Bloch
trajectories k(t).

The vector potential is the primary object:

    A(t) = -(E0/omega) * exp(-2 ln2 (t/tau_p)^2) * sin(omega t + cep)

with E(t) = -dA/dt.  Defining the pulse through A guarantees
A(-inf) = A(inf) = 0 and therefore a DC-free electric field; the Bloch
trajectory k(t) = k0 + (e/hbar) A(t) then returns to k0 after the pulse.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONST
from .model import MaterialSpec

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class PulseSpec:
    """Analytic pulse parameters.

    duration is the FWHM of the intensity envelope (fs); gdd (fs^2) and
    tod (fs^3) are spectral phases applied about the carrier.
    """

    photon_energy: float = 1.55
    peak_field: float = 1.0
    duration: float = 5.0
    cep: float = math.pi / 2
    gdd: float = 0.0
    tod: float = 0.0

    def __post_init__(self):
        if self.photon_energy <= 0:
            raise ValueError("photon_energy must be > 0")
        if self.peak_field <= 0:
            raise ValueError("peak_field must be > 0")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")

    @property
    def omega(self) -> float:
        return self.photon_energy / CONST.hbar

    @property
    def optical_period(self) -> float:
        return 2.0 * math.pi / self.omega

    def stretched_duration(self) -> float:
        """Estimated intensity FWHM after dispersion (Gaussian GDD broadening
        plus a TOD tail allowance)."""
        tau = self.duration
        chirp = 4.0 * _LN2 * self.gdd / tau**2
        stretched = tau * math.sqrt(1.0 + chirp * chirp)
        tod_tail = 4.0 * _LN2 * abs(self.tod) / tau**2
        return stretched + tod_tail


@dataclass(frozen=True)
class TimeGridSpec:
    """Uniform time grid; None fields resolve from the pulse.

    Defaults: span [-4, +4] stretched durations, step = optical period / 64.
    """

    t_min: float | None = None
    t_max: float | None = None
    dt: float | None = None

    def resolve(self, spec: PulseSpec) -> tuple[float, float, float]:
        half = 4.0 * spec.stretched_duration()
        t_min = -half if self.t_min is None else self.t_min
        t_max = half if self.t_max is None else self.t_max
        dt = spec.optical_period / 64.0 if self.dt is None else self.dt
        if t_max <= t_min:
            raise ValueError("empty time grid")
        if dt > spec.optical_period / 40.0:
            raise ValueError(
                f"grid step {dt:g} fs too coarse; need <= T_optical/40 = "
                f"{spec.optical_period / 40.0:g} fs"
            )
        return t_min, t_max, dt


@dataclass(frozen=True)
class SampledWaveform:
    """Vector potential and electric field on a uniform time grid."""

    t: np.ndarray   # fs
    a: np.ndarray   # V*fs/nm
    e: np.ndarray   # V/nm

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def max_wavenumber_excursion(self) -> float:
        """Peak |k - k0| reachable on this waveform, in 1/nm."""
        return float(np.max(np.abs(self.a))) * CONST.e / CONST.hbar


@dataclass(frozen=True)
class Trajectory:
    """Bloch trajectory k(t) and the detuning bias alpha(t) = 2 hbar v_F k(t)."""

    k0: float          # 1/nm
    t: np.ndarray      # fs
    k: np.ndarray      # 1/nm
    bias: np.ndarray   # eV
    waveform: SampledWaveform


def _envelope(spec: PulseSpec, t: np.ndarray) -> np.ndarray:
    return np.exp(-2.0 * _LN2 * (t / spec.duration) ** 2)


def synthesize(spec: PulseSpec, grid: TimeGridSpec = TimeGridSpec()) -> SampledWaveform:
    """Sample A(t) and the analytically differentiated E(t) on a uniform grid.

    Dispersion from spec.gdd/spec.tod is applied spectrally afterwards; the
    grid must already be long enough that the envelope at both edges is
    below 1e-8 of peak (checked here for the transform-limited pulse).
    """
    t_min, t_max, dt = grid.resolve(spec)
    n = int(round((t_max - t_min) / dt)) + 1
    t = t_min + dt * np.arange(n)

    omega = spec.omega
    a0 = spec.peak_field / omega
    env = _envelope(spec, t)
    phase = omega * t + spec.cep
    a = -a0 * env * np.sin(phase)
    # E = -dA/dt, envelope and carrier differentiated analytically
    denv = -4.0 * _LN2 * t / spec.duration**2 * env
    e = a0 * (denv * np.sin(phase) + env * omega * np.cos(phase))

    edge = max(env[0], env[-1])
    if edge > 1e-8:
        need = spec.duration * math.sqrt(math.log(1e8) / (2.0 * _LN2))
        raise ValueError(
            f"grid too short: envelope at edges {edge:.2e} of peak; "
            f"need |t| >= {need:.2f} fs"
        )

    w = SampledWaveform(t=t, a=a, e=e)
    if spec.gdd != 0.0 or spec.tod != 0.0:
        w = apply_dispersion(w, spec.gdd, spec.tod, omega)
    return w


def apply_dispersion(w: SampledWaveform, gdd: float, tod: float,
                     omega0: float) -> SampledWaveform:
    """Multiply A's positive-frequency spectrum by
    exp(i [gdd/2 (w-w0)^2 + tod/6 (w-w0)^3]); the real-signal mirror is
    enforced by the rFFT pair.  E is re-derived spectrally (E_hat = -i w A_hat)
    so no finite-difference noise enters.  The DC bin is left untouched.
    """
    n = w.t.size
    dt = w.dt
    freq = 2.0 * math.pi * np.fft.rfftfreq(n, d=dt)
    spec_a = np.fft.rfft(w.a)

    dw = freq - omega0
    phase = 0.5 * gdd * dw**2 + tod / 6.0 * dw**3
    phase[0] = 0.0
    spec_a = spec_a * np.exp(1j * phase)

    a = np.fft.irfft(spec_a, n=n)
    e = np.fft.irfft(-1j * freq * spec_a, n=n)

    peak = np.max(np.abs(a))
    edge = max(abs(a[0]), abs(a[-1]))
    if peak > 0 and edge > 1e-6 * peak:
        span = w.t[-1] - w.t[0]
        raise ValueError(
            f"dispersed pulse does not fit the grid (edge/peak = {edge / peak:.2e}); "
            f"grid span is {span:.1f} fs, extend it to >= {2.0 * span:.1f} fs"
        )
    return SampledWaveform(t=w.t, a=a, e=e)


def bloch_trajectory(w: SampledWaveform, k0: float, mat: MaterialSpec) -> Trajectory:
    """k(t) = k0 + (e/hbar) A(t); bias alpha(t) = 2 hbar v_F k(t)."""
    k = k0 + CONST.e / CONST.hbar * w.a
    bias = 2.0 * CONST.hbar * mat.fermi_velocity * k
    return Trajectory(k0=k0, t=w.t, k=k, bias=bias, waveform=w)


def monochromatic_waveform(photon_energy: float, peak_field: float,
                           n_cycles: float = 1.0,
                           samples_per_cycle: int = 256) -> SampledWaveform:
    """CW field E(t) = E0 sin(omega t), A(t) = (E0/omega) cos(omega t), over an
    integer number of cycles.  Used for per-cycle dynamical-phase checks; the
    no-DC pulse invariants do not apply here."""
    omega = photon_energy / CONST.hbar
    period = 2.0 * math.pi / omega
    n = int(round(n_cycles * samples_per_cycle)) + 1
    t = np.linspace(0.0, n_cycles * period, n)
    a = peak_field / omega * np.cos(omega * t)
    e = peak_field * np.sin(omega * t)
    return SampledWaveform(t=t, a=a, e=e)
