"""Flat key-value run configuration.

Grammar (UTF-8, line oriented):

    # comment
    section.key = value

Values are numbers (symbolic pi expressions like "pi/2" or "2*pi" are
accepted), "inf"/"off" for the dephasing time, or plain strings for paths.
Unknown keys are rejected with line and column, as are out-of-range values.
An empty document resolves to the paper-baseline defaults (5 fs pulse,
cep = pi/2, 1.55 eV photons, v_F = 1 nm/fs).
"""

import math
import re
from dataclasses import dataclass, replace

from .model import RegimeThresholds
from .sweep import GridSpec


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}" if line else message)
        self.line = line
        self.col = col


_PI_RE = re.compile(r"^([+-]?)(\d+\.?\d*)?\s*\*?\s*pi(?:\s*/\s*(\d+\.?\d*))?$")


def parse_number(text: str, line: int = 0, col: int = 0) -> float:
    text = text.strip()
    if text.lower() in ("inf", "off"):
        return math.inf
    m = _PI_RE.match(text)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        coeff = float(m.group(2)) if m.group(2) else 1.0
        denom = float(m.group(3)) if m.group(3) else 1.0
        return sign * coeff * math.pi / denom
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse number {text!r}", line, col) from None


@dataclass(frozen=True)
class RunConfig:
    material_gap: float = 1.55
    material_fermi_velocity: float = 1.0
    pulse_photon_energy: float = 1.55
    pulse_peak_field: float = 1.0
    pulse_duration: float = 5.0
    pulse_cep: float = math.pi / 2
    pulse_gdd: float = 0.0
    pulse_tod: float = 0.0
    dephasing_t2: float = math.inf
    grid_gamma_points: int = 120
    grid_gamma_min: float = 0.1
    grid_gamma_max: float = 10.0
    grid_m_points: int = 120
    grid_m_min: float = 0.2
    grid_m_max: float = 3.2
    grid_k0_points: int = 257
    grid_k0_pad: float = 3.0
    grid_k0_factor: float = 1.5
    classifier_gamma_boundary: float = 1.0
    classifier_z_r_boundary: float = 1.0
    classifier_p_hi: float = 0.9
    classifier_p_lo: float = 0.1
    classifier_relativistic_gamma: float = 0.007
    engine_workers: int = 0
    engine_tolerance: float = 1e-10
    engine_checkpoint: str = ""
    output_dir: str = "."

    def thresholds(self) -> RegimeThresholds:
        return RegimeThresholds(
            gamma_boundary=self.classifier_gamma_boundary,
            z_r_boundary=self.classifier_z_r_boundary,
            p_hi=self.classifier_p_hi,
            p_lo=self.classifier_p_lo,
            relativistic_gamma=self.classifier_relativistic_gamma,
        )

    def grid_spec(self) -> GridSpec:
        return GridSpec(
            gamma_count=self.grid_gamma_points,
            gamma_min=self.grid_gamma_min,
            gamma_max=self.grid_gamma_max,
            m_count=self.grid_m_points,
            m_min=self.grid_m_min,
            m_max=self.grid_m_max,
            photon_energy=self.pulse_photon_energy,
            fermi_velocity=self.material_fermi_velocity,
            duration=self.pulse_duration,
            cep=self.pulse_cep,
            gdd=self.pulse_gdd,
            tod=self.pulse_tod,
            t2=self.dephasing_t2,
            tolerance=self.engine_tolerance,
            k0_points=self.grid_k0_points,
            k0_pad=self.grid_k0_pad,
            k0_factor=self.grid_k0_factor,
            thresholds=self.thresholds(),
        )

    def workers(self) -> int | None:
        return self.engine_workers if self.engine_workers > 0 else None

    def canonical_text(self) -> str:
        """Exact, re-parseable rendering of the resolved configuration."""
        lines = []
        for key, (attr, _kind, _check) in sorted(_KEYS.items()):
            val = getattr(self, attr)
            if isinstance(val, float):
                lines.append(f"{key} = {'inf' if math.isinf(val) else repr(val)}")
            else:
                lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"


def _positive(name):
    return lambda v: v > 0 or f"{name} must be > 0"


def _non_negative(name):
    return lambda v: v >= 0 or f"{name} must be >= 0"


def _any(_v):
    return True


_KEYS = {
    "material.gap": ("material_gap", float, _non_negative("gap")),
    "material.fermi_velocity": ("material_fermi_velocity", float, _positive("fermi_velocity")),
    "pulse.photon_energy": ("pulse_photon_energy", float, _positive("photon_energy")),
    "pulse.peak_field": ("pulse_peak_field", float, _positive("peak_field")),
    "pulse.duration": ("pulse_duration", float, _positive("duration")),
    "pulse.cep": ("pulse_cep", float, _any),
    "pulse.gdd": ("pulse_gdd", float, _any),
    "pulse.tod": ("pulse_tod", float, _any),
    "dephasing.t2": ("dephasing_t2", float, _positive("t2")),
    "grid.gamma_points": ("grid_gamma_points", int, _positive("gamma_points")),
    "grid.gamma_min": ("grid_gamma_min", float, _positive("gamma_min")),
    "grid.gamma_max": ("grid_gamma_max", float, _positive("gamma_max")),
    "grid.m_points": ("grid_m_points", int, _positive("m_points")),
    "grid.m_min": ("grid_m_min", float, _positive("m_min")),
    "grid.m_max": ("grid_m_max", float, _positive("m_max")),
    "grid.k0_points": ("grid_k0_points", int, lambda v: v >= 3 or "k0_points must be >= 3"),
    "grid.k0_pad": ("grid_k0_pad", float, _non_negative("k0_pad")),
    "grid.k0_factor": ("grid_k0_factor", float, _non_negative("k0_factor")),
    "classifier.gamma_boundary": ("classifier_gamma_boundary", float, _positive("gamma_boundary")),
    "classifier.z_r_boundary": ("classifier_z_r_boundary", float, _positive("z_r_boundary")),
    "classifier.p_hi": ("classifier_p_hi", float, lambda v: 0 < v <= 1 or "p_hi must be in (0, 1]"),
    "classifier.p_lo": ("classifier_p_lo", float, lambda v: 0 <= v < 1 or "p_lo must be in [0, 1)"),
    "classifier.relativistic_gamma": ("classifier_relativistic_gamma", float, _positive("relativistic_gamma")),
    "engine.workers": ("engine_workers", int, _non_negative("workers")),
    "engine.tolerance": ("engine_tolerance", float, _positive("tolerance")),
    "engine.checkpoint": ("engine_checkpoint", str, _any),
    "output.dir": ("output_dir", str, _any),
}


def apply_setting(cfg: RunConfig, key: str, raw: str,
                  line: int = 0, col: int = 0) -> RunConfig:
    key = key.strip()
    if key not in _KEYS:
        raise ConfigError(f"unknown key {key!r}", line, col)
    attr, kind, check = _KEYS[key]
    raw = raw.strip()
    if kind is str:
        value = raw
    else:
        num = parse_number(raw, line, col + len(key) + 3)
        if kind is int:
            if math.isinf(num) or num != int(num):
                raise ConfigError(f"{key} must be an integer, got {raw!r}",
                                  line, col)
            value = int(num)
        else:
            value = num
    result = check(value)
    if result is not True:
        raise ConfigError(f"{key}: {result} (got {raw!r})", line, col)
    return replace(cfg, **{attr: value})


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, 1)
        key, _, value = line.partition("=")
        col = raw_line.index(key.strip()) + 1 if key.strip() else 1
        cfg = apply_setting(cfg, key, value, lineno, col)
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
