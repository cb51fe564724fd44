"""Strongly driven two-level systems: adiabaticity parameters, TDSE propagation
along Bloch trajectories, and (gamma, M) maps of residual population and
residual ballistic current."""

__version__ = "0.1.0"

from ._kernel import BACKEND as KERNEL_BACKEND  # noqa: E402
from .constants import CONST, Constants  # noqa: E402
from .model import (AdiabaticityReport, DriveParams, MaterialSpec, Regime,  # noqa: E402
                    RegimeThresholds, classify_regime, compute_report,
                    relativistic_boundary, specs_from_gamma_m)
from .pulse import (PulseSpec, SampledWaveform, TimeGridSpec, Trajectory,  # noqa: E402
                    apply_dispersion, bloch_trajectory, synthesize)

__all__ = [
    "AdiabaticityReport", "CONST", "Constants", "DriveParams",
    "KERNEL_BACKEND", "MaterialSpec", "PulseSpec", "Regime",
    "RegimeThresholds", "SampledWaveform", "TimeGridSpec", "Trajectory",
    "apply_dispersion", "bloch_trajectory", "classify_regime",
    "compute_report", "relativistic_boundary", "specs_from_gamma_m",
    "synthesize", "__version__",
]
