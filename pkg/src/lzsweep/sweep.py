"""Parallel (gamma, M) parameter maps: residual population, residual current,
and iso-field integrated current, with binary checkpoint/resume.

Every grid cell is an independent task: (gamma, M) is inverted to a concrete
(Delta, E0) at the map's fixed photon energy, a pulse is synthesized, and the
cell observable is computed.  Workers receive immutable cell descriptors and
results are assembled by cell index, so the output is deterministic for any
worker count.  Per-cell failures quarantine the cell (status FAILED) and
never abort the map.
"""

import hashlib
import math
import os
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .constants import CONST
from .model import (Regime, RegimeThresholds, compute_report, specs_from_gamma_m)
from .observables import k_resolved_population, residual_current
from .pulse import PulseSpec, TimeGridSpec, bloch_trajectory, synthesize
from .propagator import propagate_density, propagate_state

CHECKPOINT_MAGIC = b"LZSWMAP1"
_RECORD = struct.Struct("<IBBBxdd")   # index, status, regime, flags, pad, rho, j

STATUS_DONE = 1
STATUS_FAILED = 2

_REGIME_CODES = {r: i for i, r in enumerate(Regime)}
_REGIME_FROM_CODE = {i: r for r, i in _REGIME_CODES.items()}
_REGIME_FAILED = 255


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (gamma, M) grid plus the per-cell pulse template.

    gamma is log-spaced, M linear.  Delta and E0 are derived per cell from
    (gamma, M) at the fixed photon energy; the round trip through
    compute_report is exact.
    """

    gamma_count: int = 120
    gamma_min: float = 0.1
    gamma_max: float = 10.0
    m_count: int = 120
    m_min: float = 0.2
    m_max: float = 3.2
    photon_energy: float = 1.55
    fermi_velocity: float = 1.0
    duration: float = 5.0
    cep: float = math.pi / 2
    gdd: float = 0.0
    tod: float = 0.0
    t2: float = math.inf
    tolerance: float = 1e-10
    k0_points: int = 257
    k0_pad: float = 3.0
    k0_factor: float = 1.5
    thresholds: RegimeThresholds = field(default_factory=RegimeThresholds)

    def __post_init__(self):
        if self.gamma_count < 1 or self.m_count < 1:
            raise ValueError("axis counts must be >= 1")
        if not (0 < self.gamma_min <= self.gamma_max):
            raise ValueError("need 0 < gamma_min <= gamma_max")
        if not (0 < self.m_min <= self.m_max):
            raise ValueError("need 0 < m_min <= m_max")

    def gamma_axis(self) -> np.ndarray:
        if self.gamma_count == 1:
            return np.array([self.gamma_min])
        return np.geomspace(self.gamma_min, self.gamma_max, self.gamma_count)

    def m_axis(self) -> np.ndarray:
        if self.m_count == 1:
            return np.array([self.m_min])
        return np.linspace(self.m_min, self.m_max, self.m_count)

    def cells(self) -> list[tuple[int, float, float]]:
        """Row-major cell list: rows over gamma, columns over M."""
        gammas = self.gamma_axis()
        ms = self.m_axis()
        return [(i * self.m_count + j, float(g), float(m))
                for i, g in enumerate(gammas) for j, m in enumerate(ms)]

    def config_hash(self) -> str:
        """Hash of everything that defines the map's numbers.  Worker count,
        checkpoint location and output paths are execution details and do
        not enter."""
        th = self.thresholds
        text = "|".join(
            f"{v!r}" for v in (
                self.gamma_count, self.gamma_min, self.gamma_max,
                self.m_count, self.m_min, self.m_max,
                self.photon_energy, self.fermi_velocity, self.duration,
                self.cep, self.gdd, self.tod, self.t2, self.tolerance,
                self.k0_points, self.k0_pad, self.k0_factor,
                th.gamma_boundary, th.z_r_boundary, th.p_hi, th.p_lo,
                th.relativistic_gamma,
            )
        )
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class MapResult:
    grid: GridSpec
    kind: str                 # "population" | "current"
    gamma: np.ndarray         # per cell, row-major
    m: np.ndarray
    e0: np.ndarray            # V/nm
    rho_cb_res: np.ndarray
    j_res: np.ndarray         # e/fs (nan for population maps)
    regime_code: np.ndarray   # uint8, 255 = FAILED
    relativistic: np.ndarray  # bool
    failures: dict[int, str]
    manifest: dict[str, str]

    def regime_label(self, idx: int) -> str:
        code = int(self.regime_code[idx])
        if code == _REGIME_FAILED:
            return "FAILED"
        return _REGIME_FROM_CODE[code].value

    def value_grid(self, which: str) -> np.ndarray:
        """Reshape a per-cell column to (gamma_count, m_count)."""
        col = {"rho": self.rho_cb_res, "j": self.j_res}[which]
        return col.reshape(self.grid.gamma_count, self.grid.m_count)


def cell_pulse(spec: GridSpec, gamma: float, m: float,
               k0_grid: bool = False, window_budget: float = 1.0) -> tuple:
    """Material, drive, and synthesized waveform for one grid cell, with the
    grid step tightened to resolve the largest instantaneous gap.  k0_grid
    widens the gap estimate to the k0 integration window of current maps;
    window_budget > 1 reserves room for window extensions beyond the
    default half-width."""
    mat, drive = specs_from_gamma_m(gamma, m, spec.photon_energy,
                                    spec.fermi_velocity)
    pspec = PulseSpec(photon_energy=spec.photon_energy,
                      peak_field=drive.peak_field, duration=spec.duration,
                      cep=spec.cep, gdd=spec.gdd, tod=spec.tod)
    k_exc = (pspec.peak_field / pspec.omega) / CONST.hbar
    if k0_grid:
        k_exc += window_budget * (spec.k0_factor * k_exc + spec.k0_pad)
    alpha_max = 2.0 * CONST.hbar * spec.fermi_velocity * k_exc
    eps_max = math.hypot(mat.gap, alpha_max)
    dt = min(pspec.optical_period / 64.0,
             2.0 * math.pi * CONST.hbar / eps_max / 40.0)
    w = synthesize(pspec, TimeGridSpec(dt=dt))
    return mat, drive, w


def _eval_population_cell(spec: GridSpec, gamma: float, m: float) -> tuple[float, float]:
    mat, _, w = cell_pulse(spec, gamma, m)
    traj = bloch_trajectory(w, 0.0, mat)
    if math.isinf(spec.t2):
        trace = propagate_state(mat, traj, tol=spec.tolerance)
    else:
        trace = propagate_density(mat, traj, t2=spec.t2, tol=spec.tolerance)
    return trace.residual, math.nan


def _eval_current_cell(spec: GridSpec, gamma: float, m: float) -> tuple[float, float]:
    # First pass sizes the time grid for the default k0 window only; the
    # rare cells whose edge population forces a wider window retry once
    # with the full extension budget priced into the grid step.
    for budget, max_extend in ((1.0, 0), (1.5**3, 3)):
        mat, _, w = cell_pulse(spec, gamma, m, k0_grid=True,
                               window_budget=budget)
        half = spec.k0_factor * w.max_wavenumber_excursion() + spec.k0_pad
        try:
            res = k_resolved_population(mat, w, n_k=spec.k0_points,
                                        half_width=half, tol=spec.tolerance,
                                        max_extend=max_extend)
            break
        except ValueError:
            if max_extend:
                raise
    j = residual_current(res)
    rho0 = float(res.rho_cb_res[np.argmin(np.abs(res.k0))])
    return rho0, j


_WORKER_SPEC: GridSpec | None = None
_WORKER_KIND: str = ""


def _worker_init(spec: GridSpec, kind: str) -> None:
    global _WORKER_SPEC, _WORKER_KIND
    _WORKER_SPEC = spec
    _WORKER_KIND = kind


def _worker_eval(cell: tuple[int, float, float]):
    idx, gamma, m = cell
    spec, kind = _WORKER_SPEC, _WORKER_KIND
    try:
        if kind == "population":
            rho, j = _eval_population_cell(spec, gamma, m)
        else:
            rho, j = _eval_current_cell(spec, gamma, m)
        report = compute_report(*specs_from_gamma_m(
            gamma, m, spec.photon_energy, spec.fermi_velocity),
            thresholds=spec.thresholds)
        return (idx, STATUS_DONE, _REGIME_CODES[report.regime],
                int(report.relativistic_flag), rho, j, "")
    except Exception as exc:  # quarantine, never abort the map
        return (idx, STATUS_FAILED, _REGIME_FAILED, 0,
                math.nan, math.nan, f"{type(exc).__name__}: {exc}")


def _load_checkpoint(path: str, config_hash: str) -> dict[int, tuple]:
    done: dict[int, tuple] = {}
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a lzsweep checkpoint")
        stored = fh.read(64).decode("ascii", errors="replace")
        if stored != config_hash:
            raise ValueError(
                f"{path}: config hash mismatch (checkpoint {stored[:12]}..., "
                f"current config {config_hash[:12]}...)"
            )
        while True:
            blob = fh.read(_RECORD.size)
            if len(blob) < _RECORD.size:
                break
            idx, status, regime, flags, rho, j = _RECORD.unpack(blob)
            done[idx] = (status, regime, flags, rho, j)
    return done


def run_map(spec: GridSpec, kind: str, workers: int | None = None,
            checkpoint: str | None = None) -> MapResult:
    """Evaluate the full grid; kind is "population" (k0 = 0 cell observable)
    or "current" (k0-resolved residual current per cell)."""
    if kind not in ("population", "current"):
        raise ValueError(f"unknown map kind {kind!r}")
    cells = spec.cells()
    n = len(cells)
    cfg_hash = spec.config_hash()
    # The checkpoint header binds both the grid configuration and the map
    # kind, so a population checkpoint can never resume a current map.
    header_hash = hashlib.sha256(f"{kind}:{cfg_hash}".encode()).hexdigest()

    done: dict[int, tuple] = {}
    if checkpoint and os.path.exists(checkpoint):
        done = _load_checkpoint(checkpoint, header_hash)

    ckpt_fh = None
    if checkpoint:
        if done:
            ckpt_fh = open(checkpoint, "ab")
        else:
            ckpt_fh = open(checkpoint, "wb")
            ckpt_fh.write(CHECKPOINT_MAGIC)
            ckpt_fh.write(header_hash.encode("ascii"))
            ckpt_fh.flush()

    pending = [c for c in cells if c[0] not in done]
    failures: dict[int, str] = {}
    t_start = time.monotonic()

    if workers is None:
        workers = int(os.environ.get("LZSWEEP_WORKERS", "0")) or (os.cpu_count() or 1)

    def record(result):
        idx, status, regime, flags, rho, j, reason = result
        done[idx] = (status, regime, flags, rho, j)
        if status == STATUS_FAILED:
            failures[idx] = reason
        if ckpt_fh is not None:
            ckpt_fh.write(_RECORD.pack(idx, status, regime, flags, rho, j))
            ckpt_fh.flush()

    try:
        if workers <= 1:
            _worker_init(spec, kind)
            for cell in pending:
                record(_worker_eval(cell))
        else:
            with ProcessPoolExecutor(max_workers=workers,
                                     initializer=_worker_init,
                                     initargs=(spec, kind)) as pool:
                for result in pool.map(_worker_eval, pending,
                                       chunksize=max(1, len(pending) // (8 * workers))):
                    record(result)
    finally:
        if ckpt_fh is not None:
            ckpt_fh.close()

    wall = time.monotonic() - t_start

    gamma = np.array([c[1] for c in cells])
    m = np.array([c[2] for c in cells])
    omega = spec.photon_energy / CONST.hbar
    e0 = omega * (m * spec.photon_energy) / (2.0 * spec.fermi_velocity
                                             * CONST.e * gamma)
    rho = np.full(n, math.nan)
    j = np.full(n, math.nan)
    regime_code = np.full(n, _REGIME_FAILED, dtype=np.uint8)
    relativistic = np.zeros(n, dtype=bool)
    for idx, (status, rg, flags, r_val, j_val) in done.items():
        rho[idx] = r_val
        j[idx] = j_val
        regime_code[idx] = rg
        relativistic[idx] = bool(flags)
        if status == STATUS_FAILED and idx not in failures:
            failures[idx] = "failed in a previous (checkpointed) run"

    manifest = {
        "version": __version__,
        "kind": kind,
        "config_hash": cfg_hash,
        "cells_total": str(n),
        "cells_failed": str(len(failures)),
        "wall_time_s": f"{wall:.3f}",
        "workers": str(workers),
    }
    return MapResult(grid=spec, kind=kind, gamma=gamma, m=m, e0=e0,
                     rho_cb_res=rho, j_res=j, regime_code=regime_code,
                     relativistic=relativistic, failures=failures,
                     manifest=manifest)


def run_population_map(spec: GridSpec, workers: int | None = None,
                       checkpoint: str | None = None) -> MapResult:
    return run_map(spec, "population", workers=workers, checkpoint=checkpoint)


def run_current_map(spec: GridSpec, workers: int | None = None,
                    checkpoint: str | None = None) -> MapResult:
    return run_map(spec, "current", workers=workers, checkpoint=checkpoint)


def iso_field_gamma(spec: GridSpec, m: np.ndarray, e0: float) -> np.ndarray:
    """gamma along the constant-E0 line: gamma = omega hbar*omega M / (2 v_F e E0)."""
    omega = spec.photon_energy / CONST.hbar
    return omega * spec.photon_energy * np.asarray(m) / (
        2.0 * spec.fermi_velocity * CONST.e * e0)


def integrate_iso_field(result: MapResult, e0_values,
                        samples_per_line: int = 400):
    """Integrate j_res along constant-E0 lines over the map's M range.

    j is interpolated bilinearly in (log gamma, M).  Returns a list of
    (E0, j_int, covered_fraction); the fraction < 1 flags lines that exit
    the gamma range of the grid.
    """
    spec = result.grid
    log_g_axis = np.log(spec.gamma_axis())
    m_axis = spec.m_axis()
    jgrid = result.value_grid("j")
    if np.isnan(jgrid).all():
        raise ValueError("map contains no current data")

    out = []
    for e0 in e0_values:
        m_line = np.linspace(spec.m_min, spec.m_max, samples_per_line)
        g_line = iso_field_gamma(spec, m_line, float(e0))
        inside = (g_line >= spec.gamma_min) & (g_line <= spec.gamma_max)
        covered = float(np.count_nonzero(inside)) / m_line.size
        if not inside.any():
            out.append((float(e0), 0.0, 0.0))
            continue
        m_in = m_line[inside]
        lg_in = np.log(g_line[inside])
        j_in = _bilinear(log_g_axis, m_axis, jgrid, lg_in, m_in)
        out.append((float(e0), float(np.trapezoid(j_in, m_in)), covered))
    return out


def _bilinear(xa: np.ndarray, ya: np.ndarray, z: np.ndarray,
              x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of z[len(xa), len(ya)] at (x, y); NaN cells
    (quarantined) propagate into the line integral deliberately."""
    ix = np.clip(np.searchsorted(xa, x) - 1, 0, len(xa) - 2)
    iy = np.clip(np.searchsorted(ya, y) - 1, 0, len(ya) - 2)
    fx = (x - xa[ix]) / (xa[ix + 1] - xa[ix])
    fy = (y - ya[iy]) / (ya[iy + 1] - ya[iy])
    fx = np.clip(fx, 0.0, 1.0)
    fy = np.clip(fy, 0.0, 1.0)
    return ((1 - fx) * (1 - fy) * z[ix, iy] + fx * (1 - fy) * z[ix + 1, iy]
            + (1 - fx) * fy * z[ix, iy + 1] + fx * fy * z[ix + 1, iy + 1])
