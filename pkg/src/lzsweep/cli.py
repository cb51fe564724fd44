"""Command line surface.

Subcommands: trace, sweep-map, current-map, regimes, resonance, lz-check.
Exit codes: 0 success, 1 validation error, 2 runtime failure,
3 partial map (quarantined cells).  Errors go to stderr prefixed
"lzsweep: error:".
"""

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .analytics import lz_probability, resonance_curve
from .config import ConfigError, RunConfig, apply_setting, load_config
from .constants import CONST
from .io import emit_map, emit_table
from .model import DriveParams, MaterialSpec, compute_report, specs_from_gamma_m
from .propagator import (dynamical_phase, linear_sweep_transfer,
                         propagate_density, propagate_state)
from .pulse import PulseSpec, TimeGridSpec, bloch_trajectory, synthesize
from .sweep import integrate_iso_field, run_current_map, run_population_map

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL = 3

LZ_CHECK_DELTAS = (0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0)


def _err(message: str) -> None:
    print(f"lzsweep: error: {message}", file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lzsweep",
        description="Driven two-level system: regime reports, traces, and "
                    "(gamma, M) maps of residual population and current.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--workers", type=int, help="worker process count "
                       "(default: engine.workers / LZSWEEP_WORKERS / cpu count)")
        p.add_argument("--resume", action="store_true",
                       help="resume from the checkpoint file if present")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        return p

    p = add_common(sub.add_parser("trace", help="single-point time trace"))
    p.add_argument("--k0", type=float, default=0.0, help="initial wave number (1/nm)")

    add_common(sub.add_parser("sweep-map", help="residual-population map over (gamma, M)"))

    p = add_common(sub.add_parser("current-map", help="residual-current map and iso-E0 integral"))
    p.add_argument("--iso-e0", default="1:20:39",
                   help="iso-field line values, min:max:count (V/nm)")

    add_common(sub.add_parser("regimes", help="print the adiabaticity report for one point"))

    p = add_common(sub.add_parser("resonance", help="analytic resonance curves M(n, gamma)"))
    p.add_argument("--orders", default="1..9", help="photon orders, e.g. 1..9 or 1,3,5")
    p.add_argument("--gamma-range", default="0.1:10:200", dest="gamma_range",
                   help="log-spaced gamma samples, min:max:count")

    add_common(sub.add_parser("lz-check", help="Landau-Zener oracle table"))
    return parser


def _resolve_config(args) -> tuple[RunConfig, dict[str, str]]:
    cfg = load_config(args.config) if args.config else RunConfig()
    extra: dict[str, str] = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if key in ("gamma", "M"):
            extra[key] = value
        else:
            cfg = apply_setting(cfg, key, value)
    if args.workers is not None:
        cfg = apply_setting(cfg, "engine.workers", str(args.workers))
    return cfg, extra


def _point_from_config(cfg: RunConfig, extra: dict[str, str]):
    """MaterialSpec/DriveParams for a single working point: (gamma, M)
    overrides win over material.gap / pulse.peak_field."""
    if "gamma" in extra or "M" in extra:
        if not ("gamma" in extra and "M" in extra):
            raise ConfigError("--set gamma= and --set M= must be given together")
        gamma = float(extra["gamma"])
        m = float(extra["M"])
        return specs_from_gamma_m(gamma, m, cfg.pulse_photon_energy,
                                  cfg.material_fermi_velocity)
    mat = MaterialSpec(gap=cfg.material_gap,
                       fermi_velocity=cfg.material_fermi_velocity)
    return mat, DriveParams(photon_energy=cfg.pulse_photon_energy,
                            peak_field=cfg.pulse_peak_field)


def _cmd_regimes(args) -> int:
    cfg, extra = _resolve_config(args)
    mat, drive = _point_from_config(cfg, extra)
    report = compute_report(mat, drive, cfg.thresholds())
    print(f"gamma            = {report.gamma:.9g}")
    print(f"M                = {report.m_photon:.9g}")
    print(f"z_R              = {report.z_r:.9g}")
    print(f"delta_LZ         = {report.delta_lz:.9g}")
    print(f"P_LZ             = {report.p_lz:.9g}")
    print(f"Rabi_freq_1_fs   = {report.rabi_freq:.9g}")
    print(f"transition_time_fs = {report.transition_time:.9g}")
    print(f"sweep_rate_eV_fs = {report.sweep_rate:.9g}")
    print(f"eff_mass         = {report.eff_mass:.9g}")
    print(f"a0               = {report.a0:.9g}")
    print(f"regime           = {report.regime.value}")
    print(f"relativistic     = {report.relativistic_flag}")
    return EXIT_OK


def _cmd_trace(args) -> int:
    cfg, extra = _resolve_config(args)
    mat, drive = _point_from_config(cfg, extra)
    pspec = PulseSpec(photon_energy=drive.photon_energy,
                      peak_field=drive.peak_field, duration=cfg.pulse_duration,
                      cep=cfg.pulse_cep, gdd=cfg.pulse_gdd, tod=cfg.pulse_tod)
    w = synthesize(pspec, TimeGridSpec())
    traj = bloch_trajectory(w, args.k0, mat)
    if math.isinf(cfg.dephasing_t2):
        trace = propagate_state(mat, traj, tol=cfg.engine_tolerance)
    else:
        trace = propagate_density(mat, traj, t2=cfg.dephasing_t2,
                                  tol=cfg.engine_tolerance)

    prov = {"version": __version__, "k0_1_nm": f"{args.k0:.9g}"}
    emit_table(os.path.join(args.out, "waveform.csv"),
               "t_fs,A,E,k,bias_eV",
               zip(w.t, w.a, w.e, traj.k, traj.bias), prov)

    a_norm = w.a / np.max(np.abs(w.a))
    # local LZ probability from the instantaneous sweep rate alpha' = 2 v_F e E(t)
    rate = 2.0 * mat.fermi_velocity * CONST.e * np.abs(w.e)
    with np.errstate(divide="ignore"):
        delta = np.where(rate > 0, mat.gap**2 / (4.0 * CONST.hbar * rate), np.inf)
    p_lz = np.exp(-2.0 * math.pi * delta)
    emit_table(os.path.join(args.out, "trace.csv"),
               "t_fs,A_norm,rho_cb,P_LZ_at_k,phase",
               zip(trace.t, a_norm, trace.rho_cb, p_lz, trace.phase), prov)
    print(f"residual rho_cb = {trace.residual:.9g}")
    print(f"total dynamical phase = {trace.total_phase:.9g} rad")
    return EXIT_OK


def _run_map_command(args, kind: str) -> int:
    cfg, _ = _resolve_config(args)
    spec = cfg.grid_spec()
    checkpoint = cfg.engine_checkpoint or None
    if checkpoint and not args.resume and os.path.exists(checkpoint):
        os.remove(checkpoint)
    runner = run_population_map if kind == "population" else run_current_map
    result = runner(spec, workers=cfg.workers(), checkpoint=checkpoint)
    paths = emit_map(result, args.out, cfg)
    print(f"wrote {paths['map']} ({len(result.gamma)} cells, "
          f"{len(result.failures)} failed)")

    if kind == "current":
        lo, hi, count = (float(x) for x in args.iso_e0.split(":"))
        e0_values = np.linspace(lo, hi, int(count))
        iso = integrate_iso_field(result, e0_values)
        emit_table(os.path.join(args.out, "current_iso.csv"),
                   "E0_Vnm,j_int,covered_fraction", iso, result.manifest)
        print(f"wrote {os.path.join(args.out, 'current_iso.csv')}")
    return EXIT_PARTIAL if result.failures else EXIT_OK


def _parse_orders(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def _cmd_resonance(args) -> int:
    lo, hi, count = args.gamma_range.split(":")
    gammas = np.geomspace(float(lo), float(hi), int(count))
    rows = []
    for n in _parse_orders(args.orders):
        curve = resonance_curve(n, gammas)
        parity = "even" if curve.even else "odd"
        rows.extend((float(n), g, m, parity)
                    for g, m in zip(curve.gamma, curve.m))
    path = emit_table(os.path.join(args.out, "resonance.csv"),
                      "n,gamma,M,parity", rows, {"version": __version__})
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_lz_check(args) -> int:
    cfg, _ = _resolve_config(args)
    alpha0 = 1.0  # eV/fs; delta_LZ fixes the gap, the rate is a free gauge
    vf = cfg.material_fermi_velocity
    ok = True
    print("delta_LZ   P_formula    P_propagated  rel_err")
    for delta in LZ_CHECK_DELTAS:
        gap = math.sqrt(4.0 * CONST.hbar * alpha0 * delta)
        mat = MaterialSpec(gap=gap, fermi_velocity=vf)
        p_num = linear_sweep_transfer(mat, alpha0, tol=cfg.engine_tolerance)
        p_ref = lz_probability(delta)
        rel = abs(p_num - p_ref) / p_ref
        line_ok = rel <= 0.02 or abs(p_num - p_ref) <= 1e-6
        ok = ok and line_ok
        print(f"{delta:<10g} {p_ref:<12.6g} {p_num:<13.6g} {rel:.2e}"
              f"{'' if line_ok else '  FAIL'}")
    return EXIT_OK if ok else EXIT_RUNTIME


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract is 1
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "regimes":
            return _cmd_regimes(args)
        if args.command == "trace":
            return _cmd_trace(args)
        if args.command == "sweep-map":
            return _run_map_command(args, "population")
        if args.command == "current-map":
            return _run_map_command(args, "current")
        if args.command == "resonance":
            return _cmd_resonance(args)
        if args.command == "lz-check":
            return _cmd_lz_check(args)
        _err(f"unknown subcommand {args.command!r}")
        return EXIT_VALIDATION
    except (ConfigError, ValueError) as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    except Exception as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
