"""Compare the compiled and pure-Python propagation kernels.

Usage: python benchmarks/bench_kernels.py [repeats]

Times a pure-state and a density-matrix propagation over a few-cycle pulse
at three field strengths and prints the wall time per trajectory plus the
speedup of the compiled kernel.
"""

import sys
import time

import numpy as np

from lzsweep._kernel import get_backend
from lzsweep.constants import CONST
from lzsweep.model import MaterialSpec
from lzsweep.propagator import lower_eigenstate
from lzsweep.pulse import PulseSpec, TimeGridSpec, bloch_trajectory, synthesize


def build_problem(peak_field: float):
    mat = MaterialSpec(gap=1.55, fermi_velocity=1.0)
    spec = PulseSpec(peak_field=peak_field)
    k_max = (peak_field / spec.omega) / CONST.hbar
    eps_max = np.hypot(mat.gap, 2.0 * CONST.hbar * k_max)
    dt = min(spec.optical_period / 64.0,
             2.0 * np.pi * CONST.hbar / eps_max / 40.0)
    w = synthesize(spec, TimeGridSpec(dt=dt))
    traj = bloch_trajectory(w, 0.0, mat)
    psi0 = lower_eigenstate(mat, float(traj.k[0]))
    base = (np.ascontiguousarray(traj.t), np.ascontiguousarray(w.a),
            np.ascontiguousarray(w.e), traj.k0, mat.gap, mat.fermi_velocity,
            CONST.hbar)
    return base, psi0, len(traj.t)


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out, status, _ = fn()
        best = min(best, time.perf_counter() - t0)
        assert status == 0
    return best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    backends = {}
    backends["python"], _ = get_backend("python")
    try:
        backends["cython"], _ = get_backend("cython")
    except ImportError:
        print("compiled kernel not built; timing the fallback only")

    r0 = np.array([0.0, 0.0, -1.0])
    print(f"{'problem':<28} " + " ".join(f"{n:>12}" for n in backends)
          + ("      speedup" if len(backends) == 2 else ""))
    for e0 in (0.5, 2.0, 8.0):
        base, psi0, n = build_problem(e0)
        for kind in ("pure", "bloch"):
            times = {}
            for name, mod in backends.items():
                if kind == "pure":
                    call = lambda m=mod: m.propagate_pure(*base, psi0,
                                                          1e-10, 1e-10)
                else:
                    call = lambda m=mod: m.propagate_bloch(*base, r0, 0.0,
                                                           1e-10, 1e-10)
                times[name] = time_call(call, repeats)
            row = f"E0={e0:<4g} {kind:<6} n={n:<7d}   "
            row += " ".join(f"{times[nm] * 1e3:>9.2f} ms" for nm in backends)
            if len(times) == 2:
                row += f"   x{times['python'] / times['cython']:.1f}"
            print(row)


if __name__ == "__main__":
    main()
