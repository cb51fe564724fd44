"""Closed-form layer: elliptic integral, analytic resonance curves, the
Landau-Zener formula, and the linear-sweep LZ oracle.

Convention: elliptic_e2(m) = integral_0^{pi/2} sqrt(1 - m sin^2) dtheta.
The resonance condition evaluates it at m = -1/gamma^2 (the integrand
derived from the per-cycle dynamical phase is sqrt(1 + sin^2/gamma^2),
which fixes the sign of the argument).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .constants import CONST
from .model import MaterialSpec


@dataclass(frozen=True)
class ResonanceCurve:
    """Photon-order-n resonance M(gamma); even orders are symmetry-suppressed
    at k0 = 0 and carry even=True so plots can dash them."""

    n: int
    gamma: np.ndarray
    m: np.ndarray
    even: bool


def elliptic_e2(m: float) -> float:
    """Complete elliptic integral of the second kind, parameter convention
    E(m) = int_0^{pi/2} sqrt(1 - m sin^2 t) dt; valid for m <= 1."""
    if m > 1:
        raise ValueError(f"elliptic_e2 requires m <= 1, got {m}")
    return float(special.ellipe(m))


def elliptic_e2_quadrature(m: float) -> float:
    """Independent adaptive-quadrature evaluation, used as the oracle."""
    val, _ = integrate.quad(
        lambda t: math.sqrt(1.0 - m * math.sin(t) ** 2), 0.0, math.pi / 2,
        epsabs=1e-13, epsrel=1e-13)
    return val


def resonance_condition(n: int, gamma: float) -> float:
    """M at which the per-cycle dynamical phase reaches 2 pi n:
    M = n pi / (2 E(-1/gamma^2))."""
    if n < 1:
        raise ValueError("photon order n must be >= 1")
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    return n * math.pi / (2.0 * elliptic_e2(-(gamma ** -2)))


def resonance_gamma(n: int, m: float, bracket: tuple[float, float] = (1e-3, 1e3)) -> float:
    """Solve resonance_condition(n, gamma) = m for gamma within bracket."""
    f = lambda g: resonance_condition(n, g) - m
    lo, hi = bracket
    if f(lo) * f(hi) > 0:
        raise ValueError(f"no resonance root for n={n}, M={m} in {bracket}")
    return float(optimize.brentq(f, lo, hi, xtol=1e-12, rtol=1e-14))


def resonance_curve(n: int, gamma: np.ndarray) -> ResonanceCurve:
    gamma = np.asarray(gamma, dtype=float)
    m = np.array([resonance_condition(n, g) for g in gamma])
    return ResonanceCurve(n=n, gamma=gamma, m=m, even=(n % 2 == 0))


def lz_probability(delta_lz: float) -> float:
    """Single-passage Landau-Zener transfer probability exp(-2 pi delta)."""
    if delta_lz < 0:
        raise ValueError(f"delta_lz must be >= 0, got {delta_lz}")
    return math.exp(-2.0 * math.pi * delta_lz)


def lz_oracle_sweep(mat: MaterialSpec, alpha0: float,
                    window: float = 60.0, tol: float = 1e-12) -> float:
    """Ground-truth single linear sweep through the avoided crossing.

    Integrates H(t) = -(1/2) [[alpha0 t, Delta], [Delta, -alpha0 t]] over
    t in [-W, W] with W = window * sqrt(hbar/alpha0), starting in the lower
    adiabatic state, and returns the final upper-adiabatic population.
    Kept independent of the production propagator (scipy DOP853) so the two
    routes cross-validate each other.
    """
    if window < 10.0:
        raise ValueError(
            f"window {window} too small; truncation error ~ O(1/window^2) "
            "is not negligible below 10"
        )
    hbar = CONST.hbar
    delta = mat.gap
    t_w = window * math.sqrt(hbar / alpha0)

    def h_elems(t):
        return -0.5 * alpha0 * t, -0.5 * delta

    def rhs(t, y):
        d, c = h_elems(t)
        psi = y[:2] + 1j * y[2:]
        dpsi = -1j / hbar * np.array([d * psi[0] + c * psi[1],
                                      c * psi[0] - d * psi[1]])
        return np.concatenate((dpsi.real, dpsi.imag))

    def adiabatic_states(t):
        d, c = h_elems(t)
        eps = math.hypot(d, c)
        # eigenvector of [[d, c], [c, -d]] for eigenvalue +eps; two equivalent
        # forms, pick the better-conditioned one (avoids the c = 0 degeneracy)
        if d <= 0.0:
            up = np.array([c, eps - d])
        else:
            up = np.array([eps + d, c])
        up /= np.linalg.norm(up)
        lo = np.array([-up[1], up[0]])
        return lo, up

    lo0, _ = adiabatic_states(-t_w)
    y0 = np.concatenate((lo0, np.zeros(2)))
    sol = integrate.solve_ivp(rhs, (-t_w, t_w), y0, method="DOP853",
                              rtol=tol, atol=tol, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"LZ oracle integration failed: {sol.message}")
    psi = sol.y[:2, -1] + 1j * sol.y[2:, -1]
    _, up = adiabatic_states(t_w)
    return float(abs(np.dot(up, psi)) ** 2)
