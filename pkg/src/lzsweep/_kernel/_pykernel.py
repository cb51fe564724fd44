"""Pure-Python propagation kernel (fallback when the compiled extension is
unavailable).

Implements exactly the same algorithm as _cykernel.pyx: Cash-Karp embedded
RK4(5) with PI-free step control, integrating interval-by-interval over the
waveform grid.  The off-diagonal coupling b(t) = hbar*v_F*k(t) is evaluated
at arbitrary times by cubic Hermite interpolation of the sampled vector
potential, using E = -dA/dt as the exact derivative data.

Status codes returned by both kernels:
    0   success
    1   step-size underflow (time of failure reported)
    2   norm / positivity drift beyond the abort threshold
"""

import math

import numpy as np

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_DRIFT = 2

# Cash-Karp tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0
_A51, _A52, _A53, _A54 = -11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0
_A61, _A62, _A63, _A64, _A65 = (1631.0 / 55296.0, 175.0 / 512.0,
                                575.0 / 13824.0, 44275.0 / 110592.0,
                                253.0 / 4096.0)
_B1, _B3, _B4, _B6 = 37.0 / 378.0, 250.0 / 621.0, 125.0 / 594.0, 512.0 / 1771.0
_E1 = _B1 - 2825.0 / 27648.0
_E3 = _B3 - 18575.0 / 48384.0
_E4 = _B4 - 13525.0 / 55296.0
_E5 = -277.0 / 14336.0
_E6 = _B6 - 1.0 / 4.0

_SAFETY = 0.9
_MIN_SHRINK = 0.2
_MAX_GROW = 5.0


class _CouplingInterp:
    """Cubic Hermite interpolant of b(t) = b0 + v_F * A(t) on a uniform grid."""

    def __init__(self, t, a, e, k0, vf, hbar):
        self.t0 = float(t[0])
        self.dt = float(t[1] - t[0])
        self.n = len(t)
        self.val = vf * np.asarray(a, dtype=float) + hbar * vf * k0
        self.der = -vf * np.asarray(e, dtype=float)   # d/dt (vf*A) = -vf*E

    def __call__(self, time):
        x = (time - self.t0) / self.dt
        i = int(x)
        if i < 0:
            i = 0
        elif i > self.n - 2:
            i = self.n - 2
        s = x - i
        v0, v1 = self.val[i], self.val[i + 1]
        m0, m1 = self.der[i] * self.dt, self.der[i + 1] * self.dt
        s2 = s * s
        s3 = s2 * s
        return ((2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * m0
                + (-2 * s3 + 3 * s2) * v1 + (s3 - s2) * m1)


def _adaptive_loop(rhs, y, t_grid, n_comp, rtol, atol, out, check):
    """Shared interval-by-interval adaptive driver.  rhs(t, y, dy) fills dy;
    check(y) returns False to abort with STATUS_DRIFT."""
    n = len(t_grid)
    out[0] = y
    h = t_grid[1] - t_grid[0]
    k1 = [0.0] * n_comp
    k2 = [0.0] * n_comp
    k3 = [0.0] * n_comp
    k4 = [0.0] * n_comp
    k5 = [0.0] * n_comp
    k6 = [0.0] * n_comp
    ytmp = [0.0] * n_comp
    h_min_scale = 1e-14 * max(abs(t_grid[0]), abs(t_grid[-1]), 1.0)

    for i in range(n - 1):
        t = t_grid[i]
        t_end = t_grid[i + 1]
        while t < t_end:
            if h > t_end - t:
                h = t_end - t
            if h < h_min_scale:
                return STATUS_UNDERFLOW, t
            rhs(t, y, k1)
            for j in range(n_comp):
                ytmp[j] = y[j] + h * _A21 * k1[j]
            rhs(t + 0.2 * h, ytmp, k2)
            for j in range(n_comp):
                ytmp[j] = y[j] + h * (_A31 * k1[j] + _A32 * k2[j])
            rhs(t + 0.3 * h, ytmp, k3)
            for j in range(n_comp):
                ytmp[j] = y[j] + h * (_A41 * k1[j] + _A42 * k2[j] + _A43 * k3[j])
            rhs(t + 0.6 * h, ytmp, k4)
            for j in range(n_comp):
                ytmp[j] = y[j] + h * (_A51 * k1[j] + _A52 * k2[j]
                                      + _A53 * k3[j] + _A54 * k4[j])
            rhs(t + h, ytmp, k5)
            for j in range(n_comp):
                ytmp[j] = y[j] + h * (_A61 * k1[j] + _A62 * k2[j] + _A63 * k3[j]
                                      + _A64 * k4[j] + _A65 * k5[j])
            rhs(t + 0.875 * h, ytmp, k6)

            err = 0.0
            for j in range(n_comp):
                ynew = y[j] + h * (_B1 * k1[j] + _B3 * k3[j]
                                   + _B4 * k4[j] + _B6 * k6[j])
                eloc = h * (_E1 * k1[j] + _E3 * k3[j] + _E4 * k4[j]
                            + _E5 * k5[j] + _E6 * k6[j])
                sc = atol + rtol * max(abs(y[j]), abs(ynew))
                err += (abs(eloc) / sc) ** 2
                ytmp[j] = ynew
            err = math.sqrt(err / n_comp)

            if err <= 1.0:
                t += h
                for j in range(n_comp):
                    y[j] = ytmp[j]
                grow = _SAFETY * err ** -0.2 if err > 0 else _MAX_GROW
                h *= min(max(grow, _MIN_SHRINK), _MAX_GROW)
            else:
                h *= max(_SAFETY * err ** -0.2, _MIN_SHRINK)
        if not check(y):
            return STATUS_DRIFT, t_grid[i + 1]
        out[i + 1] = y
    return STATUS_OK, t_grid[-1]


def propagate_pure(t, a, e, k0, gap, vf, hbar, psi0, rtol, atol,
                   norm_abort=1e-6):
    """Integrate i hbar dpsi/dt = H(t) psi in the diabatic basis.

    H(t) = [[-gap/2, b(t)], [b(t), gap/2]], b(t) = hbar*v_F*(k0 + A(t)/hbar).
    Returns (psi[n, 2] complex, status, t_fail).
    """
    b = _CouplingInterp(t, a, e, k0, vf, hbar)
    inv_hbar = 1.0 / hbar
    half_gap = 0.5 * gap

    # components: [re1, im1, re2, im2]
    def rhs(time, y, dy):
        bb = b(time)
        # dpsi1 = (-i/hbar)(-half_gap*psi1 + bb*psi2)
        # dpsi2 = (-i/hbar)(bb*psi1 + half_gap*psi2)
        re1, im1, re2, im2 = y
        h1r = -half_gap * re1 + bb * re2
        h1i = -half_gap * im1 + bb * im2
        h2r = bb * re1 + half_gap * re2
        h2i = bb * im1 + half_gap * im2
        dy[0] = inv_hbar * h1i
        dy[1] = -inv_hbar * h1r
        dy[2] = inv_hbar * h2i
        dy[3] = -inv_hbar * h2r

    def check(y):
        norm = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]
        return abs(norm - 1.0) <= norm_abort

    y = [psi0[0].real, psi0[0].imag, psi0[1].real, psi0[1].imag]
    out = np.empty((len(t), 4))
    status, t_fail = _adaptive_loop(rhs, y, np.asarray(t, dtype=float), 4,
                                    rtol, atol, out, check)
    psi = out[:, 0] + 1j * out[:, 1], out[:, 2] + 1j * out[:, 3]
    return np.stack(psi, axis=1), status, t_fail


def propagate_bloch(t, a, e, k0, gap, vf, hbar, r0, t2_rate, rtol, atol,
                    drift_abort=2e-6):
    """Evolve the Bloch vector of rho = (I + r.sigma)/2 under
    dr/dt = (2/hbar) h x r - (1/T2) (r - (r.n) n),
    with h = (b(t), 0, -gap/2) and n = h/|h| (instantaneous eigenbasis
    dephasing).  Trace and Hermiticity are exact in this representation.
    Returns (r[n, 3], status, t_fail).
    """
    b = _CouplingInterp(t, a, e, k0, vf, hbar)
    two_inv_hbar = 2.0 / hbar
    hz = -0.5 * gap

    def rhs(time, y, dy):
        hx = b(time)
        rx, ry, rz = y
        dy[0] = two_inv_hbar * (-hz * ry)
        dy[1] = two_inv_hbar * (hz * rx - hx * rz)
        dy[2] = two_inv_hbar * (hx * ry)
        if t2_rate > 0.0:
            h2 = hx * hx + hz * hz
            if h2 > 0.0:
                proj = (rx * hx + rz * hz) / h2
                dy[0] -= t2_rate * (rx - proj * hx)
                dy[1] -= t2_rate * ry
                dy[2] -= t2_rate * (rz - proj * hz)

    def check(y):
        r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2]
        return r2 <= (1.0 + drift_abort) ** 2

    y = list(map(float, r0))
    out = np.empty((len(t), 3))
    status, t_fail = _adaptive_loop(rhs, y, np.asarray(t, dtype=float), 3,
                                    rtol, atol, out, check)
    return out, status, t_fail
