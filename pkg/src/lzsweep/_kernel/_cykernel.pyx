# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled propagation kernel: Cash-Karp RK4(5) for the two-level TDSE and
the Bloch-vector master equation.  Mirrors _pykernel.py exactly; see there
for the algorithm description and status codes."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow

cnp.import_array()

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_DRIFT = 2

cdef int C_OK = 0, C_UNDERFLOW = 1, C_DRIFT = 2

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 3.0 / 10.0, A42 = -9.0 / 10.0, A43 = 6.0 / 5.0
cdef double A51 = -11.0 / 54.0, A52 = 5.0 / 2.0, A53 = -70.0 / 27.0, A54 = 35.0 / 27.0
cdef double A61 = 1631.0 / 55296.0, A62 = 175.0 / 512.0, A63 = 575.0 / 13824.0
cdef double A64 = 44275.0 / 110592.0, A65 = 253.0 / 4096.0
cdef double B1 = 37.0 / 378.0, B3 = 250.0 / 621.0, B4 = 125.0 / 594.0, B6 = 512.0 / 1771.0
cdef double E1 = B1 - 2825.0 / 27648.0
cdef double E3 = B3 - 18575.0 / 48384.0
cdef double E4 = B4 - 13525.0 / 55296.0
cdef double E5 = -277.0 / 14336.0
cdef double E6 = B6 - 1.0 / 4.0
cdef double SAFETY = 0.9, MIN_SHRINK = 0.2, MAX_GROW = 5.0


cdef inline double interp_coupling(double time, double t0, double dt, Py_ssize_t n,
                                   double* val, double* der) noexcept nogil:
    cdef double x = (time - t0) / dt
    cdef Py_ssize_t i = <Py_ssize_t> x
    if i < 0:
        i = 0
    elif i > n - 2:
        i = n - 2
    cdef double s = x - i
    cdef double v0 = val[i], v1 = val[i + 1]
    cdef double m0 = der[i] * dt, m1 = der[i + 1] * dt
    cdef double s2 = s * s
    cdef double s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * m0
            + (-2 * s3 + 3 * s2) * v1 + (s3 - s2) * m1)


cdef inline void rhs_pure(double time, double* y, double* dy,
                          double t0, double dt, Py_ssize_t n,
                          double* val, double* der,
                          double half_gap, double inv_hbar) noexcept nogil:
    cdef double bb = interp_coupling(time, t0, dt, n, val, der)
    cdef double h1r = -half_gap * y[0] + bb * y[2]
    cdef double h1i = -half_gap * y[1] + bb * y[3]
    cdef double h2r = bb * y[0] + half_gap * y[2]
    cdef double h2i = bb * y[1] + half_gap * y[3]
    dy[0] = inv_hbar * h1i
    dy[1] = -inv_hbar * h1r
    dy[2] = inv_hbar * h2i
    dy[3] = -inv_hbar * h2r


cdef inline void rhs_bloch(double time, double* y, double* dy,
                           double t0, double dt, Py_ssize_t n,
                           double* val, double* der,
                           double hz, double two_inv_hbar, double t2_rate) noexcept nogil:
    cdef double hx = interp_coupling(time, t0, dt, n, val, der)
    cdef double h2, proj
    dy[0] = two_inv_hbar * (-hz * y[1])
    dy[1] = two_inv_hbar * (hz * y[0] - hx * y[2])
    dy[2] = two_inv_hbar * (hx * y[1])
    if t2_rate > 0.0:
        h2 = hx * hx + hz * hz
        if h2 > 0.0:
            proj = (y[0] * hx + y[2] * hz) / h2
            dy[0] -= t2_rate * (y[0] - proj * hx)
            dy[1] -= t2_rate * y[1]
            dy[2] -= t2_rate * (y[2] - proj * hz)


def propagate_pure(cnp.ndarray[cnp.float64_t, ndim=1] t,
                   cnp.ndarray[cnp.float64_t, ndim=1] a,
                   cnp.ndarray[cnp.float64_t, ndim=1] e,
                   double k0, double gap, double vf, double hbar,
                   psi0, double rtol, double atol, double norm_abort=1e-6):
    """See _pykernel.propagate_pure."""
    cdef Py_ssize_t n = t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] val = vf * a + hbar * vf * k0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] der = -vf * e
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, 4))
    cdef double t0 = t[0], dt_grid = t[1] - t[0]
    cdef double half_gap = 0.5 * gap, inv_hbar = 1.0 / hbar

    cdef double y[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double ytmp[4]
    cdef double ynew[4]
    y[0] = psi0[0].real
    y[1] = psi0[0].imag
    y[2] = psi0[1].real
    y[3] = psi0[1].imag

    cdef double* pval = &val[0]
    cdef double* pder = &der[0]
    cdef double h = dt_grid
    cdef double h_min = 1e-14 * max(fabs(t[0]), fabs(t[n - 1]), 1.0)
    cdef double tc, t_end, err, eloc, sc, grow, norm
    cdef Py_ssize_t i, j
    cdef int status = C_OK
    cdef double t_fail = t[n - 1]

    for j in range(4):
        out[0, j] = y[j]

    with nogil:
        for i in range(n - 1):
            tc = t0 + i * dt_grid
            t_end = t0 + (i + 1) * dt_grid
            while tc < t_end:
                if h > t_end - tc:
                    h = t_end - tc
                if h < h_min:
                    status = C_UNDERFLOW
                    t_fail = tc
                    break
                rhs_pure(tc, y, k1, t0, dt_grid, n, pval, pder, half_gap, inv_hbar)
                for j in range(4):
                    ytmp[j] = y[j] + h * A21 * k1[j]
                rhs_pure(tc + 0.2 * h, ytmp, k2, t0, dt_grid, n, pval, pder, half_gap, inv_hbar)
                for j in range(4):
                    ytmp[j] = y[j] + h * (A31 * k1[j] + A32 * k2[j])
                rhs_pure(tc + 0.3 * h, ytmp, k3, t0, dt_grid, n, pval, pder, half_gap, inv_hbar)
                for j in range(4):
                    ytmp[j] = y[j] + h * (A41 * k1[j] + A42 * k2[j] + A43 * k3[j])
                rhs_pure(tc + 0.6 * h, ytmp, k4, t0, dt_grid, n, pval, pder, half_gap, inv_hbar)
                for j in range(4):
                    ytmp[j] = y[j] + h * (A51 * k1[j] + A52 * k2[j] + A53 * k3[j] + A54 * k4[j])
                rhs_pure(tc + h, ytmp, k5, t0, dt_grid, n, pval, pder, half_gap, inv_hbar)
                for j in range(4):
                    ytmp[j] = y[j] + h * (A61 * k1[j] + A62 * k2[j] + A63 * k3[j]
                                          + A64 * k4[j] + A65 * k5[j])
                rhs_pure(tc + 0.875 * h, ytmp, k6, t0, dt_grid, n, pval, pder, half_gap, inv_hbar)

                err = 0.0
                for j in range(4):
                    ynew[j] = y[j] + h * (B1 * k1[j] + B3 * k3[j] + B4 * k4[j] + B6 * k6[j])
                    eloc = h * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j])
                    sc = atol + rtol * max(fabs(y[j]), fabs(ynew[j]))
                    err += (eloc / sc) * (eloc / sc)
                err = sqrt(err / 4.0)

                if err <= 1.0:
                    tc += h
                    for j in range(4):
                        y[j] = ynew[j]
                    grow = SAFETY * pow(err, -0.2) if err > 0.0 else MAX_GROW
                    h *= min(max(grow, MIN_SHRINK), MAX_GROW)
                else:
                    h *= max(SAFETY * pow(err, -0.2), MIN_SHRINK)
            if status != C_OK:
                break
            norm = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]
            if fabs(norm - 1.0) > norm_abort:
                status = C_DRIFT
                t_fail = t_end
                break
            for j in range(4):
                out[i + 1, j] = y[j]

    psi = out[:, 0] + 1j * out[:, 1]
    psi2 = out[:, 2] + 1j * out[:, 3]
    return np.stack((psi, psi2), axis=1), status, t_fail


def propagate_bloch(cnp.ndarray[cnp.float64_t, ndim=1] t,
                    cnp.ndarray[cnp.float64_t, ndim=1] a,
                    cnp.ndarray[cnp.float64_t, ndim=1] e,
                    double k0, double gap, double vf, double hbar,
                    r0, double t2_rate, double rtol, double atol,
                    double drift_abort=2e-6):
    """See _pykernel.propagate_bloch."""
    cdef Py_ssize_t n = t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] val = vf * a + hbar * vf * k0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] der = -vf * e
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, 3))
    cdef double t0 = t[0], dt_grid = t[1] - t[0]
    cdef double hz = -0.5 * gap, two_inv_hbar = 2.0 / hbar

    cdef double y[3]
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double k5[3]
    cdef double k6[3]
    cdef double ytmp[3]
    cdef double ynew[3]
    y[0] = r0[0]
    y[1] = r0[1]
    y[2] = r0[2]

    cdef double* pval = &val[0]
    cdef double* pder = &der[0]
    cdef double h = dt_grid
    cdef double h_min = 1e-14 * max(fabs(t[0]), fabs(t[n - 1]), 1.0)
    cdef double tc, t_end, err, eloc, sc, grow, r2
    cdef double lim = (1.0 + drift_abort) * (1.0 + drift_abort)
    cdef Py_ssize_t i, j
    cdef int status = C_OK
    cdef double t_fail = t[n - 1]

    for j in range(3):
        out[0, j] = y[j]

    with nogil:
        for i in range(n - 1):
            tc = t0 + i * dt_grid
            t_end = t0 + (i + 1) * dt_grid
            while tc < t_end:
                if h > t_end - tc:
                    h = t_end - tc
                if h < h_min:
                    status = C_UNDERFLOW
                    t_fail = tc
                    break
                rhs_bloch(tc, y, k1, t0, dt_grid, n, pval, pder, hz, two_inv_hbar, t2_rate)
                for j in range(3):
                    ytmp[j] = y[j] + h * A21 * k1[j]
                rhs_bloch(tc + 0.2 * h, ytmp, k2, t0, dt_grid, n, pval, pder, hz, two_inv_hbar, t2_rate)
                for j in range(3):
                    ytmp[j] = y[j] + h * (A31 * k1[j] + A32 * k2[j])
                rhs_bloch(tc + 0.3 * h, ytmp, k3, t0, dt_grid, n, pval, pder, hz, two_inv_hbar, t2_rate)
                for j in range(3):
                    ytmp[j] = y[j] + h * (A41 * k1[j] + A42 * k2[j] + A43 * k3[j])
                rhs_bloch(tc + 0.6 * h, ytmp, k4, t0, dt_grid, n, pval, pder, hz, two_inv_hbar, t2_rate)
                for j in range(3):
                    ytmp[j] = y[j] + h * (A51 * k1[j] + A52 * k2[j] + A53 * k3[j] + A54 * k4[j])
                rhs_bloch(tc + h, ytmp, k5, t0, dt_grid, n, pval, pder, hz, two_inv_hbar, t2_rate)
                for j in range(3):
                    ytmp[j] = y[j] + h * (A61 * k1[j] + A62 * k2[j] + A63 * k3[j]
                                          + A64 * k4[j] + A65 * k5[j])
                rhs_bloch(tc + 0.875 * h, ytmp, k6, t0, dt_grid, n, pval, pder, hz, two_inv_hbar, t2_rate)

                err = 0.0
                for j in range(3):
                    ynew[j] = y[j] + h * (B1 * k1[j] + B3 * k3[j] + B4 * k4[j] + B6 * k6[j])
                    eloc = h * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j])
                    sc = atol + rtol * max(fabs(y[j]), fabs(ynew[j]))
                    err += (eloc / sc) * (eloc / sc)
                err = sqrt(err / 3.0)

                if err <= 1.0:
                    tc += h
                    for j in range(3):
                        y[j] = ynew[j]
                    grow = SAFETY * pow(err, -0.2) if err > 0.0 else MAX_GROW
                    h *= min(max(grow, MIN_SHRINK), MAX_GROW)
                else:
                    h *= max(SAFETY * pow(err, -0.2), MIN_SHRINK)
            if status != C_OK:
                break
            r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2]
            if r2 > lim:
                status = C_DRIFT
                t_fail = t_end
                break
            for j in range(3):
                out[i + 1, j] = y[j]

    return out, status, t_fail
