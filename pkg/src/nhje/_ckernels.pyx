# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernels; mirror of ``_pykernels`` (same signatures)."""

import numpy as np
cimport numpy as cnp

from libc.math cimport sin, cos, M_PI

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex ccos(double complex)
    double complex csin(double complex)
    double cabs(double complex)

cnp.import_array()

BACKEND = "cython"

cdef double TAYLOR_SWITCH = 1e-4


cdef inline void schedule(int code, double a, double b, double T, double t,
                          double* J, double* D) noexcept nogil:
    if code == 0:
        J[0] = a
        D[0] = 0.0
    elif code == 1:
        if t < 0.5 * T:
            J[0] = a + (b - a) * 2.0 * t / T
        else:
            J[0] = a + (b - a) * 2.0 * (T - t) / T
        D[0] = 0.0
    else:
        J[0] = a
        D[0] = b * sin(2.0 * M_PI * t / T)


def ordered_products(int code, double a, double b, double T, double gamma,
                     double theta_k, double t0, double dt, marks):
    cdef cnp.int64_t[::1] mk = np.ascontiguousarray(marks, dtype=np.int64)
    cdef Py_ssize_t nm = mk.shape[0]
    out = np.empty((nm, 2, 2), dtype=np.complex128)
    cdef double complex[:, :, ::1] o = out
    cdef double st = sin(theta_k)
    cdef double ct = cos(theta_k)
    cdef double complex m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0
    cdef double complex n00, n01, n10, n11
    cdef double complex w, hx, hz, x, x2, c, s, f, s00, s11, s01
    cdef double J, D, t
    cdef cnp.int64_t step = 0, stop
    cdef Py_ssize_t j
    cdef double complex I = 1j
    with nogil:
        for j in range(nm):
            stop = mk[j]
            while step < stop:
                t = t0 + (step + 0.5) * dt
                schedule(code, a, b, T, t, &J, &D)
                w = 0.5 * D + I * gamma
                hx = J * st + w * ct
                hz = -J * ct + w * st
                x = csqrt(hx * hx + hz * hz) * dt
                if cabs(x) < TAYLOR_SWITCH:
                    x2 = x * x
                    c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0 - x2 * x2 * x2 / 720.0
                    s = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
                else:
                    c = ccos(x)
                    s = csin(x) / x
                f = -I * s * dt
                s00 = c + f * hz
                s11 = c - f * hz
                s01 = f * hx
                n00 = s00 * m00 + s01 * m10
                n01 = s00 * m01 + s01 * m11
                n10 = s01 * m00 + s11 * m10
                n11 = s01 * m01 + s11 * m11
                m00 = n00
                m01 = n01
                m10 = n10
                m11 = n11
                step += 1
            o[j, 0, 0] = m00
            o[j, 0, 1] = m01
            o[j, 1, 0] = m10
            o[j, 1, 1] = m11
    return out


cdef inline void lindblad_rhs(double J, double D, double g4,
                              double complex[:, ::1] r,
                              double complex[:, ::1] out) noexcept nogil:
    # H rho - rho H with H = [[D/2, J, 0], [J, -D/2, 0], [0, 0, 0]]
    cdef Py_ssize_t i, k
    cdef double complex I = 1j
    cdef double h[3][3]
    h[0][0] = 0.5 * D
    h[0][1] = J
    h[0][2] = 0.0
    h[1][0] = J
    h[1][1] = -0.5 * D
    h[1][2] = 0.0
    h[2][0] = 0.0
    h[2][1] = 0.0
    h[2][2] = 0.0
    cdef double complex acc
    for i in range(3):
        for k in range(3):
            acc = (h[i][0] * r[0, k] + h[i][1] * r[1, k] + h[i][2] * r[2, k]
                   - r[i, 0] * h[0][k] - r[i, 1] * h[1][k] - r[i, 2] * h[2][k])
            out[i, k] = -I * acc
    out[2, 2] = out[2, 2] + g4 * r[1, 1]
    for k in range(3):
        out[1, k] = out[1, k] - 0.5 * g4 * r[1, k]
    for i in range(3):
        out[i, 1] = out[i, 1] - 0.5 * g4 * r[i, 1]


def lindblad_rk4(int code, double a, double b, double T, double gamma,
                 rho0, double t0, double dt, long steps):
    rho_arr = np.array(rho0, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] rho = rho_arr
    cdef double complex[:, ::1] k1 = np.zeros((3, 3), dtype=np.complex128)
    cdef double complex[:, ::1] k2 = np.zeros((3, 3), dtype=np.complex128)
    cdef double complex[:, ::1] k3 = np.zeros((3, 3), dtype=np.complex128)
    cdef double complex[:, ::1] k4 = np.zeros((3, 3), dtype=np.complex128)
    cdef double complex[:, ::1] tmp = np.zeros((3, 3), dtype=np.complex128)
    cdef double g4 = 4.0 * gamma
    cdef double J0, D0, Jm, Dm, J1, D1, t
    cdef long n
    cdef Py_ssize_t i, k
    with nogil:
        for n in range(steps):
            t = t0 + n * dt
            schedule(code, a, b, T, t, &J0, &D0)
            schedule(code, a, b, T, t + 0.5 * dt, &Jm, &Dm)
            schedule(code, a, b, T, t + dt, &J1, &D1)
            lindblad_rhs(J0, D0, g4, rho, k1)
            for i in range(3):
                for k in range(3):
                    tmp[i, k] = rho[i, k] + 0.5 * dt * k1[i, k]
            lindblad_rhs(Jm, Dm, g4, tmp, k2)
            for i in range(3):
                for k in range(3):
                    tmp[i, k] = rho[i, k] + 0.5 * dt * k2[i, k]
            lindblad_rhs(Jm, Dm, g4, tmp, k3)
            for i in range(3):
                for k in range(3):
                    tmp[i, k] = rho[i, k] + dt * k3[i, k]
            lindblad_rhs(J1, D1, g4, tmp, k4)
            for i in range(3):
                for k in range(3):
                    rho[i, k] = rho[i, k] + (dt / 6.0) * (k1[i, k] + 2.0 * k2[i, k]
                                                          + 2.0 * k3[i, k] + k4[i, k])
    return rho_arr
