"""Pure-Python propagation kernels (fallback for the compiled ``_ckernels``).

Both modules expose the same two functions with identical signatures and
semantics. Protocol codes: 0 = constant J, 1 = triangle ramp, 2 = sinusoidal
detuning; ``a``/``b`` are the two protocol parameters from
``DriveProtocol.kernel_args``.
"""

import cmath
import math

import numpy as np

BACKEND = "python"
_TAYLOR_SWITCH = 1e-4


def _schedule(code, a, b, T, t):
    if code == 0:
        return a, 0.0
    if code == 1:
        if t < 0.5 * T:
            return a + (b - a) * 2.0 * t / T, 0.0
        return a + (b - a) * 2.0 * (T - t) / T, 0.0
    return a, b * math.sin(2.0 * math.pi * t / T)


def ordered_products(code, a, b, T, gamma, theta_k, t0, dt, marks):
    """Midpoint time-ordered product of the rotated traceless generator.

    Starts from the identity at ``t0`` and records the accumulated propagator
    after ``marks[j]`` steps of width ``dt``. ``marks`` must be non-decreasing.
    Returns an array of shape ``(len(marks), 2, 2)``.
    """
    marks = [int(m) for m in marks]
    out = np.empty((len(marks), 2, 2), dtype=complex)
    st, ct = math.sin(theta_k), math.cos(theta_k)
    m00, m01, m10, m11 = 1 + 0j, 0j, 0j, 1 + 0j
    step = 0
    for j, stop in enumerate(marks):
        while step < stop:
            t = t0 + (step + 0.5) * dt
            J, D = _schedule(code, a, b, T, t)
            w = 0.5 * D + 1j * gamma
            hx = J * st + w * ct
            hz = -J * ct + w * st
            x = cmath.sqrt(hx * hx + hz * hz) * dt
            if abs(x) < _TAYLOR_SWITCH:
                x2 = x * x
                c = 1 - x2 / 2 + x2 * x2 / 24 - x2 * x2 * x2 / 720
                s = 1 - x2 / 6 + x2 * x2 / 120 - x2 * x2 * x2 / 5040
            else:
                c = cmath.cos(x)
                s = cmath.sin(x) / x
            f = -1j * s * dt
            s00 = c + f * hz
            s11 = c - f * hz
            s01 = f * hx
            m00, m01, m10, m11 = (
                s00 * m00 + s01 * m10,
                s00 * m01 + s01 * m11,
                s01 * m00 + s11 * m10,
                s01 * m01 + s11 * m11,
            )
            step += 1
        out[j, 0, 0] = m00
        out[j, 0, 1] = m01
        out[j, 1, 0] = m10
        out[j, 1, 1] = m11
    return out


def _lindblad_rhs(H, rho, g4):
    drho = -1j * (H @ rho - rho @ H)
    # L = sqrt(4 gamma) |a><1| with basis order (|0>, |1>, |a>)
    drho[2, 2] += g4 * rho[1, 1]
    drho[1, :] -= 0.5 * g4 * rho[1, :]
    drho[:, 1] -= 0.5 * g4 * rho[:, 1]
    return drho


def lindblad_rk4(code, a, b, T, gamma, rho0, t0, dt, steps):
    """Classical RK4 for the three-level master equation; returns the 3x3 state."""
    rho = np.array(rho0, dtype=complex)
    g4 = 4.0 * gamma
    H = np.zeros((3, 3), dtype=complex)

    def ham(t):
        J, D = _schedule(code, a, b, T, t)
        H[0, 1] = H[1, 0] = J
        H[0, 0] = 0.5 * D
        H[1, 1] = -0.5 * D
        return H.copy()

    for n in range(int(steps)):
        t = t0 + n * dt
        H0 = ham(t)
        Hm = ham(t + 0.5 * dt)
        H1 = ham(t + dt)
        k1 = _lindblad_rhs(H0, rho, g4)
        k2 = _lindblad_rhs(Hm, rho + 0.5 * dt * k1, g4)
        k3 = _lindblad_rhs(Hm, rho + 0.5 * dt * k2, g4)
        k4 = _lindblad_rhs(H1, rho + dt * k3, g4)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho
