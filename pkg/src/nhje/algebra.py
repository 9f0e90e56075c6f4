"""Exact 2x2 complex matrix kernel.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype
``complex128``. Everything here is a pure function.

The closed-form exponential uses the SU(2) identity

    exp(-i H t) = cos(E t) I - i sinc(E t) (H t),    E = sqrt(hx^2 + hy^2 + hz^2)

valid for any traceless ``H``. The square root is the principal complex
branch; both ``cos`` and ``sinc`` are even functions, so the result does not
depend on which root is taken.
"""

from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, PreconditionError

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# |E t| below this uses the Taylor branch of cos / sinc.
TAYLOR_SWITCH = 1e-4
TRACELESS_RTOL = 1e-12


class PauliDecomp(NamedTuple):
    """Coefficients of ``M = h0 I + hx X + hy Y + hz Z``."""

    h0: complex
    hx: complex
    hy: complex
    hz: complex

    def vector(self) -> np.ndarray:
        return np.array([self.hx, self.hy, self.hz], dtype=complex)

    def matrix(self) -> np.ndarray:
        return self.h0 * I2 + self.hx * SX + self.hy * SY + self.hz * SZ


def as_mat2(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    return A


def pauli_decompose(M) -> PauliDecomp:
    A = as_mat2(M)
    a11, a12, a21, a22 = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    return PauliDecomp(
        complex((a11 + a22) / 2),
        complex((a12 + a21) / 2),
        complex(1j * (a12 - a21) / 2),
        complex((a11 - a22) / 2),
    )


def pauli_compose(h0, hx, hy, hz) -> np.ndarray:
    return PauliDecomp(h0, hx, hy, hz).matrix()


def cos_sinc(x: complex) -> tuple[complex, complex]:
    """Return ``(cos x, sin x / x)`` for complex ``x``, stable near zero."""
    if abs(x) < TAYLOR_SWITCH:
        x2 = x * x
        c = 1 - x2 / 2 + x2 * x2 / 24 - x2 * x2 * x2 / 720
        s = 1 - x2 / 6 + x2 * x2 / 120 - x2 * x2 * x2 / 5040
        return c, s
    return cmath.cos(x), cmath.sin(x) / x


def _scale(A: np.ndarray) -> float:
    return float(np.max(np.abs(A)))


def expm_su2(H, t: float) -> np.ndarray:
    """exp(-i H t) for traceless ``H`` via the closed SU(2) form."""
    A = as_mat2(H)
    tr = A[0, 0] + A[1, 1]
    if abs(tr) > TRACELESS_RTOL * max(_scale(A), 1e-300):
        raise PreconditionError(
            f"expm_su2 needs a traceless matrix (|Tr H| = {abs(tr):.3e}); use expm_general"
        )
    hx = (A[0, 1] + A[1, 0]) / 2
    hy = 1j * (A[0, 1] - A[1, 0]) / 2
    hz = (A[0, 0] - A[1, 1]) / 2
    E = cmath.sqrt(hx * hx + hy * hy + hz * hz)
    c, s = cos_sinc(E * t)
    Ht = (A - (tr / 2) * I2) * t
    return c * I2 - 1j * s * Ht


def expm_series(H, t: float, degree: int = 30) -> np.ndarray:
    """Scaling-and-squaring Taylor oracle for exp(-i H t).

    Independent of the closed form; used only for cross-checks. Scaling only
    down to norm 1 keeps the squaring count (and its rounding growth on
    non-unitary exponentials) small; degree 30 leaves a 1/31! remainder.
    """
    A = -1j * t * as_mat2(H)
    norm = float(np.max(np.sum(np.abs(A), axis=1)))
    squarings = 0
    if norm > 1.0:
        squarings = int(math.ceil(math.log2(norm)))
    B = A / 2.0**squarings
    out = I2.copy()
    term = I2.copy()
    for k in range(1, degree + 1):
        term = term @ B / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def expm_general(H, t: float, oracle: bool = False) -> np.ndarray:
    """exp(-i H t) for any finite 2x2 ``H``.

    The trace part is split off as a scalar phase/decay factor; ``oracle=True``
    routes through :func:`expm_series` instead.
    """
    A = as_mat2(H)
    if oracle:
        return expm_series(A, t)
    half_tr = (A[0, 0] + A[1, 1]) / 2
    traceless = A - half_tr * I2
    K = expm_su2(traceless, t)
    return cmath.exp(-1j * t * half_tr) * K


def arccos_c(z: complex) -> complex:
    """Principal complex arccos, ``-i log(z + i sqrt(1 - z^2))``.

    Real arguments in [-1, 1] return real values in [0, pi].
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidInputError("arccos_c needs a finite argument")
    if z.imag == 0.0 and -1.0 <= z.real <= 1.0:
        return complex(math.acos(z.real), 0.0)
    s = cmath.sqrt((1 - z) * (1 + z))
    a, b = z + 1j * s, z - 1j * s
    # a * b = 1; take the log of the larger factor to avoid cancellation
    w = -1j * cmath.log(a) if abs(a) >= abs(b) else 1j * cmath.log(b)
    # keep Re in [0, pi] on the cut continuation
    if w.real < 0:
        w = -w
    return w


def dagger(A) -> np.ndarray:
    return np.conj(np.asarray(A)).T


def max_abs_diff(A, B) -> float:
    return float(np.max(np.abs(np.asarray(A) - np.asarray(B))))
