"""Gibbs weights, two-point-measurement work statistics and the Jarzynski check.

``beta`` only fixes the initial populations; no bath dynamics exist here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .evolution import TransitionTable

ROW_TOL = 1e-9


@dataclass(frozen=True)
class ThermalState:
    beta: float
    J_i: float
    P_plus: float
    P_minus: float
    Z: float

    @property
    def weights(self) -> np.ndarray:
        """Initial populations ordered (+, -)."""
        return np.array([self.P_plus, self.P_minus])


def gibbs(beta: float, J_i: float) -> ThermalState:
    if not math.isfinite(beta):
        raise InvalidInputError("beta must be finite")
    if J_i < 0:
        raise InvalidInputError("J_i must be non-negative")
    x = beta * J_i
    # e^{-2|x|} never overflows; the smaller weight is computed directly so it
    # keeps full relative precision, and small + (1 - small) == 1 exactly
    e = math.exp(-2 * abs(x))
    small = e / (1 + e)
    P_plus, P_minus = (small, 1.0 - small) if x >= 0 else (1.0 - small, small)
    Z = math.exp(abs(x)) * (1 + e) if abs(x) < 700 else math.inf
    return ThermalState(float(beta), float(J_i), P_plus, P_minus, Z)


@dataclass(frozen=True)
class WorkDistribution:
    support: np.ndarray
    probs: np.ndarray
    exp_work: float
    delta_F: float = 0.0
    beta: float = 0.0
    J_i: float = 0.0
    J_f: float = 0.0

    def mean_work(self) -> float:
        return float(np.dot(self.support, self.probs))


def _check_table(tt: TransitionTable) -> np.ndarray:
    P = np.asarray(tt.P, dtype=float)
    if P.shape != (2, 2) or not np.all(np.isfinite(P)):
        raise InvalidInputError("transition table must be a finite 2x2 array")
    if np.any(np.abs(P.sum(axis=0) - 1.0) > ROW_TOL) or np.any(P < -ROW_TOL):
        raise InvalidInputError("transition table columns are not normalized probabilities")
    return P


def _log_z(x: float) -> float:
    """log(e^x + e^-x) without overflow."""
    return abs(x) + math.log1p(math.exp(-2 * abs(x)))


def work_values(J_i: float, J_f: float) -> np.ndarray:
    """``W[f, i] = E_f - E_i`` with E_+ = +J, E_- = -J."""
    E_i = np.array([J_i, -J_i])
    E_f = np.array([J_f, -J_f])
    return E_f[:, None] - E_i[None, :]


def work_distribution(tt: TransitionTable, th: ThermalState, J_f: float | None = None) -> WorkDistribution:
    J_f = th.J_i if J_f is None else J_f
    P = _check_table(tt)
    W = work_values(th.J_i, J_f)
    joint = P * th.weights[None, :]
    tol = 1e-12 * max(th.J_i, J_f, 1e-300)
    support: list[float] = []
    probs: list[float] = []
    for w, q in sorted(zip(W.ravel(), joint.ravel())):
        if support and abs(w - support[-1]) <= tol:
            probs[-1] += q
        else:
            support.append(float(w))
            probs.append(float(q))
    support_a = np.array(support)
    probs_a = np.array(probs)
    exp_work = float(np.sum(probs_a * np.exp(-th.beta * support_a)))
    dF = 0.0
    if J_f != th.J_i and th.beta != 0:
        dF = -(_log_z(th.beta * J_f) - _log_z(th.beta * th.J_i)) / th.beta
    return WorkDistribution(support_a, probs_a, exp_work, dF, th.beta, th.J_i, J_f)


def exp_work_closed_form(tt: TransitionTable, th: ThermalState, J_f: float | None = None) -> float:
    """Two-term closed form of <exp(-beta W)> in the normalized probabilities."""
    J_f = th.J_i if J_f is None else J_f
    P = _check_table(tt)
    Ppp, Pmm, Ppm, Pmp = P[0, 0], P[1, 1], P[0, 1], P[1, 0]
    b = th.beta
    # 1/Z_i folded into the exponents to stay finite for large beta*J
    lz = _log_z(b * th.J_i)
    return float(
        math.exp(-b * J_f - lz) * (1 + Ppp - Pmm) + math.exp(b * J_f - lz) * (1 + Pmp - Ppm)
    )


def symmetry_residual(tt: TransitionTable) -> tuple[float, float]:
    """(P_++ - P_--, P_+- - P_-+)."""
    P = np.asarray(tt.P)
    return float(P[0, 0] - P[1, 1]), float(P[0, 1] - P[1, 0])
