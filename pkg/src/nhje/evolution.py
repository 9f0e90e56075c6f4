"""Time-ordered no-jump propagation and postselected transition statistics.

The propagator of the rotated Hamiltonian factors exactly into the global
decay ``exp(-gamma t)`` times the traceless ("relative") part, which is
built as a midpoint-sampled product of closed-form SU(2) exponentials.
Transition tables are indexed ``[f, i]`` with index 0 = ``+`` and
1 = ``-``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import AccuracyError, DomainError, ExtinctionError, InvalidInputError, NumericalError
from .model import DriveProtocol, energy_basis

LABELS = ("+", "-")
EXTINCTION_GUARD = 1e-300
MIN_STEPS = 2000


def default_steps(proto: DriveProtocol, gamma: float, t_end: float | None = None) -> int:
    T = proto.T if t_end is None else t_end
    rate = proto.J_peak + abs(proto.Delta1) / 2 + gamma
    return max(MIN_STEPS, int(math.ceil(200 * T * rate)))


def _check_range(proto: DriveProtocol, t_end: float) -> None:
    if not (0 < t_end <= proto.T * (1 + 1e-12)):
        raise DomainError(f"t_end = {t_end} outside (0, {proto.T}]")


def relative_products(proto, gamma, theta_k, t0, dt, marks) -> np.ndarray:
    """Relative propagators from ``t0`` after each count of steps in ``marks``."""
    code, a, b = proto.kernel_args()
    return kernels.ordered_products(
        code, float(a), float(b), float(proto.T), float(gamma), float(theta_k), float(t0), float(dt),
        np.asarray(marks, dtype=np.int64),
    )


def relative_propagator_to(proto, gamma, theta_k, t_end=None, steps=None) -> np.ndarray:
    """Traceless-generator propagator U_r(0 -> t_end); unit determinant."""
    t_end = proto.T if t_end is None else float(t_end)
    _check_range(proto, t_end)
    steps = default_steps(proto, gamma, t_end) if steps is None else int(steps)
    if steps < 1:
        raise DomainError("steps must be >= 1")
    return relative_products(proto, gamma, theta_k, 0.0, t_end / steps, [steps])[0]


def propagate(proto: DriveProtocol, gamma: float, theta_k: float, t_end: float | None = None,
              steps: int | None = None) -> np.ndarray:
    """Full no-jump propagator U'(0 -> t_end) including the global decay."""
    t_end = proto.T if t_end is None else float(t_end)
    Ur = relative_propagator_to(proto, gamma, theta_k, t_end, steps)
    return math.exp(-gamma * t_end) * Ur


def amplitudes(K: np.ndarray, theta_k: float) -> np.ndarray:
    """``A[f, i] = <e_f|K|e_i>`` in the theta_k energy basis."""
    eb = energy_basis(theta_k)
    V = np.column_stack([eb.e_plus, eb.e_minus])
    return V.conj().T @ K @ V


@dataclass(frozen=True)
class TransitionTable:
    p: np.ndarray
    S_plus: float
    S_minus: float
    P: np.ndarray
    theta_k: float
    T: float

    @classmethod
    def from_propagator(cls, K: np.ndarray, theta_k: float, T: float) -> "TransitionTable":
        p = np.abs(amplitudes(K, theta_k)) ** 2
        S = p.sum(axis=0)
        if np.any(S < EXTINCTION_GUARD):
            raise ExtinctionError(f"survival {S.min():.3e} below extinction guard at T = {T}")
        return cls(p, float(S[0]), float(S[1]), p / S, float(theta_k), float(T))

    @property
    def P_pp(self) -> float:
        return float(self.P[0, 0])

    @property
    def P_mm(self) -> float:
        return float(self.P[1, 1])

    @property
    def P_pm(self) -> float:
        """P_{+-}: start in -, end in +."""
        return float(self.P[0, 1])

    @property
    def P_mp(self) -> float:
        """P_{-+}: start in +, end in -."""
        return float(self.P[1, 0])

    @property
    def survival(self) -> np.ndarray:
        return np.array([self.S_plus, self.S_minus])


def transition_table(proto: DriveProtocol, gamma: float, theta_k: float, T: float | None = None,
                     steps: int | None = None, global_decay: bool = True) -> TransitionTable:
    """Postselected transition table after duration ``T`` (default ``proto.T``).

    ``global_decay=False`` drops the scalar ``exp(-gamma T)``; the normalized
    ``P`` is identical either way, only ``p`` and the survivals change.
    """
    if T is not None:
        proto = proto.with_duration(T)
    Ur = relative_propagator_to(proto, gamma, theta_k, proto.T, steps)
    K = math.exp(-gamma * proto.T) * Ur if global_decay else Ur
    return TransitionTable.from_propagator(K, theta_k, proto.T)


class BlochSample(NamedTuple):
    t: float
    n: np.ndarray
    source: str
    marker: str = ""


def bloch_vector(psi: np.ndarray) -> np.ndarray:
    a, b = psi
    return np.array([2 * (np.conj(a) * b).real, 2 * (np.conj(a) * b).imag, abs(a) ** 2 - abs(b) ** 2])


def bloch_trajectory(proto: DriveProtocol, gamma: float, theta_k: float, source: str,
                     samples: int = 100, steps: int | None = None) -> list[BlochSample]:
    """Bloch vectors of the normalized postselected state on ``samples`` times in [0, T]."""
    if samples < 2:
        raise InvalidInputError("samples must be >= 2")
    psi0 = energy_basis(theta_k).vector(source)
    base = default_steps(proto, gamma) if steps is None else int(steps)
    per = max(1, int(math.ceil(base / (samples - 1))))
    marks = np.arange(samples) * per
    dt = proto.T / marks[-1]
    Us = relative_products(proto, gamma, theta_k, 0.0, dt, marks)
    out = []
    for j, U in enumerate(Us):
        t = float(marks[j] * dt)
        psi = U @ psi0
        norm2 = float(np.vdot(psi, psi).real)
        if norm2 * math.exp(-2 * gamma * t) < EXTINCTION_GUARD:
            raise ExtinctionError(f"postselected norm vanished at t = {t}")
        marker = "initial" if j == 0 else ("final" if j == samples - 1 else "")
        out.append(BlochSample(t, bloch_vector(psi / math.sqrt(norm2)), source, marker))
    return out


class SurvivalPoint(NamedTuple):
    T: float
    S_plus: float
    S_minus: float
    norm_plus: float
    norm_minus: float


def survival_curve(proto: DriveProtocol, gamma: float, theta_k: float, T_grid: Sequence[float],
                   steps: int | None = None) -> list[SurvivalPoint]:
    """Relative survival (from U_r) and full norm (with exp(-2 gamma T)) per duration."""
    T_grid = list(T_grid)
    if not T_grid:
        raise InvalidInputError("T grid is empty")
    out = []
    for T in T_grid:
        pr = proto.with_duration(T)
        Ur = relative_propagator_to(pr, gamma, theta_k, pr.T, steps)
        S = np.sum(np.abs(amplitudes(Ur, theta_k)) ** 2, axis=0)
        env = math.exp(-2 * gamma * pr.T)
        out.append(SurvivalPoint(pr.T, float(S[0]), float(S[1]), float(S[0] * env), float(S[1] * env)))
    return out


def piecewise_evolution(proto: DriveProtocol, gamma: float, theta_k: float, T: float | None = None,
                        segments: int = 1, steps: int | None = None) -> TransitionTable:
    """Segmented evolution with exact re-initialization at each segment start.

    Segment ``n`` starts from the normalized predicted state at ``t_{n-1}`` and
    evolves for ``T / N`` under the same time-dependent Hamiltonian. The
    returned table carries the final segment's own survivals (what a single
    experimental run of that segment retains); its normalized ``P`` equals the
    continuous table.
    """
    if segments < 1:
        raise InvalidInputError("segments must be >= 1")
    if T is not None:
        proto = proto.with_duration(T)
    base = default_steps(proto, gamma) if steps is None else int(steps)
    per = max(1, int(math.ceil(base / segments)))
    dt = proto.T / (per * segments)
    seg_dt = proto.T / segments
    eb = energy_basis(theta_k)
    V = np.column_stack([eb.e_plus, eb.e_minus])
    states = V.copy()
    decay = math.exp(-2 * gamma * seg_dt)
    seg_surv = np.ones(2)
    for n in range(segments):
        U = relative_products(proto, gamma, theta_k, n * seg_dt, dt, [per])[0]
        out = U @ states
        norms = np.sum(np.abs(out) ** 2, axis=0)
        seg_surv = norms * decay
        if np.any(seg_surv < EXTINCTION_GUARD):
            raise ExtinctionError(f"segment {n + 1} survival below extinction guard")
        states = out / np.sqrt(norms)
    P = np.abs(V.conj().T @ states) ** 2
    P = P / P.sum(axis=0)
    p = P * seg_surv
    return TransitionTable(p, float(seg_surv[0]), float(seg_surv[1]), P, float(theta_k), float(proto.T))


class LindbladResult(NamedTuple):
    qubit_block: np.ndarray
    leak_population: float
    defect: float


def lindblad_oracle(proto: DriveProtocol, gamma: float, rho0=None, T: float | None = None,
                    steps: int | None = None, tol: float = 1e-9) -> LindbladResult:
    """Three-level master equation with the leak channel sqrt(4 gamma)|a><1|.

    Works in the lab frame (levels |0>, |1>, |a>). The integration defect is
    estimated by comparing against a half-step-count run; exceeding ``tol``
    raises :class:`AccuracyError`.
    """
    if T is not None:
        proto = proto.with_duration(T)
    rho_q = np.diag([1.0, 0.0]).astype(complex) if rho0 is None else np.asarray(rho0, dtype=complex)
    if rho_q.shape != (2, 2):
        raise InvalidInputError("initial state must be a 2x2 density block")
    if steps is None:
        steps = 2 * default_steps(proto, gamma)
    steps = int(steps) + int(steps) % 2
    rho = np.zeros((3, 3), dtype=complex)
    rho[:2, :2] = rho_q
    code, a, b = proto.kernel_args()
    fine = kernels.lindblad_rk4(code, a, b, proto.T, gamma, rho, 0.0, proto.T / steps, steps)
    coarse = kernels.lindblad_rk4(code, a, b, proto.T, gamma, rho, 0.0, 2 * proto.T / steps, steps // 2)
    defect = float(np.max(np.abs(fine - coarse))) / 15.0
    if defect > tol:
        raise AccuracyError(f"Lindblad integration with {steps} steps misses tolerance {tol:g}", defect)
    trace_defect = abs(np.trace(fine) - np.trace(rho))
    if trace_defect > 1e-10:
        raise NumericalError(f"Lindblad trace drifted by {trace_defect:.3e}")
    block = fine[:2, :2].copy()
    return LindbladResult(block, float(fine[2, 2].real), defect)
