"""Effective Floquet Hamiltonian of the relative (unit-determinant) propagator.

For ``U_r = cos(th) I - i (sin(th)/th) H_F T`` the phase ``th`` is fixed by
the trace up to ``th -> +-th + 2 pi k``. The branch is chosen by unwrapping
along the propagation grid from ``th(0) = 0``, each step taking the candidate
nearest the linear extrapolation of the previous two. ``sin(th)`` is taken from the
determinant of the traceless part of ``U_r`` (``det = sin^2 th``), which
stays accurate where ``1 - cos^2`` would cancel.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .algebra import I2, PauliDecomp, expm_su2, max_abs_diff, pauli_decompose
from .errors import BranchAmbiguityError, InvalidInputError
from .evolution import default_steps, relative_products, relative_propagator_to
from .model import DriveProtocol
from .parallel import pmap

AMBIGUITY_TOL = 1e-6
DEGENERATE_SIN = 1e-3
BRANCH_WINDOW = 2
REVIVAL_TOL = 1e-4


def relative_propagator(proto: DriveProtocol, gamma: float, theta_k: float, T: float | None = None,
                        steps: int | None = None) -> np.ndarray:
    """U_r = exp(+gamma T) U'(theta_k, T); unit determinant."""
    if T is not None:
        proto = proto.with_duration(T)
    return relative_propagator_to(proto, gamma, theta_k, proto.T, steps)


def principal_phase(U: np.ndarray) -> tuple[complex, complex]:
    """Principal ``arccos(Tr U / 2)`` and its sine, for det U = 1.

    Same value as ``arccos_c(Tr U / 2)``; the sine is ``sqrt(det(U - c I))``
    on the principal branch, and the phase is ``-i log(c + i sin)``.
    """
    c = (U[0, 0] + U[1, 1]) / 2
    t00, t11 = U[0, 0] - c, U[1, 1] - c
    s = cmath.sqrt(t00 * t11 - U[0, 1] * U[1, 0])
    th = -1j * cmath.log(c + 1j * s)
    if th.real < 0 or (th.real == 0 and th.imag < 0):
        th, s = -th, -s
    return complex(th), complex(s)


def _unwrap_step(prev: complex, th0: complex, s0: complex) -> tuple[complex, complex]:
    """Pick the branch closest to the predicted phase ``prev``; return (phase, sin(phase))."""
    k0 = round(prev.real / (2 * math.pi))
    cands = []
    for k in range(k0 - BRANCH_WINDOW, k0 + BRANCH_WINDOW + 1):
        cands.append((th0 + 2 * math.pi * k, s0))
        cands.append((-th0 + 2 * math.pi * k, -s0))
    cands.sort(key=lambda c: abs(c[0] - prev))
    best, second = cands[0], cands[1]
    if abs(best[0] - second[0]) < AMBIGUITY_TOL and abs(best[0] + second[0]) > AMBIGUITY_TOL:
        # +-th twins at th ~ 0 give the same H_F; anything else is a real ambiguity
        raise BranchAmbiguityError(
            f"phase branches {best[0]:.6g} and {second[0]:.6g} are indistinguishable; use a finer grid"
        )
    return best


def _theta_over_sin(th: complex, s: complex) -> complex:
    if abs(th) < 0.5 and abs(s) < DEGENERATE_SIN:
        t2 = th * th
        return 1 + t2 / 6 + 7 * t2 * t2 / 360 + 31 * t2 * t2 * t2 / 15120
    return th / s


@dataclass(frozen=True)
class FloquetResult:
    T: float
    theta_phase: complex
    H_F: np.ndarray
    h: PauliDecomp
    proj: dict
    E_F: complex
    recon_residual: float
    theta_k: float = 0.0
    degenerate: bool = False
    max_phase_step: float = 0.0
    U_r: np.ndarray = field(default=None, repr=False)

    @property
    def residuals(self) -> tuple[float, float, float, float]:
        """(|Re h_perp|, |Re h_y|, |Im h_par|, |Im h_y|)."""
        p = self.proj
        return (abs(p["h_perp"].real), abs(p["h_y"].real), abs(p["h_par"].imag), abs(p["h_y"].imag))

    @property
    def residual(self) -> float:
        """Max of the four symmetry-breaking components over |E_F|."""
        scale = abs(self.E_F)
        if scale == 0.0:
            return math.inf
        return max(self.residuals) / scale

    @property
    def J_eff(self) -> float:
        return float(self.proj["h_par"].real)

    @property
    def gamma_eff(self) -> float:
        return float(self.proj["h_perp"].imag)


def axis_projections(H: np.ndarray, theta_k: float) -> dict:
    d = pauli_decompose(H)
    st, ct = math.sin(theta_k), math.cos(theta_k)
    return {
        "h_par": complex(st * d.hx - ct * d.hz),
        "h_perp": complex(ct * d.hx + st * d.hz),
        "h_y": complex(d.hy),
    }


def floquet_from_relative(Ur: np.ndarray, theta: complex, sin_theta: complex, T: float,
                          theta_k: float, fallback_dir: np.ndarray | None = None):
    """Rebuild H_F from U_r and an already-unwrapped phase."""
    c = (Ur[0, 0] + Ur[1, 1]) / 2
    traceless = Ur - c * I2
    degenerate = abs(sin_theta) < DEGENERATE_SIN and abs(theta) >= 0.5
    if degenerate and abs(sin_theta) < 1e-12 and fallback_dir is not None:
        H_F = (theta / T) * fallback_dir
    else:
        H_F = (1j / T) * _theta_over_sin(theta, sin_theta) * traceless
    return H_F, degenerate


def extract_floquet(proto: DriveProtocol, gamma: float, theta_k: float, T: float | None = None,
                    grid_resolution: float = 0.1, steps: int | None = None) -> FloquetResult:
    """Floquet Hamiltonian, dynamic phase and axis projections at duration ``T``."""
    if T is not None:
        proto = proto.with_duration(T)
    T = proto.T
    if grid_resolution > 0.5 or grid_resolution <= 0:
        raise InvalidInputError("grid_resolution must be in (0, 0.5] us")
    n_grid = max(1, int(math.ceil(T / grid_resolution)))
    base = default_steps(proto, gamma) if steps is None else int(steps)
    per = max(1, int(math.ceil(base / n_grid)))
    marks = np.arange(1, n_grid + 1) * per
    dt = T / marks[-1]
    Us = relative_products(proto, gamma, theta_k, 0.0, dt, marks)

    prev = before = 0j
    max_jump = 0.0
    direction = None
    for j, U in enumerate(Us):
        th0, s0 = principal_phase(U)
        # linear prediction: near th = pi the reflected principal value can sit
        # closer to the last phase than the true continuation does
        th, s = _unwrap_step(2 * prev - before if j else prev, th0, s0)
        max_jump = max(max_jump, abs(th - prev))
        before, prev = prev, th
        if j < len(Us) - 1 and abs(s) >= DEGENERATE_SIN:
            t_j = marks[j] * dt
            Hj = (1j / t_j) * (th / s) * (U - (U[0, 0] + U[1, 1]) / 2 * I2)
            E = th / t_j
            if E != 0:
                direction = Hj / E
    Ur = Us[-1]
    H_F, degenerate = floquet_from_relative(Ur, prev, s, T, theta_k, direction)
    recon = max_abs_diff(expm_su2(H_F - (H_F[0, 0] + H_F[1, 1]) / 2 * I2, T), Ur)
    return FloquetResult(
        T=T,
        theta_phase=complex(prev),
        H_F=H_F,
        h=pauli_decompose(H_F),
        proj=axis_projections(H_F, theta_k),
        E_F=complex(prev / T),
        recon_residual=recon,
        theta_k=float(theta_k),
        degenerate=degenerate,
        max_phase_step=float(max_jump),
        U_r=Ur,
    )


class ScanPoint(NamedTuple):
    T: float
    h_par: complex
    h_perp: complex
    h_y: complex
    residual: float


class RevivalRoot(NamedTuple):
    tau_rev: float
    residuals: tuple
    J_eff: float
    gamma_eff: float
    residual: float


@dataclass
class RevivalReport:
    roots: list
    scan: list
    symmetric_range: bool = False
    candidates: list = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [r.tau_rev for r in self.roots]


def find_revivals(proto: DriveProtocol, gamma: float, theta_k: float,
                  T_range: Sequence[float] = (10.0, 50.0), coarse_step: float = 0.5,
                  grid_resolution: float = 0.1, steps: int | None = None, tol: float = REVIVAL_TOL,
                  xtol: float = 1e-6) -> RevivalReport:
    """Scan R(T) on a coarse grid, refine each interior minimum, certify R < tol.

    A protocol whose residual stays below ``tol`` over the whole range is
    reported as ``symmetric_range`` with no individual roots.
    """
    lo, hi = float(T_range[0]), float(T_range[1])
    if not (0 < lo < hi <= 200):
        raise InvalidInputError("T_range must lie within (0, 200] with start < stop")
    if not (0 < coarse_step <= 1):
        raise InvalidInputError("coarse_step must be in (0, 1] us")
    if xtol > 1e-3:
        raise InvalidInputError("refinement width must be <= 1e-3 us")
    n = int(math.floor((hi - lo) / coarse_step + 1e-9))
    Ts = [lo + i * coarse_step for i in range(n + 1)]
    if Ts[-1] < hi - 1e-9:
        Ts.append(hi)

    def run(T):
        return extract_floquet(proto, gamma, theta_k, T, grid_resolution, steps)

    results = pmap(run, Ts)
    scan = [ScanPoint(r.T, r.proj["h_par"], r.proj["h_perp"], r.proj["h_y"], r.residual) for r in results]
    R = np.array([p.residual for p in scan])
    if np.all(R < tol):
        return RevivalReport([], scan, symmetric_range=True)

    roots, cands = [], []
    for i in range(1, len(Ts) - 1):
        if not (R[i] <= R[i - 1] and R[i] <= R[i + 1]):
            continue
        opt = minimize_scalar(lambda T: run(T).residual, bounds=(Ts[i - 1], Ts[i + 1]), method="bounded",
                              options={"xatol": xtol})
        best = run(float(opt.x))
        cands.append((best.T, best.residual))
        if best.residual < tol:
            if roots and abs(roots[-1].tau_rev - best.T) < 10 * xtol:
                continue
            roots.append(RevivalRoot(best.T, best.residuals, best.J_eff, best.gamma_eff, best.residual))
    return RevivalReport(roots, scan, symmetric_range=False, candidates=cands)
