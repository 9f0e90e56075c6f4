"""Hybrid PT/APT Hamiltonian family, drive protocols and the rotated frame.

Units: rates and energies in rad/us, times in us. Angles in radians and
never reduced mod 2*pi internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .algebra import I2, SX, SZ
from .errors import DomainError, InvalidInputError

CONSTANT_J = "ConstantJ"
TRIANGLE_J = "TriangleJ"
SIN_DETUNING = "SinDetuning"
PROTOCOL_KINDS = (CONSTANT_J, TRIANGLE_J, SIN_DETUNING)
_T_SLACK = 1e-12


@dataclass(frozen=True)
class HybridParams:
    J: float
    gamma: float
    theta_k: float

    def __post_init__(self):
        if self.J < 0 or self.gamma < 0:
            raise InvalidInputError("J and gamma must be non-negative")


@dataclass(frozen=True)
class DriveProtocol:
    """One of the three (J(t), Delta(t)) schedules over a duration ``T``.

    Use the ``constant``/``triangle``/``sin_detuning`` constructors; only the
    fields belonging to ``kind`` are meaningful.
    """

    kind: str
    T: float
    J1: float = 0.0
    Jmin: float = 0.0
    Jmax: float = 0.0
    J2: float = 0.0
    Delta1: float = 0.0

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise InvalidInputError(f"unknown protocol kind {self.kind!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidInputError("protocol duration T must be positive")
        if self.kind == CONSTANT_J and self.J1 < 0:
            raise InvalidInputError("J1 must be non-negative")
        if self.kind == TRIANGLE_J and not (self.Jmax >= self.Jmin >= 0):
            raise InvalidInputError("TriangleJ needs Jmax >= Jmin >= 0")
        if self.kind == SIN_DETUNING and self.J2 < 0:
            raise InvalidInputError("J2 must be non-negative")

    @classmethod
    def constant(cls, J1: float, T: float) -> "DriveProtocol":
        return cls(CONSTANT_J, T, J1=J1)

    @classmethod
    def triangle(cls, Jmin: float, Jmax: float, T: float) -> "DriveProtocol":
        return cls(TRIANGLE_J, T, Jmin=Jmin, Jmax=Jmax)

    @classmethod
    def sin_detuning(cls, J2: float, Delta1: float, T: float) -> "DriveProtocol":
        return cls(SIN_DETUNING, T, J2=J2, Delta1=Delta1)

    def with_duration(self, T: float) -> "DriveProtocol":
        return replace(self, T=float(T))

    @property
    def detuned(self) -> bool:
        return self.kind == SIN_DETUNING and self.Delta1 != 0.0

    def coupling(self, t: float) -> float:
        if self.kind == CONSTANT_J:
            return self.J1
        if self.kind == TRIANGLE_J:
            if t < self.T / 2:
                return self.Jmin + (self.Jmax - self.Jmin) * 2 * t / self.T
            return self.Jmin + (self.Jmax - self.Jmin) * 2 * (self.T - t) / self.T
        return self.J2

    def detuning(self, t: float) -> float:
        if self.kind == SIN_DETUNING:
            return self.Delta1 * math.sin(2 * math.pi * t / self.T)
        return 0.0

    @property
    def J_initial(self) -> float:
        return self.coupling(0.0)

    @property
    def J_final(self) -> float:
        return self.coupling(self.T)

    @property
    def J_peak(self) -> float:
        return {CONSTANT_J: self.J1, TRIANGLE_J: self.Jmax, SIN_DETUNING: self.J2}[self.kind]

    def kernel_args(self) -> tuple[int, float, float]:
        """(kind code, a, b) as consumed by the compiled propagation kernels."""
        if self.kind == CONSTANT_J:
            return 0, self.J1, 0.0
        if self.kind == TRIANGLE_J:
            return 1, self.Jmin, self.Jmax
        return 2, self.J2, self.Delta1

    CONFIG_FIELDS = {
        CONSTANT_J: ("J1",),
        TRIANGLE_J: ("Jmin", "Jmax"),
        SIN_DETUNING: ("J2", "Delta1"),
    }

    def to_config(self) -> dict[str, str]:
        out = {"kind": self.kind}
        for name in self.CONFIG_FIELDS[self.kind]:
            out[name] = repr(float(getattr(self, name)))
        out["T"] = repr(float(self.T))
        return out

    @classmethod
    def from_config(cls, fields: Mapping[str, object], T: float | None = None) -> "DriveProtocol":
        kind = str(fields.get("kind", "")).strip()
        if kind not in PROTOCOL_KINDS:
            raise InvalidInputError(f"unknown protocol kind {kind!r}")
        kwargs = {}
        for name in cls.CONFIG_FIELDS[kind]:
            if name not in fields:
                raise InvalidInputError(f"protocol {kind} needs field {name!r}")
            kwargs[name] = float(fields[name])
        if T is None:
            T = float(fields.get("T", 1.0))
        return cls(kind, float(T), **kwargs)


@dataclass(frozen=True)
class EnergyBasis:
    e_minus: np.ndarray
    e_plus: np.ndarray
    n_HM: np.ndarray

    def vector(self, label: str) -> np.ndarray:
        if label == "+":
            return self.e_plus
        if label == "-":
            return self.e_minus
        raise InvalidInputError(f"eigenstate label must be '+' or '-', got {label!r}")


def sigma_par(theta_k: float) -> np.ndarray:
    """Hermitian driving axis ``sin(th) X - cos(th) Z``."""
    return math.sin(theta_k) * SX - math.cos(theta_k) * SZ


def sigma_perp(theta_k: float) -> np.ndarray:
    """Dissipative axis ``cos(th) X + sin(th) Z``."""
    return math.cos(theta_k) * SX + math.sin(theta_k) * SZ


def h_pt(J: float, gamma: float) -> np.ndarray:
    return 1j * gamma * SZ + J * SX


def h_apt(J: float, gamma: float) -> np.ndarray:
    return 1j * gamma * SX - J * SZ


def hybrid_parts(p: HybridParams) -> tuple[np.ndarray, np.ndarray]:
    """(Hermitian part, anti-Hermitian part) of the hybrid Hamiltonian."""
    return p.J * sigma_par(p.theta_k), 1j * p.gamma * sigma_perp(p.theta_k)


def h_hybrid(p: HybridParams) -> np.ndarray:
    herm, anti = hybrid_parts(p)
    return herm + anti


def su2_rotation(theta_k: float) -> np.ndarray:
    """exp(+i theta_k Y / 2); conjugates the APT prototype onto the family."""
    c, s = math.cos(theta_k / 2), math.sin(theta_k / 2)
    return np.array([[c, s], [-s, c]], dtype=complex)


def energy_basis(theta_k: float) -> EnergyBasis:
    c, s = math.cos(theta_k / 2), math.sin(theta_k / 2)
    # sign convention fixed so that transition labels are not permuted
    e_minus = np.array([-c, s], dtype=complex)
    e_plus = np.array([s, c], dtype=complex)
    n_HM = np.array([math.sin(theta_k), 0.0, -math.cos(theta_k)])
    return EnergyBasis(e_minus, e_plus, n_HM)


def parity_exchange(theta_k: float) -> np.ndarray:
    return -math.sin(theta_k) * SZ - math.cos(theta_k) * SX


def _check_time(t: float, proto: DriveProtocol) -> None:
    if not (-_T_SLACK <= t <= proto.T * (1 + _T_SLACK) + _T_SLACK):
        raise DomainError(f"t = {t} outside [0, {proto.T}]")


def h_relative(t: float, proto: DriveProtocol, gamma: float) -> np.ndarray:
    """Traceless core ``J(t) X + (Delta(t)/2 + i gamma) Z``."""
    _check_time(t, proto)
    return proto.coupling(t) * SX + (proto.detuning(t) / 2 + 1j * gamma) * SZ


def h_total(t: float, proto: DriveProtocol, gamma: float) -> np.ndarray:
    """``J X + Delta Z / 2 - 2 i gamma |1><1|`` = relative core - i gamma I."""
    return h_relative(t, proto, gamma) - 1j * gamma * I2


def h_rotated_relative(t: float, proto: DriveProtocol, gamma: float, theta_k: float) -> np.ndarray:
    _check_time(t, proto)
    return proto.coupling(t) * sigma_par(theta_k) + (proto.detuning(t) / 2 + 1j * gamma) * sigma_perp(
        theta_k
    )


def h_rotated(t: float, proto: DriveProtocol, gamma: float, theta_k: float) -> np.ndarray:
    return h_rotated_relative(t, proto, gamma, theta_k) - 1j * gamma * I2


def frame_rotation(theta_k: float) -> np.ndarray:
    """Rotation taking the lab-frame ``h_total`` to ``h_rotated``.

    The lab frame already sits at theta_k = pi/2, so the pulse angle is
    ``theta_k - pi/2``.
    """
    return su2_rotation(theta_k - math.pi / 2)


__all__ = [
    "CONSTANT_J",
    "TRIANGLE_J",
    "SIN_DETUNING",
    "PROTOCOL_KINDS",
    "HybridParams",
    "DriveProtocol",
    "EnergyBasis",
    "sigma_par",
    "sigma_perp",
    "h_pt",
    "h_apt",
    "hybrid_parts",
    "h_hybrid",
    "su2_rotation",
    "energy_basis",
    "parity_exchange",
    "h_relative",
    "h_total",
    "h_rotated_relative",
    "h_rotated",
    "frame_rotation",
]
