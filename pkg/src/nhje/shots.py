"""Finite-shot emulation of the postselected two-point-measurement experiment.

Each block of each point draws from its own counter-based (Philox) stream,
keyed by the master seed, the point key and the block index, so results do
not depend on evaluation order.

Error bars are block standard errors: the spread of the per-block estimates
divided by sqrt(valid blocks).
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .evolution import TransitionTable, piecewise_evolution, transition_table
from .model import DriveProtocol
from .thermo import ThermalState, exp_work_closed_form, gibbs, work_values


@dataclass(frozen=True)
class ShotConfig:
    shots_per_point: int = 4500
    blocks: int = 15
    seed: int = 0
    mode: str = "continuous"
    segments: int = 1
    allocation: str = "per_initial"
    sampling: str = "weighted"
    drift: tuple[float, float] | None = None

    def __post_init__(self):
        if self.blocks < 1 or self.shots_per_point < 1:
            raise InvalidInputError("shots_per_point and blocks must be positive")
        if self.shots_per_point % self.blocks:
            raise InvalidInputError("shots_per_point must be divisible by blocks")
        if self.mode not in ("continuous", "piecewise"):
            raise InvalidInputError(f"unknown shot mode {self.mode!r}")
        if self.mode == "piecewise" and self.segments < 1:
            raise InvalidInputError("piecewise mode needs segments >= 1")
        if self.allocation not in ("per_initial", "split"):
            raise InvalidInputError(f"unknown shot allocation {self.allocation!r}")
        if self.sampling not in ("weighted", "thermal"):
            raise InvalidInputError(f"unknown sampling {self.sampling!r}")
        if self.allocation == "split" and (self.shots_per_point // self.blocks) % 2:
            raise InvalidInputError("split allocation needs an even number of shots per block")

    @classmethod
    def parse_mode(cls, text: str) -> tuple[str, int]:
        text = text.strip()
        if text == "continuous":
            return "continuous", 1
        m = re.fullmatch(r"piecewise\(\s*(\d+)\s*\)", text)
        if not m:
            raise InvalidInputError(f"mode must be 'continuous' or 'piecewise(N)', got {text!r}")
        return "piecewise", int(m.group(1))

    @property
    def mode_label(self) -> str:
        return "continuous" if self.mode == "continuous" else f"piecewise({self.segments})"


@dataclass
class ShotEstimate:
    T: float
    theta_k: float
    counts: dict
    P_hat: np.ndarray
    P_std: np.ndarray
    exp_work_hat: float
    exp_work_std: float
    block_P: np.ndarray = field(repr=False)
    valid_blocks: np.ndarray = field(repr=False)
    P_spread: np.ndarray = field(repr=False)
    flagged: bool = False

    @property
    def dP_hat(self) -> float:
        return float(self.P_hat[0, 0] - self.P_hat[1, 1])

    @property
    def dP_std(self) -> float:
        d = self.block_P[self.valid_blocks, 0, 0] - self.block_P[self.valid_blocks, 1, 1]
        if len(d) < 2:
            return math.nan
        return float(np.std(d, ddof=1) / math.sqrt(len(d)))


def point_key(T: float, theta_k: float) -> tuple[int, ...]:
    """Stable integer words identifying a (T, theta_k) point."""
    return struct.unpack("<4I", struct.pack("<dd", float(T), float(theta_k)))


def block_rng(seed: int, key, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *key, int(block)])
    return np.random.Generator(np.random.Philox(ss))


def _deterministic(proto, gamma, theta_k, T, cfg, steps):
    if cfg.mode == "piecewise":
        return piecewise_evolution(proto, gamma, theta_k, T, cfg.segments, steps)
    return transition_table(proto, gamma, theta_k, T, steps)


def _perturbed(proto: DriveProtocol, gamma: float, rng, drift) -> tuple[DriveProtocol, float]:
    sJ, sg = drift
    fJ = max(0.0, 1 + sJ * rng.standard_normal())
    g = max(0.0, gamma * (1 + sg * rng.standard_normal()))
    kw = {}
    for name in ("J1", "Jmin", "Jmax", "J2"):
        kw[name] = getattr(proto, name) * fJ
    return DriveProtocol(proto.kind, proto.T, Delta1=proto.Delta1, **kw), g


def sample_point(proto: DriveProtocol, gamma: float, theta_k: float, T: float | None,
                 th: ThermalState, cfg: ShotConfig, steps: int | None = None,
                 table: TransitionTable | None = None, key=None) -> ShotEstimate:
    """Emulate one (theta_k, T) data point.

    ``table`` may supply the deterministic table (survivals and ``P``) to skip
    recomputation; it must correspond to ``cfg.mode``.
    """
    if T is not None:
        proto = proto.with_duration(T)
    T = proto.T
    base = table if table is not None else _deterministic(proto, gamma, theta_k, T, cfg, steps)
    key = point_key(T, theta_k) if key is None else key
    per_block = cfg.shots_per_point // cfg.blocks
    B = cfg.blocks

    outcomes = np.zeros((B, 2, 2), dtype=np.int64)  # [block, f, i]
    started = np.zeros((B, 2), dtype=np.int64)
    survived = np.zeros((B, 2), dtype=np.int64)
    ew_samples = np.zeros(B)
    for b in range(B):
        rng = block_rng(cfg.seed, key, b)
        tt = base
        if cfg.drift is not None:
            pr, g = _perturbed(proto, gamma, rng, cfg.drift)
            tt = _deterministic(pr, g, theta_k, T, cfg, steps)
        S = tt.survival
        if cfg.sampling == "thermal":
            n_plus = rng.binomial(per_block, th.P_plus)
            n = np.array([n_plus, per_block - n_plus])
        elif cfg.allocation == "split":
            n = np.array([per_block // 2, per_block // 2])
        else:
            n = np.array([per_block, per_block])
        for i in range(2):
            s = rng.binomial(n[i], min(1.0, max(0.0, S[i])))
            up = rng.binomial(s, min(1.0, max(0.0, tt.P[0, i])))
            started[b, i] = n[i]
            survived[b, i] = s
            outcomes[b, 0, i] = up
            outcomes[b, 1, i] = s - up
        if cfg.sampling == "thermal":
            W = work_values(th.J_i, th.J_i)
            tot = outcomes[b].sum()
            ew_samples[b] = np.sum(outcomes[b] * np.exp(-th.beta * W)) / tot if tot else math.nan

    valid = np.all(survived > 0, axis=1)
    flagged = not bool(np.all(valid))
    with np.errstate(invalid="ignore", divide="ignore"):
        block_P = outcomes / survived[:, None, :]
    if not np.any(valid):
        nan = np.full((2, 2), math.nan)
        return ShotEstimate(T, theta_k, _counts(started, survived, outcomes), nan, nan, math.nan, math.nan,
                            block_P, valid, nan, True)

    tot_out = outcomes[valid].sum(axis=0)
    tot_surv = survived[valid].sum(axis=0)
    P_hat = tot_out / tot_surv[None, :]
    nv = int(valid.sum())
    if nv > 1:
        spread = np.std(block_P[valid], axis=0, ddof=1)
        P_std = spread / math.sqrt(nv)
    else:
        spread = P_std = np.full((2, 2), math.nan)

    if cfg.sampling == "thermal":
        W = work_values(th.J_i, th.J_i)
        ew_hat = float(np.sum(tot_out * np.exp(-th.beta * W)) / tot_out.sum())
        ew_blocks = ew_samples[valid]
    else:
        ew_hat = exp_work_closed_form(_Table(P_hat), th)
        ew_blocks = np.array([exp_work_closed_form(_Table(bp), th) for bp in block_P[valid]])
    ew_std = float(np.std(ew_blocks, ddof=1) / math.sqrt(nv)) if nv > 1 else math.nan
    return ShotEstimate(T, theta_k, _counts(started, survived, outcomes), P_hat, P_std, ew_hat, ew_std,
                        block_P, valid, spread, flagged)


@dataclass(frozen=True)
class _Table:
    P: np.ndarray


def _counts(started, survived, outcomes) -> dict:
    return {
        "started": started.sum(axis=0),
        "survived_plus": int(survived[:, 0].sum()),
        "survived_minus": int(survived[:, 1].sum()),
        "leaked": (started - survived).sum(axis=0),
        "outcomes": outcomes.sum(axis=0),
    }


def zero_crossings(x, y) -> list[float]:
    """Linear-interpolated sign changes of ``y`` over ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = []
    for k in range(len(x) - 1):
        if y[k] == 0.0:
            out.append(float(x[k]))
        elif y[k] * y[k + 1] < 0:
            out.append(float(x[k] - y[k] * (x[k + 1] - x[k]) / (y[k + 1] - y[k])))
    if len(y) and y[-1] == 0.0:
        out.append(float(x[-1]))
    return out


@dataclass
class FineScan:
    T: np.ndarray
    estimates: list
    dP_det: np.ndarray
    exp_work_det: np.ndarray
    dP_hat: np.ndarray

    @property
    def crossings_det(self) -> list[float]:
        return zero_crossings(self.T, self.dP_det)

    @property
    def crossings_hat(self) -> list[float]:
        return zero_crossings(self.T, self.dP_hat)


def fine_scan(proto: DriveProtocol, gamma: float, theta_k: float, window, step: float,
              th: ThermalState | None, cfg: ShotConfig, steps: int | None = None) -> FineScan:
    """Shot-emulated scan of a time window with the deterministic dP overlay."""
    if step <= 0:
        raise InvalidInputError("step must be positive")
    lo, hi = float(window[0]), float(window[1])
    n = int(math.floor((hi - lo) / step + 1e-9))
    Ts = np.array([lo + k * step for k in range(n + 1)])
    th = th if th is not None else gibbs(20.0, proto.J_initial)
    ests, dP, ew = [], [], []
    for T in Ts:
        tt = _deterministic(proto.with_duration(T), gamma, theta_k, T, cfg, steps)
        dP.append(tt.P_pp - tt.P_mm)
        ew.append(exp_work_closed_form(tt, th))
        ests.append(sample_point(proto, gamma, theta_k, T, th, cfg, steps, table=tt))
    return FineScan(Ts, ests, np.array(dP), np.array(ew), np.array([e.dP_hat for e in ests]))
