"""Scenario execution and the figure presets.

Every written file embeds the full raw configuration, so :func:`rerun`
reproduces it exactly.
"""

from __future__ import annotations

import copy
import math
from pathlib import Path

from . import __version__
from .config import ScenarioConfig, config_from_dict, parse_config
from .errors import ConfigError
from .evolution import bloch_trajectory, survival_curve, transition_table
from .floquet import extract_floquet, find_revivals
from .io import read_table, write_table
from .parallel import pmap
from .shots import fine_scan, sample_point
from .thermo import exp_work_closed_form, gibbs, work_distribution

SHOT_COLUMNS = ("T_us", "P_pp", "P_pp_std", "P_mm", "P_mm_std", "P_pm", "P_pm_std", "P_mp", "P_mp_std",
                "exp_work", "exp_work_std", "survivors_plus", "survivors_minus")
SCAN_COLUMNS = ("T_us", "Re_h_par", "Im_h_par", "Re_h_perp", "Im_h_perp", "Re_h_y", "Im_h_y", "residual")
ROOT_COLUMNS = ("tau_rev_us", "abs_Re_h_perp", "abs_Re_h_y", "abs_Im_h_par", "abs_Im_h_y", "J_eff", "gamma_eff",
                "residual")
DEFAULT_REVIVAL_RANGE = (10.0, 50.0)


def theta_label(th: float) -> str:
    for num, lab in ((0.0, "0"), (math.pi / 2, "pi2"), (math.pi / 4, "pi4"), (math.pi, "pi")):
        if abs(th - num) < 1e-12:
            return lab
    return format(th, ".6g").replace(".", "p").replace("-", "m")


def protocol_label(proto) -> str:
    fields = proto.to_config()
    parts = [f"{k}_{float(fields[k]):g}" for k in proto.CONFIG_FIELDS[proto.kind]]
    return "_".join(parts).replace(".", "p")


class _Writer:
    def __init__(self, cfg: ScenarioConfig, out: Path, fmt: str):
        self.cfg, self.out, self.fmt = cfg, Path(out), fmt
        self.paths: list[Path] = []

    def meta(self, role: str, **extra) -> dict:
        m = {
            "artifact": "nhje",
            "version": __version__,
            "role": role,
            "format": self.fmt,
            "seed": self.cfg.seed,
            "config": self.cfg.raw,
        }
        m.update(extra)
        return m

    def write(self, stem: str, columns, rows, role: str, **extra):
        p = write_table(self.out / stem, columns, rows, self.meta(role, **extra), self.fmt)
        self.paths.append(p)
        return p


def _stem(cfg, th, role, proto=None, multi=False):
    s = f"{cfg.name}_th{theta_label(th)}_{role}"
    if proto is not None and multi:
        s += "_" + protocol_label(proto)
    return s


def _revivals(cfg, proto, th):
    rng = cfg.window or DEFAULT_REVIVAL_RANGE
    return find_revivals(proto, cfg.gamma, th, rng, cfg.coarse_step, cfg.grid_resolution, cfg.steps)


def _simulate(cfg: ScenarioConfig, w: _Writer):
    multi = len(cfg.protocols) > 1
    for th in cfg.theta_k:
        if cfg.T_grid is None:
            for proto in cfg.protocols:
                pr = proto.with_duration(cfg.T)
                tt = transition_table(pr, cfg.gamma, th, steps=cfg.steps)
                tstate = gibbs(cfg.beta, pr.J_initial)
                wd = work_distribution(tt, tstate, pr.J_final)
                w.write(_stem(cfg, th, "workdist", proto, multi), ("W", "prob"), zip(wd.support, wd.probs),
                        "work_distribution", beta=cfg.beta, J_i=pr.J_initial, J_f=pr.J_final, theta_k=th,
                        T=pr.T, exp_work=wd.exp_work)
            continue
        work_rows = []
        revivals = {}
        for proto in cfg.protocols:
            lab = protocol_label(proto)
            tstate = gibbs(cfg.beta, proto.J_initial)
            tables = pmap(lambda T: transition_table(proto.with_duration(T), cfg.gamma, th, steps=cfg.steps),
                          cfg.grid())
            rows = []
            for tt in tables:
                ew = exp_work_closed_form(tt, tstate)
                work_rows.append((tt.T, lab, ew, tt.P_pp - tt.P_mm))
                rows.append((tt.T, tt.P_pp, tt.P_mm, tt.P_pm, tt.P_mp, tt.S_plus, tt.S_minus))
            extra = {"theta_k": th, "protocol": lab, "beta": cfg.beta, "gamma": cfg.gamma}
            if cfg.mark_revivals:
                rep = _revivals(cfg, proto, th)
                revivals[lab] = rep.times
                extra["revivals"] = rep.times
            w.write(_stem(cfg, th, "probs", proto, multi),
                    ("T_us", "P_pp", "P_mm", "P_pm", "P_mp", "S_plus", "S_minus"), rows, "probabilities", **extra)
        extra = {"theta_k": th, "beta": cfg.beta, "gamma": cfg.gamma}
        if cfg.mark_revivals:
            extra["revivals"] = revivals
        w.write(_stem(cfg, th, "work"), ("T_us", "protocol", "exp_work", "delta_P"), work_rows, "exp_work", **extra)


def _shot_row(e):
    P, S = e.P_hat, e.P_std
    return (e.T, P[0, 0], S[0, 0], P[1, 1], S[1, 1], P[0, 1], S[0, 1], P[1, 0], S[1, 0],
            e.exp_work_hat, e.exp_work_std, e.counts["survived_plus"], e.counts["survived_minus"])


def _shots(cfg: ScenarioConfig, w: _Writer):
    multi = len(cfg.protocols) > 1
    for th in cfg.theta_k:
        for proto in cfg.protocols:
            tstate = gibbs(cfg.beta, proto.J_initial)
            ests = pmap(lambda T: sample_point(proto, cfg.gamma, th, T, tstate, cfg.shots, cfg.steps), cfg.grid())
            flagged = [e.T for e in ests if e.flagged]
            w.write(_stem(cfg, th, "shots", proto, multi), SHOT_COLUMNS, [_shot_row(e) for e in ests], "shots",
                    theta_k=th, protocol=protocol_label(proto), shots_mode=cfg.shots.mode_label,
                    beta=cfg.beta, gamma=cfg.gamma, flagged_points=flagged)


def _fine_scan(cfg: ScenarioConfig, w: _Writer):
    multi = len(cfg.protocols) > 1
    for th in cfg.theta_k:
        for proto in cfg.protocols:
            tstate = gibbs(cfg.beta, proto.J_initial)
            fs = fine_scan(proto, cfg.gamma, th, cfg.window, cfg.window_step, tstate, cfg.shots, cfg.steps)
            extra = {"theta_k": th, "protocol": protocol_label(proto), "window": list(cfg.window),
                     "crossings_det": fs.crossings_det, "crossings_hat": fs.crossings_hat}
            w.write(_stem(cfg, th, "finescan", proto, multi), SHOT_COLUMNS, [_shot_row(e) for e in fs.estimates],
                    "fine_scan_shots", shots_mode=cfg.shots.mode_label, **extra)
            w.write(_stem(cfg, th, "finescan_det", proto, multi), ("T_us", "delta_P", "exp_work"),
                    zip(fs.T, fs.dP_det, fs.exp_work_det), "fine_scan_deterministic", **extra)


def _bloch(cfg: ScenarioConfig, w: _Writer):
    multi = len(cfg.protocols) > 1
    T = cfg.T if cfg.T is not None else cfg.T_grid[1]
    for th in cfg.theta_k:
        for proto in cfg.protocols:
            pr = proto.with_duration(T)
            rows = []
            for src in ("+", "-"):
                for s in bloch_trajectory(pr, cfg.gamma, th, src, cfg.samples, cfg.steps):
                    rows.append((s.t, s.n[0], s.n[1], s.n[2], s.source))
            w.write(_stem(cfg, th, "bloch", proto, multi), ("t_us", "nx", "ny", "nz", "source"), rows, "bloch",
                    theta_k=th, protocol=protocol_label(proto), T=T)


def _scan_row(T, h_par, h_perp, h_y, residual):
    return (T, h_par.real, h_par.imag, h_perp.real, h_perp.imag, h_y.real, h_y.imag, residual)


def _floquet(cfg: ScenarioConfig, w: _Writer):
    multi = len(cfg.protocols) > 1
    for th in cfg.theta_k:
        for proto in cfg.protocols:
            res = pmap(lambda T: extract_floquet(proto, cfg.gamma, th, T, cfg.grid_resolution, cfg.steps), cfg.grid())
            rows = [_scan_row(r.T, r.proj["h_par"], r.proj["h_perp"], r.proj["h_y"], r.residual) for r in res]
            w.write(_stem(cfg, th, "floquet", proto, multi), SCAN_COLUMNS, rows, "floquet",
                    theta_k=th, protocol=protocol_label(proto))


def _revival(cfg: ScenarioConfig, w: _Writer):
    multi = len(cfg.protocols) > 1
    for th in cfg.theta_k:
        for proto in cfg.protocols:
            rep = _revivals(cfg, proto, th)
            extra = {"theta_k": th, "protocol": protocol_label(proto), "symmetric_range": rep.symmetric_range,
                     "revivals": rep.times}
            w.write(_stem(cfg, th, "revival_scan", proto, multi), SCAN_COLUMNS, [_scan_row(*p) for p in rep.scan],
                    "revival_scan", **extra)
            w.write(_stem(cfg, th, "revival_roots", proto, multi), ROOT_COLUMNS,
                    [(r.tau_rev, *r.residuals, r.J_eff, r.gamma_eff, r.residual) for r in rep.roots],
                    "revival_roots", **extra)


def _survival(cfg: ScenarioConfig, w: _Writer):
    multi = len(cfg.protocols) > 1
    for th in cfg.theta_k:
        for proto in cfg.protocols:
            pts = survival_curve(proto, cfg.gamma, th, cfg.grid(), cfg.steps)
            w.write(_stem(cfg, th, "survival", proto, multi), ("T_us", "S_plus", "S_minus", "norm_plus", "norm_minus"),
                    pts, "survival", theta_k=th, protocol=protocol_label(proto), gamma=cfg.gamma)


_RUNNERS = {
    "simulate": _simulate, "shots": _shots, "fine_scan": _fine_scan, "bloch": _bloch,
    "floquet": _floquet, "revival": _revival, "survival": _survival,
}


def apply_overrides(raw: dict, seed=None, steps=None, pipeline=None) -> dict:
    raw = copy.deepcopy(raw)
    top = raw.setdefault("scenario", {})
    if seed is not None:
        top["seed"] = str(int(seed))
        raw.get("shots", {}).pop("seed", None)
    if steps is not None:
        top["steps"] = str(int(steps))
    if pipeline is not None:
        top["pipeline"] = pipeline
    return raw


def run_scenario(cfg: ScenarioConfig, out, fmt: str = "csv") -> list[Path]:
    w = _Writer(cfg, out, fmt)
    _RUNNERS[cfg.pipeline](cfg, w)
    return w.paths


def rerun(path, out, fmt: str | None = None) -> list[Path]:
    """Re-execute the scenario recorded in an emitted file's header."""
    meta, _, _ = read_table(path)
    if "config" not in meta:
        raise ConfigError(f"{path} carries no scenario config")
    cfg = config_from_dict(meta["config"])
    return run_scenario(cfg, out, fmt or meta.get("format", "csv"))


_FIG3 = """
name = fig3
pipeline = simulate
gamma = 0.02
beta = 20
theta_k = pi/2, 0
T_grid = 10, 50, 2

[protocol]
kind = ConstantJ
J1 = 0.03, 0.06
"""

_FIG4 = """
name = fig4
pipeline = simulate
gamma = 0.02
beta = 20
theta_k = pi/2, 0
T_grid = 10, 50, 2

[protocol]
kind = TriangleJ
Jmin = 0.03
Jmax = 0.06
"""

_FIG5 = """
name = fig5
pipeline = simulate
gamma = 0.02
beta = 20
theta_k = pi/2, 0
T_grid = 10, 50, 0.5
mark_revivals = yes

[protocol]
kind = SinDetuning
J2 = 0.12
Delta1 = 0.5
"""

PRESETS = {
    "fig1": ["""
name = fig1
pipeline = bloch
gamma = 0.02
theta_k = 0, pi/4, pi/2
T = 50
samples = 100

[protocol]
kind = ConstantJ
J1 = 0.03
"""],
    "fig3": [_FIG3],
    "fig4": [_FIG4],
    "fig5": [_FIG5],
    "figA2": ["""
name = figA2
pipeline = survival
gamma = 0.02
theta_k = pi/2
T_grid = 0.5, 50, 0.5

[protocol]
kind = ConstantJ
J1 = 0.03, 0.06, 0.09, 0.12
"""],
    "figA3": ["""
name = figA3
pipeline = revival
gamma = 0.02
theta_k = pi/2, 0
window = 10, 50
coarse_step = 0.5

[protocol]
kind = SinDetuning
J2 = 0.12
Delta1 = 0.5
"""],
    "figA4": [f"""
name = figA4_{tag}
pipeline = fine_scan
gamma = 0.02
beta = 20
theta_k = pi/2
window = {lo}, {hi}
window_step = 0.2
seed = 2024

[protocol]
kind = SinDetuning
J2 = 0.12
Delta1 = 0.5

[shots]
shots_per_point = 4500
blocks = 15
mode = piecewise(5)
""" for tag, lo, hi in (("T1", 25, 28), ("T2", 33, 36))],
    "figA5": [
        _FIG3.replace("name = fig3", "name = figA5_const").replace("theta_k = pi/2, 0", "theta_k = pi/4")
        .replace("J1 = 0.03, 0.06", "J1 = 0.03"),
        _FIG4.replace("name = fig4", "name = figA5_triangle").replace("theta_k = pi/2, 0", "theta_k = pi/4"),
        _FIG5.replace("name = fig5", "name = figA5_detuned").replace("theta_k = pi/2, 0", "theta_k = pi/4"),
    ],
}

PRESET_DESCRIPTIONS = {
    "fig1": "Bloch trajectories from both eigenstates, theta_k in {0, pi/4, pi/2}",
    "fig3": "constant coupling J in {0.03, 0.06}: exponential work and probabilities",
    "fig4": "triangular coupling 0.03 -> 0.06 -> 0.03: exponential work and probabilities",
    "fig5": "sinusoidal detuning: exponential work and probabilities with revival markers",
    "figA2": "continuous-evolution survival for J in 0.03..0.12",
    "figA3": "Floquet residual scan and revival roots for the detuned drive",
    "figA4": "shot-emulated fine scans around both revival times",
    "figA5": "theta_k = pi/4 for all three protocols",
}


def preset_configs(name: str) -> list[ScenarioConfig]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}", field="preset")
    return [parse_config(t) for t in PRESETS[name]]
