"""Scenario configuration: a flat key = value file with [protocol] and [shots] blocks.

Example::

    pipeline = simulate
    gamma = 0.02
    theta_k = pi/2, 0
    beta = 20
    T_grid = 10, 50, 2

    [protocol]
    kind = ConstantJ
    J1 = 0.03, 0.06

Numeric values accept ``pi`` arithmetic; comma-separated values are lists.
A list-valued protocol field expands into one protocol per entry.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import dataclass, field

from .errors import ConfigError, NHJEError
from .model import PROTOCOL_KINDS, DriveProtocol
from .shots import ShotConfig

PIPELINES = ("simulate", "shots", "fine_scan", "bloch", "floquet", "revival", "survival")
_TOP = "scenario"

_OPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
    ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos,
}


def eval_number(text: str) -> float:
    """Evaluate a numeric literal or a small arithmetic expression in ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(text)

    try:
        val = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError):
        raise ValueError(f"not a number: {text!r}") from None
    if not math.isfinite(val):
        raise ValueError(f"not finite: {text!r}")
    return val


def _split(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


@dataclass
class ScenarioConfig:
    pipeline: str
    protocols: list
    gamma: float
    theta_k: list
    beta: float = 20.0
    T_grid: tuple | None = None
    T: float | None = None
    name: str = "scenario"
    seed: int = 0
    steps: int | None = None
    samples: int = 100
    window: tuple | None = None
    window_step: float = 0.2
    coarse_step: float = 0.5
    grid_resolution: float = 0.1
    mark_revivals: bool = False
    shots: ShotConfig | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def grid(self) -> list[float]:
        if self.T_grid is None:
            return [self.T]
        start, stop, step = self.T_grid
        n = int(math.floor((stop - start) / step + 1e-9))
        return [start + k * step for k in range(n + 1)]


class _Lines:
    """Key -> line number lookup for diagnostics."""

    def __init__(self, text: str):
        self.map = {}
        section = _TOP
        for no, line in enumerate(text.splitlines(), 1):
            s = line.strip()
            if s.startswith("[") and s.endswith("]"):
                section = s[1:-1].strip()
            elif "=" in s and not s.startswith(("#", ";")):
                self.map.setdefault((section, s.split("=", 1)[0].strip().lower()), no)

    def __call__(self, section, key):
        return self.map.get((section, key.lower()))


def parse_config(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(f"[{_TOP}]\n" + text)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] - 1 if exc.errors else None
        raise ConfigError("unparseable line", line=line) from None
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line=(lineno - 1) if lineno else None) from None
    raw = {s: dict(cp[s]) for s in cp.sections()}
    return config_from_dict(raw, _Lines(text))


def config_from_dict(raw: dict, lines=None) -> ScenarioConfig:
    lines = lines or (lambda s, k: None)
    for sec in raw:
        if sec not in (_TOP, "protocol", "shots"):
            raise ConfigError(f"unknown section [{sec}]", field=sec)
    top = dict(raw.get(_TOP, {}))
    used = set()

    def get(key, conv, default=None, section=_TOP, required=False):
        src = top if section == _TOP else raw.get(section, {})
        if key not in src:
            if required:
                raise ConfigError(f"missing required key {key!r}", field=f"{section}.{key}")
            return default
        used.add((section, key))
        try:
            return conv(src[key])
        except (ValueError, TypeError, NHJEError) as exc:
            raise ConfigError(str(exc), field=f"{section}.{key}", line=lines(section, key)) from None

    num = eval_number
    nums = lambda s: [eval_number(p) for p in _split(s)]

    def boolean(s):
        v = s.strip().lower()
        if v in ("1", "yes", "true", "on"):
            return True
        if v in ("0", "no", "false", "off"):
            return False
        raise ValueError(f"not a boolean: {s!r}")

    def integer(s):
        v = eval_number(s)
        if v != int(v):
            raise ValueError(f"not an integer: {s!r}")
        return int(v)

    def triple(s):
        v = nums(s)
        if len(v) != 3:
            raise ValueError("expected start, stop, step")
        if v[2] <= 0 or v[1] <= v[0] or v[0] <= 0:
            raise ValueError("grid needs 0 < start < stop and step > 0")
        return tuple(v)

    def pair(s):
        v = nums(s)
        if len(v) != 2 or v[1] <= v[0]:
            raise ValueError("expected start, stop with start < stop")
        return tuple(v)

    pipeline = get("pipeline", str.strip, required=True)
    if pipeline not in PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}", field="scenario.pipeline", line=lines(_TOP, "pipeline"))
    gamma = get("gamma", num, required=True)
    if gamma < 0:
        raise ConfigError("gamma must be >= 0", field="scenario.gamma", line=lines(_TOP, "gamma"))
    cfg = ScenarioConfig(
        pipeline=pipeline,
        protocols=[],
        gamma=gamma,
        theta_k=get("theta_k", nums, [math.pi / 2]),
        beta=get("beta", num, 20.0),
        T_grid=get("T_grid", triple),
        T=get("T", num),
        name=get("name", str.strip, "scenario"),
        seed=get("seed", integer, 0),
        steps=get("steps", integer),
        samples=get("samples", integer, 100),
        window=get("window", pair),
        window_step=get("window_step", num, 0.2),
        coarse_step=get("coarse_step", num, 0.5),
        grid_resolution=get("grid_resolution", num, 0.1),
        mark_revivals=get("mark_revivals", boolean, False),
        raw={s: dict(v) for s, v in raw.items()},
    )
    if cfg.T_grid is None and cfg.T is None and pipeline not in ("revival", "fine_scan"):
        raise ConfigError("either T or T_grid is required", field="scenario.T_grid")
    if cfg.T is not None and cfg.T <= 0:
        raise ConfigError("T must be > 0", field="scenario.T", line=lines(_TOP, "T"))
    if pipeline == "fine_scan" and cfg.window is None:
        raise ConfigError("fine_scan needs a window", field="scenario.window")
    if cfg.steps is not None and cfg.steps < 1:
        raise ConfigError("steps must be >= 1", field="scenario.steps", line=lines(_TOP, "steps"))
    if not cfg.theta_k:
        raise ConfigError("theta_k is empty", field="scenario.theta_k", line=lines(_TOP, "theta_k"))
    unknown = set(top) - {k for s, k in used if s == _TOP}
    if unknown:
        k = sorted(unknown)[0]
        raise ConfigError(f"unknown key {k!r}", field=f"scenario.{k}", line=lines(_TOP, k))

    cfg.protocols = _protocols(raw.get("protocol"), cfg, lines)
    if "shots" in raw or pipeline in ("shots", "fine_scan"):
        cfg.shots = _shots(raw.get("shots", {}), cfg.seed, lines)
    return cfg


def _protocols(sec, cfg, lines):
    if not sec:
        raise ConfigError("missing [protocol] block", field="protocol")
    kind = sec.get("kind", "").strip()
    if kind not in PROTOCOL_KINDS:
        raise ConfigError(f"unknown protocol kind {kind!r}", field="protocol.kind", line=lines("protocol", "kind"))
    names = DriveProtocol.CONFIG_FIELDS[kind]
    extra = set(sec) - set(names) - {"kind"}
    if extra:
        k = sorted(extra)[0]
        raise ConfigError(f"unknown protocol key {k!r}", field=f"protocol.{k}", line=lines("protocol", k))
    values = {}
    for n in names:
        if n not in sec:
            raise ConfigError(f"missing protocol key {n!r}", field=f"protocol.{n}")
        try:
            values[n] = [eval_number(p) for p in _split(sec[n])]
        except ValueError as exc:
            raise ConfigError(str(exc), field=f"protocol.{n}", line=lines("protocol", n)) from None
    lengths = {len(v) for v in values.values() if len(v) > 1}
    if len(lengths) > 1:
        raise ConfigError("list-valued protocol fields must have equal lengths", field="protocol")
    count = lengths.pop() if lengths else 1
    T0 = cfg.T if cfg.T is not None else (cfg.T_grid[0] if cfg.T_grid else 1.0)
    out = []
    for i in range(count):
        fields = {n: (v[i] if len(v) > 1 else v[0]) for n, v in values.items()}
        try:
            out.append(DriveProtocol.from_config({"kind": kind, **fields}, T=T0))
        except NHJEError as exc:
            raise ConfigError(str(exc), field="protocol") from None
    return out


def _shots(sec, seed, lines):
    kw = {"seed": seed}
    try:
        for key in ("shots_per_point", "blocks"):
            if key in sec:
                kw[key] = int(eval_number(sec[key]))
        if "seed" in sec:
            kw["seed"] = int(eval_number(sec["seed"]))
        if "mode" in sec:
            kw["mode"], kw["segments"] = ShotConfig.parse_mode(sec["mode"])
        for key in ("allocation", "sampling"):
            if key in sec:
                kw[key] = sec[key].strip()
        if "drift" in sec:
            d = [eval_number(p) for p in _split(sec["drift"])]
            if len(d) != 2:
                raise ValueError("drift needs two relative widths (J, gamma)")
            kw["drift"] = tuple(d)
        extra = set(sec) - {"shots_per_point", "blocks", "seed", "mode", "allocation", "sampling", "drift"}
        if extra:
            k = sorted(extra)[0]
            raise ConfigError(f"unknown shots key {k!r}", field=f"shots.{k}", line=lines("shots", k))
        return ShotConfig(**kw)
    except (ValueError, NHJEError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), field="shots") from None


def dump_config(raw: dict) -> str:
    """Render a raw section mapping back into config text."""
    lines = [f"{k} = {v}" for k, v in raw.get(_TOP, {}).items()]
    for sec in ("protocol", "shots"):
        if sec in raw:
            lines.append("")
            lines.append(f"[{sec}]")
            lines.extend(f"{k} = {v}" for k, v in raw[sec].items())
    return "\n".join(lines) + "\n"
