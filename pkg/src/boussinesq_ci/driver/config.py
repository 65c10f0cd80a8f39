"""Run configuration: INI-style key = value text, validated."""

import configparser
import re
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError

MAX_NG = 2048


def default_ng(lambda1):
    """Smallest power of two >= 12 lambda1."""
    n = 4
    while n < 12 * lambda1:
        n *= 2
    return n


@dataclass(frozen=True)
class EnergyProfile:
    kind: str = "constant"
    base: float = 2.0
    amp: float = 0.0
    phase: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.base)
        return self.base + self.amp * np.sin(2 * np.pi * t + self.phase)


@dataclass(frozen=True)
class ThetaMode:
    kind: str  # cos or sin
    k1: int
    k2: int
    amp: float


def parse_theta_modes(text):
    """'cos:k1:k2:amp; sin:k1:k2:amp' -> list of ThetaMode; '' or 'none' -> []."""
    text = text.strip()
    if text in ("", "none", "0"):
        return ()
    out = []
    for item in text.split(";"):
        parts = [p.strip() for p in item.split(":")]
        if len(parts) != 4 or parts[0] not in ("cos", "sin"):
            raise ValueError(f"bad theta mode {item!r}; expected cos|sin:k1:k2:amp")
        k1, k2 = int(parts[1]), int(parts[2])
        if k1 == 0 and k2 == 0:
            raise ValueError("theta0 modes must be mean free (k != 0)")
        out.append(ThetaMode(parts[0], k1, k2, float(parts[3])))
    return tuple(out)


def theta0_values(modes, grid):
    x1, x2 = grid.x
    out = np.zeros(grid.shape)
    for m in modes:
        arg = m.k1 * x1 + m.k2 * x2
        out += m.amp * (np.cos(arg) if m.kind == "cos" else np.sin(arg))
    return out


def _int_list(text):
    text = text.strip()
    return tuple(int(v) for v in re.split(r"[,\s]+", text) if v) if text else ()


def _float_list(text):
    text = text.strip()
    return tuple(float(v) for v in re.split(r"[,\s]+", text) if v) if text else ()


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.5
    lambda1: int = 20
    Ng: int = None
    M_time: int = 256
    delta: float = 1.0
    mode: str = "demo"
    e_kind: str = "constant"
    e_base: float = 2.0
    e_amp: float = 0.0
    e_phase: float = 0.0
    theta0_modes: tuple = (ThetaMode("cos", 0, 1, 1.0),)
    eps0_override: float = None
    out_dir: str = "out"
    snapshots: tuple = ()
    p_report: float = 1.2
    r_override: int = None
    sigma_override: Fraction = None
    mu_override: float = None
    lambdas: tuple = ()
    steps: int = 1
    seed: int = 0
    theta_dt: float = 0.01
    ng_defaulted: bool = field(default=False, compare=False)

    @property
    def energy(self):
        return EnergyProfile(self.e_kind, self.e_base, self.e_amp, self.e_phase)

    def lambda_schedule(self):
        """Frequencies for chained steps: lambdas if given, else doubling lambda1."""
        if self.lambdas:
            return list(self.lambdas)
        return [self.lambda1 * 2**i for i in range(self.steps)]

    def validated(self):
        validate(self)
        return self

    def with_(self, **kw):
        return replace(self, **kw)


_PARSERS = {
    "alpha": float,
    "lambda1": int,
    "Ng": int,
    "M_time": int,
    "delta": float,
    "mode": str,
    "e_kind": str,
    "e_base": float,
    "e_amp": float,
    "e_phase": float,
    "theta0_modes": parse_theta_modes,
    "eps0_override": float,
    "out_dir": str,
    "snapshots": _float_list,
    "p_report": float,
    "r_override": int,
    "sigma_override": Fraction,
    "mu_override": float,
    "lambdas": _int_list,
    "steps": int,
    "seed": int,
    "theta_dt": float,
}


def validate(cfg, lines=None):
    lines = lines or {}

    def fail(key, msg):
        raise ConfigError(msg, key=key, line=lines.get(key))

    if not 0.5 <= cfg.alpha < 1:
        fail("alpha", "alpha must lie in [0.5, 1)")
    if cfg.lambda1 <= 0 or cfg.lambda1 % 5:
        fail("lambda1", "lambda1 must be a positive multiple of 5")
    for lam in cfg.lambdas:
        if lam <= 0 or lam % 5:
            fail("lambdas", "every lambda must be a positive multiple of 5")
    if cfg.Ng is not None and (cfg.Ng < 4 or cfg.Ng % 2):
        fail("Ng", "Ng must be an even integer >= 4")
    if cfg.M_time < 5:
        fail("M_time", "M_time must be at least 5")
    if not 0 < cfg.delta <= 1:
        fail("delta", "delta must lie in (0, 1]")
    if cfg.mode not in ("demo", "strict"):
        fail("mode", "mode must be 'demo' or 'strict'")
    if cfg.e_kind not in ("constant", "sinusoid"):
        fail("e_kind", "e_kind must be 'constant' or 'sinusoid'")
    low = cfg.e_base - (abs(cfg.e_amp) if cfg.e_kind == "sinusoid" else 0.0)
    if low < 1:
        fail("e_base", "energy profile must satisfy e(t) >= 1")
    if cfg.p_report <= 1:
        fail("p_report", "p_report must exceed 1")
    if cfg.eps0_override is not None and not cfg.eps0_override > 0:
        fail("eps0_override", "eps0_override must be positive")
    if cfg.steps < 1:
        fail("steps", "steps must be >= 1")
    if cfg.theta_dt <= 0:
        fail("theta_dt", "theta_dt must be positive")
    if any(not 0 <= t <= 1 for t in cfg.snapshots):
        fail("snapshots", "snapshot times must lie in [0, 1]")


def _key_lines(text):
    lines = {}
    for no, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*[=:]", line)
        if m:
            lines.setdefault(m.group(1), no)
    return lines


def parse_config(text):
    if not re.search(r"^\s*\[", text, flags=re.M):
        text = "[run]\n" + text
        offset = 1
    else:
        offset = 0
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    lines = {k: v - offset for k, v in _key_lines(text).items()}
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in _PARSERS:
                raise ConfigError("unknown key", key=key, line=lines.get(key))
            try:
                values[key] = _PARSERS[key](raw)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad value {raw!r}: {exc}", key=key, line=lines.get(key)) from exc
    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in values.items() if k in known})
    validate(cfg, lines)
    if cfg.Ng is None:
        cfg = replace(cfg, Ng=default_ng(cfg.lambda1), ng_defaulted=True)
    if cfg.Ng > MAX_NG:
        raise ConfigError(f"Ng = {cfg.Ng} exceeds the grid budget {MAX_NG}", key="Ng",
                          line=lines.get("Ng"))
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
