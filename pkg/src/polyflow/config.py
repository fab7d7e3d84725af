"""Run configuration: flat ``key = value`` text with dotted keys."""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass

from .exceptions import ConfigError, InvalidArgument
from .flow import FlowConfig, KINDS, SCHEMES

PROFILES = ("cosine", "file")


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


# key -> (attribute, parser)
_KEYS = {
    "flow.kind": ("kind", str),
    "flow.m": ("m", int),
    "flow.modes": ("N", int),
    "flow.dt": ("dt", float),
    "flow.t_end": ("t_end", float),
    "flow.scheme": ("scheme", str),
    "flow.adapt": ("adapt", _bool),
    "flow.target_tol": ("target_tol", float),
    "initial.profile": ("profile", str),
    "initial.amplitude": ("amplitude", float),
    "initial.length": ("length", float),
    "initial.mode": ("mode", int),
    "initial.anchor_y": ("anchor_y", float),
    "initial.path": ("path", str),
    "output.dir": ("out_dir", str),
    "output.record_every": ("record_every", int),
    "output.snapshot_every": ("snapshot_every", int),
    "output.snapshot_samples": ("snapshot_samples", int),
    "sweep.amplitudes": ("sweep_amplitudes", _floats),
    "sweep.workers": ("sweep_workers", int),
    "seed": ("seed", int),
}


@dataclass(frozen=True)
class RunConfig:
    kind: str = "polyharmonic"
    m: int = 0
    N: int = 64
    dt: float = 1e-4
    t_end: float = 1.0
    scheme: str = "etdrk2"
    adapt: bool = False
    target_tol: float = 1e-6
    profile: str = "cosine"
    amplitude: float = 0.1
    length: float = 2.0
    mode: int = 1
    anchor_y: float = 0.0
    path: str = ""
    out_dir: str = "run"
    record_every: int = 100
    snapshot_every: int = 1000
    snapshot_samples: int = 257
    sweep_amplitudes: tuple = (0.1, 0.5, 1.0, 2.0)
    sweep_workers: int = 1
    seed: int = 0

    def validate(self) -> "RunConfig":
        if not math.isfinite(self.amplitude):
            raise ConfigError("initial.amplitude must be finite")
        if self.profile not in PROFILES:
            raise ConfigError(f"initial.profile must be one of {PROFILES}")
        if self.profile == "cosine" and not self.length > 0:
            raise ConfigError("initial.length must be positive")
        if self.profile == "file" and not os.path.isfile(self.path):
            raise ConfigError(f"initial.path does not exist: {self.path!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"flow.kind must be one of {KINDS}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"flow.scheme must be one of {SCHEMES}")
        if self.record_every < 1 or self.snapshot_every < 1:
            raise ConfigError("record_every and snapshot_every must be >= 1")
        if self.snapshot_every % self.record_every:
            raise ConfigError("output.snapshot_every must be a multiple of output.record_every")
        if self.sweep_workers < 1:
            raise ConfigError("sweep.workers must be >= 1")
        try:
            self.flow_config()
        except InvalidArgument as exc:
            raise ConfigError(str(exc)) from None
        return self

    def flow_config(self) -> FlowConfig:
        return FlowConfig(kind=self.kind, m=self.m, N=self.N, dt=self.dt, t_end=self.t_end,
                          adapt=self.adapt, target_tol=self.target_tol,
                          checkpoint_every=self.record_every, scheme=self.scheme)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, parse = _KEYS[key]
        try:
            values[attr] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return (base or RunConfig()).replace(**values)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config(text)


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for key, (attr, _) in _KEYS.items():
        v = getattr(cfg, attr)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"
