"""Flat ``key = value`` run configuration with CLI overrides and a re-parseable echo."""
import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

KINDS = ("pwave2d", "pwave3d", "elasticity2d")
INITS = ("gaussian", "mode", "zero", "translation")


class ConfigError(ValueError):
    """Invalid or unparseable run configuration."""


@dataclass
class SimulationConfig:
    kind: str = "pwave3d"
    elements: tuple = (16, 16, 16)
    degree: int = 2
    tau: float = 0.01
    steps: int = 100
    rho: float = 1.0
    mu: float = 1.0
    lam: float = 1.0
    sigma: float = 0.25
    init: str = "gaussian"
    center: tuple = (0.5, 0.5, 0.5)
    width: float = 0.1
    modes: tuple = (1, 1, 1)
    scheme: str = "newmark"
    output_every: int = 0
    out: str = "out"
    # study parameters
    t_final: float = 1.0
    levels: int = 4
    taus: tuple = ()
    sizes: tuple = (8, 16, 32)
    bench_steps: int = 5
    stability_form: str = "newmark"
    plots: bool = True
    full: bool = False

    @property
    def dim(self):
        return 3 if self.kind == "pwave3d" else 2

    @property
    def is_elastic(self):
        return self.kind == "elasticity2d"

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.init not in INITS:
            raise ConfigError(f"init must be one of {INITS}, got {self.init!r}")
        if len(self.elements) == 1:
            self.elements = self.elements * self.dim
        if len(self.elements) < self.dim:
            raise ConfigError(f"{self.kind} needs {self.dim} element counts, got {self.elements}")
        self.elements = tuple(self.elements[:self.dim])
        if any(n < 2 for n in self.elements):
            raise ConfigError(f"element counts must be >= 2, got {self.elements}")
        if self.degree < 1:
            raise ConfigError(f"degree must be >= 1, got {self.degree}")
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if not self.width > 0:
            raise ConfigError(f"width must be positive, got {self.width}")
        if not (self.rho > 0 and self.mu > 0 and self.lam >= 0):
            raise ConfigError("material needs rho > 0, mu > 0, lam >= 0")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.output_every < 0:
            raise ConfigError("output_every must be >= 0")
        if self.scheme not in ("newmark", "literal"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.stability_form not in ("newmark", "literal", "printed"):
            raise ConfigError(f"unknown stability form {self.stability_form!r}")
        if any(t < 0 for t in self.taus):
            raise ConfigError("stability time steps must be non-negative")
        if any(s < 2 for s in self.sizes):
            raise ConfigError(f"benchmark sizes must be >= 2 per direction, got {self.sizes}")
        if self.bench_steps < 5:
            raise ConfigError("bench_steps must be >= 5")
        if not self.center or not self.modes:
            raise ConfigError("center and modes need at least one entry")
        # pad with the last entry, then keep one entry per direction
        self.center = (tuple(self.center) + (self.center[-1],) * self.dim)[:self.dim]
        self.modes = (tuple(self.modes) + (self.modes[-1],) * self.dim)[:self.dim]
        return self


_FIELD_TYPES = {f.name: type(f.default) for f in fields(SimulationConfig)}
_TUPLE_ITEM = {"elements": int, "center": float, "modes": int, "taus": float, "sizes": int}


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_value(key, text):
    """Convert the text of one entry to the type of the matching field."""
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    typ = _FIELD_TYPES[key]
    text = text.strip()
    try:
        if typ is tuple:
            item = _TUPLE_ITEM[key]
            parts = [p for p in text.replace(" ", ",").split(",") if p]
            return tuple(item(float(p)) if item is int and float(p).is_integer() else item(p)
                         for p in parts)
        if typ is bool:
            return _parse_bool(text)
        if typ is int:
            v = float(text)
            if not v.is_integer():
                raise ValueError(f"not an integer: {text!r}")
            return int(v)
        return typ(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = parse_value(key, val)
    return values


def load_config(path=None, overrides=None, base=None):
    """Defaults <- optional file <- overrides (already typed or raw strings)."""
    cfg = base if base is not None else SimulationConfig()
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        values.update(parse_config_text(text))
    for key, val in (overrides or {}).items():
        values[key] = parse_value(key, val) if isinstance(val, str) else val
    for key in values:
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
    return dataclasses.replace(cfg, **values).validate()


def format_value(v):
    if isinstance(v, tuple):
        return ",".join(format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_echo(cfg):
    """Text that ``parse_config_text`` reads back into the same configuration."""
    return "".join(f"{f.name} = {format_value(getattr(cfg, f.name))}\n" for f in fields(cfg))
