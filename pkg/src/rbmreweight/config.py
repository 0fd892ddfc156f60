"""Experiment description files.

Line-oriented ``key = value`` pairs; ``#`` starts a comment.  Example::

    experiment = convergence
    state = ghz:3
    observables = XXX, Z1Z2
    schedule = 1e2,1e3,1e4,1e5
    repeats = 5
    seed = 7
    out = ghz3.csv
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

EXPERIMENTS = ("convergence", "size-scaling")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str = "convergence"
    state: str = "bell-imag"
    observables: tuple[str, ...] = ("ZZ",)
    schedule: tuple[int, ...] = (100, 1000, 10_000, 100_000, 1_000_000, 10_000_000)
    repeats: int = 5
    seed: int = 0
    out: str = "results.csv"
    sizes: tuple[int, ...] = ()
    field: float = 1.0
    coupling: float = 1.0
    train_iters: int = 2000
    translation_invariant: bool = True
    burn_in: int = 1000
    thin: int = 1
    chains: int = 1024
    workers: int = 1
    quadrature: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {self.experiment!r}", "experiment")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}", "repeats")
        if not self.schedule:
            raise ConfigError("schedule is empty", "schedule")
        if any(q < 1 for q in self.schedule):
            raise ConfigError("schedule entries must be >= 1", "schedule")
        if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
            raise ConfigError(f"schedule must be strictly increasing: {list(self.schedule)}", "schedule")
        if not self.observables:
            raise ConfigError("no observables", "observables")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer", "seed")
        if self.experiment == "size-scaling" and not self.sizes:
            raise ConfigError("size-scaling needs sizes", "sizes")
        if any(n < 2 for n in self.sizes):
            raise ConfigError("sizes must be >= 2", "sizes")
        for name in ("burn_in", "train_iters"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0", name)
        for name in ("thin", "chains", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1", name)

    def updated(self, **kw) -> "ExperimentSpec":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def parse_count(text: str) -> int:
    """``1e6`` or ``1000000`` -> 1000000; rejects non-integral values."""
    x = float(text)
    if not x.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(x)


def parse_schedule(text: str) -> tuple[int, ...]:
    return tuple(parse_count(t) for t in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _list(text: str) -> tuple[str, ...]:
    return tuple(t for t in text.replace(",", " ").split() if t)


_PARSERS = {
    "experiment": str.strip,
    "state": str.strip,
    "observables": _list,
    "schedule": parse_schedule,
    "repeats": int,
    "seed": int,
    "out": str.strip,
    "sizes": lambda t: tuple(int(x) for x in _list(t)),
    "field": float,
    "coupling": float,
    "train_iters": int,
    "translation_invariant": _bool,
    "burn_in": int,
    "thin": int,
    "chains": int,
    "workers": int,
    "quadrature": _bool,
}
assert set(_PARSERS) == {f.name for f in fields(ExperimentSpec)}


def parse_config_text(text: str, source: str = "<config>") -> ExperimentSpec:
    values = {}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {seen[key]})")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as e:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {e}") from None
        seen[key] = lineno
    try:
        return ExperimentSpec(**values)
    except ConfigError as e:
        where = f"{source}:{seen[e.key]}" if e.key in seen else source
        raise ConfigError(f"{where}: {e}", e.key) from None


def parse_config(path: str | Path) -> ExperimentSpec:
    path = Path(path)
    return parse_config_text(path.read_text(), str(path))
