"""Experiment configuration: flat ``key = value`` files plus CLI overrides."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..distributions import WeightDistribution, parse_dist

__all__ = ["EXPERIMENTS", "ExperimentConfig", "parse_t_grid", "parse_config_text", "load_config"]

EXPERIMENTS = ("scan", "transition", "valleys", "var-scaling", "oracle", "lemmas")

DEFAULT_ALPHAS = (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)


def parse_t_grid(text: str) -> tuple[float, ...]:
    """``a:b:n`` (``n`` evenly spaced points) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        a, b, n = text.split(":")
        n = int(n)
        if n < 1:
            raise ValueError("t-grid needs at least one point")
        pts = np.linspace(float(a), float(b), n)
        return tuple(float(round(x, 12)) for x in pts)
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in str(text).replace(" ", "").split(",") if x)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in str(text).replace(" ", "").split(",") if x)


def _bool(text: str) -> bool:
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str) -> float | None:
    return None if str(text).strip().lower() in ("", "none", "auto") else float(text)


def _opt_int(text: str) -> int | None:
    return None if str(text).strip().lower() in ("", "none", "auto") else int(text)


@dataclass
class ExperimentConfig:
    """Settings for one experiment run.

    ``sizes`` lists ``|v|_1`` values; each size ``n`` targets ``n * e_1``.
    A single-coordinate ``v = (n,)`` also means ``n * e_1``.
    When ``sizes`` is empty the single target ``v`` is used.
    """

    experiment: str = "scan"
    d: int = 2
    v: tuple[int, ...] = ()
    dist: str = "uniform:0,1"
    t_grid: tuple[float, ...] = ()  # empty: the experiment's own default
    sizes: tuple[int, ...] = ()
    n_samples: int = 200
    k: int = 4
    seed: int = 0
    padding: int | None = None
    out: str | None = None
    eps: float | None = None
    gamma: float | None = None
    workers: int = 1
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    coinfluence: bool = False
    schedule: bool = False
    proxy_c: float = 1.0
    proxy_c_prime: float = 1.0
    box: tuple[int, ...] = (4, 4)
    plot: bool = False

    _PARSERS = {
        "experiment": str, "d": int, "v": _ints, "dist": str, "t_grid": parse_t_grid,
        "sizes": _ints, "n_samples": int, "samples": int, "k": int, "seed": int,
        "padding": _opt_int, "out": str, "eps": _opt_float, "gamma": _opt_float,
        "workers": int, "alphas": _floats, "coinfluence": _bool, "schedule": _bool,
        "proxy_c": float, "proxy_c_prime": float, "box": _ints, "plot": _bool,
    }

    def __post_init__(self):
        if len(self.v) == 1 and self.d >= 2:
            self.v = (self.v[0],) + (0,) * (self.d - 1)
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if any(not 0.0 <= t <= 1.0 for t in self.t_grid):
            raise ValueError("t_grid must lie in [0, 1]")
        if any(s <= 0 for s in self.sizes) or list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError("sizes must be positive and increasing")
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        if self.v and len(self.v) != self.d:
            raise ValueError(f"v has {len(self.v)} coordinates but d={self.d}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        parse_dist(self.dist)

    @property
    def distribution(self) -> WeightDistribution:
        return parse_dist(self.dist)

    def targets(self) -> list[tuple[int, ...]]:
        if self.sizes:
            return [(n,) + (0,) * (self.d - 1) for n in self.sizes]
        if self.v:
            return [tuple(self.v)]
        return [(32,) + (0,) * (self.d - 1)]

    def updated(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    @classmethod
    def from_mapping(cls, values: dict[str, str], **overrides) -> "ExperimentConfig":
        kwargs = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in cls._PARSERS:
                raise ValueError(f"unknown config key {key!r}")
            name = "n_samples" if key == "samples" else key
            kwargs[name] = cls._PARSERS[key](raw)
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)

    def as_meta(self) -> dict:
        dist = self.distribution
        return {"experiment": self.experiment, "seed": self.seed, "d": self.d,
                "v": [list(t) for t in self.targets()], "padding": self.padding,
                "dist": dist.spec, "n_samples": self.n_samples}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value, got {line!r}")
        values[key.strip()] = val.strip()
    return values


def load_config(path: str | Path | None, **overrides) -> ExperimentConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    return ExperimentConfig.from_mapping(values, **overrides)
