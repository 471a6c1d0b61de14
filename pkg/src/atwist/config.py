"""Run configuration: defaults, plain key=value config files, and the one
honored environment variable (ATWIST_CACHE_DIR)."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

ENV_CACHE_DIR = "ATWIST_CACHE_DIR"


@dataclass(frozen=True)
class RunConfig:
    coeff_count: int = 200_000
    tolerance: float = 1e-10
    worker_count: int = 1
    cache_dir: str = "twist-cache"
    x_grid: tuple = (100.0, 150.0, 200.0, 300.0)
    forms: tuple = ("delta", "11a", "5a")

    def __post_init__(self):
        if not 1e-12 <= self.tolerance <= 1e-4:
            raise ValueError("tolerance must lie in [1e-12, 1e-4]")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.coeff_count < 1:
            raise ValueError("coeff_count must be positive")

    @property
    def cache_path(self) -> str:
        return os.path.join(self.cache_dir, "samples.csv")


def load_config(path: str | None = None, **overrides) -> RunConfig:
    """Defaults <- config file <- ATWIST_CACHE_DIR <- explicit overrides."""
    values: dict = {}
    if path:
        values.update(_parse_file(path))
    env_dir = os.environ.get(ENV_CACHE_DIR)
    if env_dir:
        values["cache_dir"] = env_dir
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def _parse_file(path: str) -> dict:
    out: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#")[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "coeff_count":
                out[key] = int(value)
            elif key == "tolerance":
                out[key] = float(value)
            elif key == "worker_count":
                out[key] = int(value)
            elif key == "cache_dir":
                out[key] = value
            elif key == "x_grid":
                out[key] = tuple(float(v) for v in value.split(","))
            elif key == "forms":
                out[key] = tuple(v.strip() for v in value.split(","))
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return out
