"""Strict JSON experiment configuration shared by every CLI command."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError

__all__ = ["ExperimentConfig", "load_config"]

OPERATORS = ("Lprime", "L")


@dataclass
class ExperimentConfig:
    """One experiment.  Only the keys a command needs must be present.

    ``eigenfunction`` and ``functions`` name test functions as
    ``{"kind": "one" | "cos" | "sin", "frequency": k}`` or plain strings.
    """

    space: dict | None = None
    kernel: dict | None = None
    seed: int = 0
    n: int | None = None
    operator: str = "Lprime"
    window: list | None = None
    margin: float = 1e-3
    reference_frequencies: int = 8
    n_ladder: list | None = None
    trials: int = 10
    probe_grid: int = 512
    eigenfunction: dict | str = "cos"
    functions: list | None = None
    constants: dict | None = None
    grid: int = 256
    deltas: list | None = None
    resolution: int | None = None
    threads: int = 1
    binary: bool = True

    def __post_init__(self):
        self._check()

    def _check(self):
        def integer(name, lo):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                raise ConfigError(f"{name} must be an integer >= {lo}")

        for name in ("space", "kernel", "constants"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, dict):
                raise ConfigError(f"{name} must be an object")
        integer("seed", 0)
        if self.seed >= 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.n is not None:
            integer("n", 1)
        if self.operator not in OPERATORS:
            raise ConfigError(f"operator must be one of {OPERATORS}")
        if self.window is not None:
            if not (isinstance(self.window, list) and len(self.window) == 2
                    and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in self.window)
                    and self.window[0] < self.window[1]):
                raise ConfigError("window must be [lo, hi] with lo < hi")
        if not isinstance(self.margin, (int, float)) or not self.margin > 0:
            raise ConfigError("margin must be positive")
        integer("reference_frequencies", 0)
        if self.n_ladder is not None:
            if not (isinstance(self.n_ladder, list) and self.n_ladder
                    and all(isinstance(v, int) and not isinstance(v, bool) and v >= 2 for v in self.n_ladder)):
                raise ConfigError("n_ladder must be a non-empty list of integers >= 2")
        integer("trials", 1)
        integer("probe_grid", 1)
        integer("grid", 2)
        integer("threads", 1)
        if self.resolution is not None:
            integer("resolution", 1)
        if self.deltas is not None and not (isinstance(self.deltas, list) and self.deltas
                                            and all(isinstance(v, (int, float)) and v > 0 for v in self.deltas)):
            raise ConfigError("deltas must be a non-empty list of positive numbers")
        if self.functions is not None and not (isinstance(self.functions, list) and self.functions):
            raise ConfigError("functions must be a non-empty list")
        if not isinstance(self.eigenfunction, (dict, str)):
            raise ConfigError("eigenfunction must be a name or an object")
        if not isinstance(self.binary, bool):
            raise ConfigError("binary must be true or false")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON, ignoring ``threads`` (results do not depend on it)."""
        data = self.to_dict()
        data.pop("threads")
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        text = fh.read()
    return ExperimentConfig.from_json(text)
