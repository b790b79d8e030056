"""Run configuration: a flat ``key = value`` file, environment, then flags."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_PREFIX = "LOGCLEANER_"

DATASETS = ("hdfs", "bgl", "thunderbird", "generic")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dataset: str = "hdfs"
    log: str = ""
    labels: str = ""
    parsed: str = ""
    pattern: str = ""
    limit: int = 0  # 0 = whole file; thunderbird runs default to 100000
    workdir: str = "."
    window: str = "session"  # "session" or a positive window size
    key_pattern: str = r"blk_-?\d+"
    miner_depth: int = 4
    miner_sim: float = 0.5
    miner_max_children: int = 100
    model: str = "decision-tree"
    seed: int = 0
    alpha: str = "0.02"  # one value, or a comma-separated sweep
    order: str = "frequency-desc"
    passes: int = 1
    epsilon: float = 0.005
    cutoff: float = 0.1
    theta_anti: float = 0.0
    theta_dup: int = 2
    xi: float = 0.05
    miller_madow: bool = False
    whitelist: str = ""
    split_ratio: float = 0.8
    profile_on: str = "train"
    workers: int = 1

    def __post_init__(self):
        self.validate()

    # -- validation ------------------------------------------------------
    def validate(self) -> None:
        if self.dataset not in DATASETS:
            raise ConfigError(f"dataset must be one of {DATASETS}")
        if self.window != "session":
            try:
                w = int(self.window)
            except ValueError:
                raise ConfigError("window must be 'session' or a positive integer") from None
            if w < 1:
                raise ConfigError("window size must be >= 1")
        for a in self.alphas:
            if not 0.0 <= a < 1.0:
                raise ConfigError("alpha must be in [0, 1)")
        if not 0.0 <= self.cutoff <= 1.0:
            raise ConfigError("cutoff must be in [0, 1]")
        if self.theta_dup < 2:
            raise ConfigError("theta-dup must be >= 2")
        if not 0.0 < self.xi < 1.0:
            raise ConfigError("xi must be in (0, 1)")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError("split_ratio must be in (0, 1)")
        if self.profile_on not in ("train", "all"):
            raise ConfigError("profile_on must be 'train' or 'all'")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.limit < 0 or self.passes < 1 or self.workers < 1:
            raise ConfigError("limit must be >= 0, passes and workers >= 1")

    @property
    def alphas(self) -> tuple[float, ...]:
        try:
            return tuple(float(a) for a in str(self.alpha).split(",") if a.strip())
        except ValueError:
            raise ConfigError(f"bad alpha {self.alpha!r}") from None

    @property
    def window_size(self) -> int | None:
        return None if self.window == "session" else int(self.window)

    @property
    def line_limit(self) -> int | None:
        if self.limit:
            return self.limit
        return 100_000 if self.dataset == "thunderbird" else None

    @property
    def whitelist_ids(self) -> tuple[str, ...]:
        return tuple(e for e in self.whitelist.split(",") if e)

    # -- text form -------------------------------------------------------
    def to_text(self) -> str:
        lines = ["#logcleaner-config v1"]
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        values = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"line {n}: expected 'key = value'")
            values[key.strip().replace("-", "_")] = value.strip()
        return (base or cls()).updated(values)

    @classmethod
    def load(cls, path, base: "RunConfig | None" = None) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), base)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    def updated(self, values: dict) -> "RunConfig":
        """Copy with string (or typed) overrides, coerced to the field types."""
        types = {f.name: f.type for f in fields(self)}
        changes = {}
        for key, value in values.items():
            if value is None:
                continue
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            changes[key] = _coerce(key, types[key], value)
        return replace(self, **changes)

    def with_env(self, environ=None) -> "RunConfig":
        environ = os.environ if environ is None else environ
        names = {f.name for f in fields(self)}
        values = {}
        for key, value in environ.items():
            if key.startswith(ENV_PREFIX):
                name = key[len(ENV_PREFIX):].lower()
                if name in names:
                    values[name] = value
        return self.updated(values)


def _coerce(key, typ, value):
    typ = typ if isinstance(typ, str) else typ.__name__
    if not isinstance(value, str):
        return value
    try:
        if typ == "int":
            return int(value)
        if typ == "float":
            return float(value)
        if typ == "bool":
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return low in ("true", "1", "yes")
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return value
