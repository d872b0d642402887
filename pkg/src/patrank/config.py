"""Line-oriented key=value configuration with include support.

Syntax, one directive per line:

    # comment
    key = value
    include other.cfg        # paths relative to the including file

Later assignments win; includes are processed in place. Embedding files are
registered under ``emb.<system>.corpus.<view>`` and ``emb.<system>.query.<section>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .errors import ConfigError, ParseError

DEFAULTS: dict[str, str] = {
    "corpus": "",
    "labels": "",
    "citations": "",
    "qrels": "",
    "out_dir": ".",
    "k": "10",
    "depth": "1000",
    "pool_depth": "1000",
    "alphas": "0.1,0.3,0.5,0.7,0.9",
    "k_rrfs": "10,60,100",
    "bootstrap_B": "10000",
    "seed": "42",
}


def parse_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    values: dict[str, str] = {}
    _parse_into(path, values, seen=set())
    return values


def _parse_into(path: Path, values: dict[str, str], seen: set[Path]) -> None:
    resolved = path.resolve()
    if resolved in seen:
        raise ConfigError(f"config include cycle at {path}")
    seen.add(resolved)
    with open(path, encoding="utf-8") as f:
        for i, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("include ") or line.startswith("include\t"):
                target = line.split(None, 1)[1].strip()
                _parse_into(path.parent / target, values, seen)
                continue
            if "=" not in line:
                raise ParseError(f"{path}: line {i}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()


def dump_config(values: Optional[Mapping[str, str]] = None) -> str:
    merged = {**DEFAULTS, **(values or {})}
    return "\n".join(f"{k} = {merged[k]}" for k in sorted(merged)) + "\n"


@dataclass
class RunConfig:
    """Validated engine configuration."""

    values: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls(parse_config_file(path))

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        if key in self.values:
            return self.values[key]
        if default is not None:
            return default
        return DEFAULTS.get(key)

    def get_int(self, key: str) -> int:
        raw = self.get(key)
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected integer, got {raw!r}") from None

    def get_floats(self, key: str) -> list[float]:
        raw = self.get(key) or ""
        try:
            return [float(x) for x in raw.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from None

    def get_ints(self, key: str) -> list[int]:
        raw = self.get(key) or ""
        try:
            return [int(x) for x in raw.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"{key}: expected comma-separated integers, got {raw!r}") from None

    def embedding_path(self, system: str, side: str, name: str) -> Path:
        """Resolve ``emb.<system>.<side>.<name>``; missing keys or files raise
        a ConfigError naming the cell."""
        key = f"emb.{system}.{side}.{name}"
        raw = self.values.get(key)
        if not raw:
            raise ConfigError(f"no embedding configured for cell ({side}={name!r}, system={system!r}); missing key {key}")
        path = Path(raw)
        if not path.exists():
            raise ConfigError(f"embedding file for cell ({side}={name!r}, system={system!r}) does not exist: {path}")
        return path

    def validate(self) -> None:
        if self.get_int("k") < 1:
            raise ConfigError("k must be >= 1")
        if self.get_int("bootstrap_B") < 100:
            raise ConfigError("bootstrap_B must be >= 100")
        for key in ("corpus", "labels", "citations", "qrels"):
            raw = self.values.get(key)
            if raw and not Path(raw).exists():
                raise ConfigError(f"{key}: path does not exist: {raw}")
        for key, raw in self.values.items():
            if key.startswith("emb.") and raw and not Path(raw).exists():
                raise ConfigError(f"{key}: path does not exist: {raw}")
