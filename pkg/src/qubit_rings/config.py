"""Run configuration shared by the CLI and the experiment scripts."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .model import DomainError
from .perturbation import MAX_SERIES_ORDER

CONFIG_ENV_VAR = "QUBIT_RINGS_CONFIG"
MAX_QUADRATURE_ORDER = 400
OUTPUT_FORMATS = ("csv", "json")

DEFAULT_TOLERANCES = {
    "y_root": 1e-10,
    "residual": 1e-10,
    "concurrence_match": 1e-6,
}


@dataclass(frozen=True)
class RunConfig:
    quadrature_order: int = 30
    series_order: int = 14
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_format: str = "csv"

    def __post_init__(self):
        if not 1 <= self.quadrature_order <= MAX_QUADRATURE_ORDER:
            raise DomainError(
                f"quadrature_order must lie in [1, {MAX_QUADRATURE_ORDER}], got {self.quadrature_order}"
            )
        if not 0 <= self.series_order <= MAX_SERIES_ORDER:
            raise DomainError(f"series_order must lie in [0, {MAX_SERIES_ORDER}], got {self.series_order}")
        if self.output_format not in OUTPUT_FORMATS:
            raise DomainError(f"output_format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise DomainError(f"unknown tolerance keys: {sorted(unknown)}")
        for key, val in self.tolerances.items():
            if not (isinstance(val, (int, float)) and val > 0):
                raise DomainError(f"tolerance {key} must be a positive number, got {val!r}")
        object.__setattr__(self, "tolerances", {**DEFAULT_TOLERANCES, **self.tolerances})

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> "RunConfig":
        data = asdict(self)
        data.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig(**data)

    def digest(self) -> str:
        """Short SHA-256 of the canonical JSON form."""
        text = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Read a JSON config from ``path`` or the file named by ``$QUBIT_RINGS_CONFIG``."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"config {path} must hold a JSON object")
    return RunConfig.from_mapping(data)
