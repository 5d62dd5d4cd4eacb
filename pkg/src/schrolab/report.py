"""Experiment reports: a results payload plus enough provenance to rebuild it."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def canonical(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def provenance_hash(config: dict, seed: int | None) -> str:
    return hashlib.sha256(canonical({"config": config, "seed": seed}).encode()).hexdigest()


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    seed: int | None
    results: dict
    version: str = __version__
    wall_clock: float = 0.0
    provenance: str = field(default="")

    def __post_init__(self):
        self.results = jsonable(self.results)
        self.config = jsonable(self.config)
        if not self.provenance:
            self.provenance = provenance_hash(self.config, self.seed)

    def payload_bytes(self) -> bytes:
        """Canonical bytes of the results payload; independent of timing."""
        return canonical(self.results).encode()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "wall_clock": self.wall_clock,
            "provenance": self.provenance,
            "results": self.results,
        }
