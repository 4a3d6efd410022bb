"""Estimate reports and their deterministic JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class EstimateReport:
    method: str
    estimate: float
    spread: float
    K: float = 1.0
    config: dict[str, Any] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.K > 0:
            raise DomainError("K must be positive")
        if not self.spread >= 0:
            raise DomainError("spread must be nonnegative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "estimate": self.estimate,
            "spread": self.spread,
            "K": self.K,
            "config": self.config,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(obj) -> str:
    """JSON with sorted keys and shortest round-trip floats (byte-stable)."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"
