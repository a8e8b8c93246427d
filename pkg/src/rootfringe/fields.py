"""Phase-map container and the wrapping convention used throughout.

Complex fields are plain ``complex128`` arrays of shape (height, width),
row-major with y as the slow axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("wrapped", "unwrapped")


def wrap(phase):
    """Wrap radians into (-pi, pi]."""
    phase = np.asarray(phase, dtype=np.float64)
    out = np.pi - np.mod(np.pi - phase, 2.0 * np.pi)
    return np.where(out <= -np.pi, out + 2.0 * np.pi, out)


@dataclass
class PhaseMap:
    values: np.ndarray
    kind: str = "wrapped"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("phase map must be 2-D")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("phase map contains non-finite values")
        if self.kind == "wrapped":
            v = self.values
            if np.any(v <= -np.pi) or np.any(v > np.pi):
                raise ValueError("wrapped phase must lie in (-pi, pi]")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]
