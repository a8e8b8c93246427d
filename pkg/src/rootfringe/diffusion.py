"""Refractive-index gradient maps and time-series profiles from unwrapped phase."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, InvalidGeometry, UnsortedTimes, WrappedInput
from .fields import PhaseMap

GEOMETRY_KEYS = ("f_x", "n0", "L_cell", "mu", "pixel_pitch")


@dataclass(frozen=True)
class OpticalGeometry:
    f_x: float  # fringe frequency, cycles/m
    n0: float  # reference refractive index
    L_cell: float  # cell path length along the optical axis, m
    mu: float  # imaging magnification
    pixel_pitch: float = 1.0  # m/pixel

    def validate(self) -> None:
        if not (self.f_x > 0 and self.n0 >= 1 and self.L_cell > 0 and self.mu > 0):
            raise InvalidGeometry(
                f"need f_x > 0, n0 >= 1, L_cell > 0, mu > 0; got {self}"
            )
        if not self.pixel_pitch > 0:
            raise InvalidGeometry("pixel_pitch must be positive")

    @property
    def gain(self) -> float:
        """dn/dx per radian of phase: n0 / (2 mu f_x L_cell^2), in 1/m."""
        return self.n0 / (2.0 * self.mu * self.f_x * self.L_cell ** 2)


def parse_geometry(text: str) -> OpticalGeometry:
    """Read flat ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"geometry line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            values[key] = float(val)
        except ValueError as exc:
            raise InputError(f"geometry key {key}: {val!r} is not a number") from exc
    missing = [k for k in GEOMETRY_KEYS if k not in values]
    if missing:
        raise InputError(f"geometry file missing key(s): {', '.join(missing)}")
    geom = OpticalGeometry(**{k: values[k] for k in GEOMETRY_KEYS})
    geom.validate()
    return geom


def index_gradient(phase: PhaseMap, geom: OpticalGeometry) -> np.ndarray:
    """dn/dx map (1/m): the unwrapped phase scaled by the geometry gain."""
    if not isinstance(phase, PhaseMap):
        phase = PhaseMap(np.asarray(phase), kind="unwrapped")
    if phase.kind != "unwrapped":
        raise WrappedInput("index_gradient needs an unwrapped phase map")
    geom.validate()
    return geom.gain * phase.values


def column_profile(values) -> np.ndarray:
    """Average each row across columns: one value per row."""
    return np.asarray(values, dtype=np.float64).mean(axis=1)


def stack_series(frames, subtract_first: bool = False):
    """Stack (time, PhaseMap) frames and extract their vertical profiles.

    Returns ``(times, stack, profiles)`` with ``stack`` shaped
    (frames, height, width) and ``profiles`` shaped (height, frames).
    """
    frames = list(frames)
    if not frames:
        raise InputError("no frames given")
    times = np.array([float(t) for t, _ in frames])
    if np.any(np.diff(times) <= 0):
        raise UnsortedTimes(f"frame times must increase strictly, got {times.tolist()}")
    arrays = [p.values if isinstance(p, PhaseMap) else np.asarray(p, dtype=np.float64) for _, p in frames]
    shape = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != shape:
            raise DimensionMismatch(f"frame shape {a.shape} differs from {shape}")
    stack = np.stack(arrays)
    if subtract_first:
        stack = stack - stack[0]
    profiles = np.stack([column_profile(a) for a in stack], axis=1)
    return times, stack, profiles


def profile_table(times, profiles, prefix: str = "t"):
    """Header and rows for a profile CSV: ``row`` then one column per frame."""
    header = ["row"] + [f"{prefix}{t:g}" for t in times]
    rows = [[i] + list(profiles[i]) for i in range(profiles.shape[0])]
    return header, rows
