"""Analytic field to wrapped and unwrapped phase in one call."""

from __future__ import annotations

from .rootmusic import EstimatorConfig, estimate_field
from .unwrap import unwrap


def retrieve_phase(field, cfg: EstimatorConfig | None = None, threads: int = 1):
    """Return (wrapped PhaseMap, unwrapped PhaseMap, diagnostics dict)."""
    wrapped, diagnostics = estimate_field(field, cfg, threads)
    return wrapped, unwrap(wrapped), diagnostics
