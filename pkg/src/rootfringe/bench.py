"""Benchmark sweeps: RMSE against SNR, RMSE against window size, and runtime scaling."""

from __future__ import annotations

import os
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .pipeline import retrieve_phase
from .rootmusic import EstimatorConfig, estimate_field
from .synth import PhantomSpec, make_phantom


@dataclass
class BenchRecord:
    param_name: str
    param_value: float
    rmse: float | None = None
    wall_ms: float | None = None
    seed: int = 0
    trials: int = 1
    threads: int | None = None

    def __post_init__(self):
        if self.rmse is None and self.wall_ms is None:
            raise ValueError("a bench record needs rmse or wall_ms")

    def as_row(self, columns):
        lookup = {
            self.param_name: self.param_value,
            "rmse_rad": self.rmse,
            "wall_ms": self.wall_ms,
            "seed": self.seed,
            "trials": self.trials,
            "threads": self.threads,
        }
        return [lookup[c] for c in columns]


def aligned_rmse(estimate, truth, border: int) -> float:
    """RMSE after removing the median offset, ignoring a border of ``border`` pixels."""
    est = np.asarray(estimate, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    if border > 0:
        est = est[border:-border, border:-border]
        tru = tru[border:-border, border:-border]
    diff = est - tru
    diff = diff - np.median(diff)
    return float(np.sqrt(np.mean(diff * diff)))


def trial_rmse(spec: PhantomSpec, cfg: EstimatorConfig, threads: int = 1) -> float:
    truth, field = make_phantom(spec)
    _, unwrapped, _ = retrieve_phase(field, cfg, threads)
    return aligned_rmse(unwrapped.values, truth.values, cfg.L)


def _trial_specs(base: PhantomSpec, trials: int):
    return [PhantomSpec(**{**base.__dict__, "seed": base.seed + i}) for i in range(trials)]


def rmse_vs_snr(snr_list, L=5, phantom="gaussian-peaks", trials=3, seed=0, size=512, threads=1, progress=None):
    records = []
    cfg = EstimatorConfig(L=L)
    for snr in snr_list:
        base = PhantomSpec(kind=phantom, size=size, seed=seed, snr_db=float(snr))
        errs = [trial_rmse(s, cfg, threads) for s in _trial_specs(base, trials)]
        rec = BenchRecord("snr_db", float(snr), rmse=float(np.mean(errs)), seed=seed, trials=trials)
        records.append(rec)
        if progress:
            progress(rec)
    return records


def window_sweep(L_list, snr=0.0, phantom="gaussian-peaks", trials=3, seed=0, size=512, threads=1, progress=None):
    records = []
    specs = _trial_specs(PhantomSpec(kind=phantom, size=size, seed=seed, snr_db=snr), trials)
    for L in L_list:
        cfg = EstimatorConfig(L=int(L))
        errs = [trial_rmse(s, cfg, threads) for s in specs]
        rec = BenchRecord("L", int(L), rmse=float(np.mean(errs)), seed=seed, trials=trials)
        records.append(rec)
        if progress:
            progress(rec)
    return records


def time_estimate(field, cfg: EstimatorConfig, threads: int, repeats: int) -> float:
    """Median wall time in milliseconds of the per-pixel estimator."""
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        estimate_field(field, cfg, threads)
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times)


def scaling(sizes, threads_list, L=3, repeats=5, seed=0, snr=0.0, progress=None):
    cfg = EstimatorConfig(L=L)
    # compile outside the timed region
    estimate_field(make_phantom(PhantomSpec(size=16, snr_db=snr, seed=seed))[1], cfg, 1)
    records = []
    for n in sizes:
        _, field = make_phantom(PhantomSpec(size=int(n), seed=seed, snr_db=snr))
        for t in threads_list:
            ms = time_estimate(field, cfg, int(t), repeats)
            rec = BenchRecord("size", int(n), wall_ms=ms, seed=seed, trials=repeats, threads=int(t))
            records.append(rec)
            if progress:
                progress(rec)
    return records


def physical_cores() -> int:
    """Best-effort count of usable cores (affinity-aware)."""
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1
