"""Ground-truthed test data: noisy analytic fringe fields and diffusion phantoms.

SNR convention: with unit fringe amplitude, ``snr_db = 10 log10(1 / sigma^2)``
where sigma^2 is the total variance of the circular complex Gaussian noise
(sigma^2 / 2 per real component). Noise comes from numpy's PCG64 generator
seeded with ``seed``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .errors import InvalidSpec
from .fields import PhaseMap

PHANTOM_KINDS = ("gaussian-peaks", "plane", "fick-profile")

# (centre x, centre y, width, weight) in units of the image size
_PEAKS = (
    (0.32, 0.36, 0.085, 1.0),
    (0.66, 0.42, 0.070, -0.75),
    (0.50, 0.72, 0.060, 0.55),
)


@dataclass(frozen=True)
class DiffusionSpec:
    D: float = 1.5e-9  # m^2/s
    t: float = 120.0  # s
    c0: float = 1.75  # mol/l
    x_scale: float = 4e-5  # m/pixel

    def __post_init__(self):
        if not (self.D > 0 and self.t > 0):
            raise InvalidSpec("diffusion needs D > 0 and t > 0")
        if not self.x_scale > 0:
            raise InvalidSpec("x_scale must be positive")


# per-kind defaults: peak-to-valley (gaussian-peaks), phase at a gradient of
# c0 per mm (fick-profile); plane phantoms use ``slope`` only
DEFAULT_AMPLITUDE = {"gaussian-peaks": 70.0, "plane": 0.0, "fick-profile": 9.0}
# linear phase in rad/px along (x, y)
DEFAULT_SLOPE = {"gaussian-peaks": (1.2, 1.6), "plane": (0.3, 0.5), "fick-profile": (0.0, 0.0)}


def default_amplitude(kind: str) -> float:
    if kind not in PHANTOM_KINDS:
        raise InvalidSpec(f"unknown phantom kind {kind!r}; choose from {PHANTOM_KINDS}")
    return DEFAULT_AMPLITUDE[kind]


@dataclass(frozen=True)
class PhantomSpec:
    kind: str = "gaussian-peaks"
    amplitude: float | None = None  # None: per-kind default
    size: int = 512
    seed: int = 0
    snr_db: float | None = None
    slope: tuple[float, float] | None = None  # None: per-kind default
    diffusion: DiffusionSpec = field(default_factory=DiffusionSpec)

    def __post_init__(self):
        if self.kind in PHANTOM_KINDS:
            if self.amplitude is None:
                object.__setattr__(self, "amplitude", DEFAULT_AMPLITUDE[self.kind])
            if self.slope is None:
                object.__setattr__(self, "slope", DEFAULT_SLOPE[self.kind])

    def validate(self) -> None:
        if self.kind not in PHANTOM_KINDS:
            raise InvalidSpec(f"unknown phantom kind {self.kind!r}; choose from {PHANTOM_KINDS}")
        if int(self.size) != self.size or self.size < 16:
            raise InvalidSpec(f"phantom size must be an integer >= 16, got {self.size}")
        if self.amplitude is None or not np.isfinite(self.amplitude):
            raise InvalidSpec("amplitude must be finite")
        if self.snr_db is not None and not np.isfinite(self.snr_db):
            raise InvalidSpec("snr_db must be finite or None")
        if self.slope is None or len(self.slope) != 2 or not all(np.isfinite(self.slope)):
            raise InvalidSpec("slope must be finite")


def gaussian_peaks(size: int, amplitude: float = 70.0) -> np.ndarray:
    """Sum of three Gaussian lobes scaled to ``amplitude`` peak-to-valley."""
    y, x = np.mgrid[0:size, 0:size]
    u = (x + 0.5) / size
    v = (y + 0.5) / size
    surf = np.zeros((size, size))
    for cx, cy, wd, weight in _PEAKS:
        surf += weight * np.exp(-((u - cx) ** 2 + (v - cy) ** 2) / (2 * wd * wd))
    surf -= surf.min()
    return amplitude * surf / surf.max()


def fick_concentration(spec: DiffusionSpec, x) -> np.ndarray:
    """Free-diffusion step profile c(x,t) = (c0/2) erfc(x / (2 sqrt(D t)))."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * spec.c0 * erfc(x / (2.0 * np.sqrt(spec.D * spec.t)))


def fick_gradient(spec: DiffusionSpec, x) -> np.ndarray:
    """Analytic dc/dx of the step profile, a Gaussian of variance 2Dt."""
    x = np.asarray(x, dtype=np.float64)
    dt = spec.D * spec.t
    return -spec.c0 / (2.0 * np.sqrt(np.pi * dt)) * np.exp(-x * x / (4.0 * dt))


def fick_positions(size: int, x_scale: float) -> np.ndarray:
    """Physical coordinate of each row, interface at the image centre."""
    return (np.arange(size) - (size - 1) / 2.0) * x_scale


def fick_phase(size: int, spec: DiffusionSpec, amplitude: float) -> np.ndarray:
    """Phase proportional to dc/dx along rows.

    ``amplitude`` is the phase in radians produced by a gradient of c0 per
    millimetre, so profiles at different times share one scale.
    """
    x = fick_positions(size, spec.x_scale)
    prof = amplitude * fick_gradient(spec, x) * 1e-3 / spec.c0
    return np.repeat(prof[:, None], size, axis=1)


def linear_phase(size: int, slope) -> np.ndarray:
    y, x = np.mgrid[0:size, 0:size]
    return slope[0] * x + slope[1] * y


def truth_phase(spec: PhantomSpec) -> np.ndarray:
    """Noiseless unwrapped phase of a phantom."""
    n = spec.size
    if spec.kind == "plane":
        return linear_phase(n, spec.slope)
    if spec.kind == "gaussian-peaks":
        return gaussian_peaks(n, spec.amplitude) + linear_phase(n, spec.slope)
    return fick_phase(n, spec.diffusion, spec.amplitude) + linear_phase(n, spec.slope)


def complex_noise(shape, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    sigma2 = 10.0 ** (-snr_db / 10.0)
    g = rng.standard_normal((2,) + tuple(shape))
    return np.sqrt(sigma2 / 2.0) * (g[0] + 1j * g[1])


def make_phantom(spec: PhantomSpec) -> tuple[PhaseMap, np.ndarray]:
    """Ground-truth unwrapped phase and the noisy analytic field exp(j*phi) + eta."""
    spec.validate()
    phi = truth_phase(spec)
    field_ = np.exp(1j * phi)
    if spec.snr_db is not None:
        rng = np.random.default_rng(spec.seed)
        field_ = field_ + complex_noise(phi.shape, spec.snr_db, rng)
    return PhaseMap(phi, kind="unwrapped"), field_


def carrier_fringe(phase, fx: float, fy: float, levels: int = 255) -> np.ndarray:
    """8-bit intensity 0.5 + 0.5 cos(2pi(fx x + fy y) + phase), rounded."""
    phase = np.asarray(phase, dtype=np.float64)
    h, w = phase.shape
    y, x = np.mgrid[0:h, 0:w]
    intensity = 0.5 + 0.5 * np.cos(2 * np.pi * (fx * x + fy * y) + phase)
    return np.clip(np.rint(intensity * levels), 0, 255).astype(np.uint8)


def measured_snr_db(field_, truth: PhaseMap) -> float:
    """Empirical SNR of a unit-amplitude field against its noiseless version."""
    eta = np.asarray(field_) - np.exp(1j * truth.values)
    return float(10.0 * np.log10(1.0 / np.mean(np.abs(eta) ** 2)))
