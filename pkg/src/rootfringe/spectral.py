"""Fourier-domain conversion of carrier fringes into the analytic signal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CarrierOutOfBand, CarrierOverlapsDC
from .rasters import IntensityImage


@dataclass(frozen=True)
class CarrierSpec:
    fx: float  # cycles/pixel along x
    fy: float  # cycles/pixel along y
    radius: float  # bandpass half-width, cycles/pixel

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"bandpass radius must be positive, got {self.radius}")


def fft2(field) -> np.ndarray:
    """Unnormalised forward 2-D DFT."""
    return np.fft.fft2(np.asarray(field, dtype=np.complex128))


def ifft2(spectrum) -> np.ndarray:
    """Inverse 2-D DFT scaled by 1/(width*height)."""
    return np.fft.ifft2(np.asarray(spectrum, dtype=np.complex128))


def check_carrier(carrier: CarrierSpec) -> None:
    fx, fy, r = carrier.fx, carrier.fy, carrier.radius
    if np.hypot(fx, fy) <= r:
        raise CarrierOverlapsDC(f"carrier ({fx}, {fy}) with radius {r} covers the DC bin")
    if abs(fx) + r > 0.5 or abs(fy) + r > 0.5:
        raise CarrierOutOfBand(f"carrier ({fx}, {fy}) with radius {r} leaves the Nyquist square")


def _bin_aligned(f: float, n: int) -> int | None:
    k = f * n
    kr = round(k)
    return int(kr) if abs(k - kr) < 1e-9 else None


def demodulate_to_analytic(img, carrier: CarrierSpec, return_path: bool = False):
    """Isolate the +1 fringe lobe and translate it to baseband.

    The spectrum is masked by a disc of ``carrier.radius`` around
    (fx, fy) first. A carrier sitting exactly on a DFT bin is then removed
    by rolling the masked spectrum by whole bins ("bin-shift"); otherwise
    the filtered field is multiplied by exp(-j2pi(fx x + fy y))
    ("modulate"). uint8 intensities are scaled to [0, 1].
    """
    check_carrier(carrier)
    pix = img.samples if isinstance(img, IntensityImage) else np.asarray(img)
    intensity = pix.astype(np.float64) / 255.0 if pix.dtype == np.uint8 else pix.astype(np.float64)
    h, w = intensity.shape
    kx = _bin_aligned(carrier.fx, w)
    ky = _bin_aligned(carrier.fy, h)
    fxg = np.fft.fftfreq(w)[None, :]
    fyg = np.fft.fftfreq(h)[:, None]

    spec = fft2(intensity)
    spec = spec * ((fxg - carrier.fx) ** 2 + (fyg - carrier.fy) ** 2 <= carrier.radius ** 2)
    if kx is not None and ky is not None:
        gamma = ifft2(np.roll(spec, shift=(-ky, -kx), axis=(0, 1)))
        path = "bin-shift"
    else:
        y, x = np.mgrid[0:h, 0:w]
        gamma = ifft2(spec) * np.exp(-2j * np.pi * (carrier.fx * x + carrier.fy * y))
        path = "modulate"
    return (gamma, path) if return_path else gamma


def find_carrier_peak(img, exclude_radius: float = 0.02) -> tuple[float, float]:
    """Location (fx, fy) of the strongest non-DC spectral peak with fx >= 0.

    Ties between the mirrored lobes are resolved toward positive fx.
    """
    pix = img.samples if isinstance(img, IntensityImage) else np.asarray(img)
    intensity = pix.astype(np.float64)
    h, w = intensity.shape
    mag = np.abs(fft2(intensity - intensity.mean()))
    fxg = np.fft.fftfreq(w)[None, :] * np.ones((h, 1))
    fyg = np.fft.fftfreq(h)[:, None] * np.ones((1, w))
    mag[np.hypot(fxg, fyg) <= exclude_radius] = 0.0
    mag[fxg < 0] = 0.0
    iy, ix = np.unravel_index(np.argmax(mag), mag.shape)
    return float(fxg[iy, ix]), float(fyg[iy, ix])
