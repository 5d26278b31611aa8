"""Synthetic ground truth: speckle patterns, exposure and haze degradations.

Every generator is a pure function of its spec, including the seed; the
RNG is numpy's PCG64 so corpora replay bit-identically across platforms.
Physical-context helpers (blackbody radiance, refractive index of heated
gas) support plausibility checks of the degradation regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from .image import Array, fft2, ifft2
from .restore import TurbulenceParams, turbulence_otf

# Exact SI defining constants.
PLANCK_H = 6.62607015e-34
SPEED_OF_LIGHT = 299792458.0
BOLTZMANN_K = 1.380649e-23


@dataclass(frozen=True)
class SpeckleSpec:
    """Parameters of the random-dot speckle generator.

    dot_density counts dots per 1000 px^2; dots are darker disks with a
    one-pixel anti-aliased rim on a uniform background.
    """

    width: int = 256
    height: int = 256
    dot_density: float = 8.0
    dot_radius_mean: float = 3.0
    dot_radius_std: float = 0.5
    background: float = 0.85
    dot_intensity: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.dot_density < 0.0:
            raise ValueError("dot_density must be >= 0")
        if self.dot_radius_mean <= 0.0:
            raise ValueError("dot radius must be > 0")
        for name in ("background", "dot_intensity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class HazeSpec:
    """Heat-haze degradation: turbulence blur, smooth random warp, noise.

    warp_amplitude is the RMS of the displacement field in pixels;
    warp_correlation_length is the Gaussian smoothing sigma (px) of the
    white-noise field it is built from.
    """

    params: TurbulenceParams = field(default_factory=TurbulenceParams)
    warp_amplitude: float = 0.5
    warp_correlation_length: float = 40.0
    noise_sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.warp_amplitude < 0.0:
            raise ValueError("warp_amplitude must be >= 0")
        if self.warp_correlation_length < 4.0:
            raise ValueError("warp_correlation_length must be >= 4 px")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")


class ExposureResult(NamedTuple):
    """Degraded image plus the mask of pixels destroyed by clipping."""

    image: Array
    clipped: Array


def gen_speckle(spec: SpeckleSpec) -> Array:
    """Render anti-aliased random dots on a uniform background."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    img_cov = np.zeros((spec.height, spec.width))
    n_dots = int(round(spec.dot_density * spec.width * spec.height / 1000.0))
    if n_dots > 0:
        cx = rng.uniform(0.0, spec.width, size=n_dots)
        cy = rng.uniform(0.0, spec.height, size=n_dots)
        radii = np.maximum(
            rng.normal(spec.dot_radius_mean, spec.dot_radius_std, size=n_dots), 0.5
        )
        for x0, y0, r in zip(cx, cy, radii):
            x_lo = max(int(math.floor(x0 - r - 1.0)), 0)
            x_hi = min(int(math.ceil(x0 + r + 1.0)) + 1, spec.width)
            y_lo = max(int(math.floor(y0 - r - 1.0)), 0)
            y_hi = min(int(math.ceil(y0 + r + 1.0)) + 1, spec.height)
            if x_lo >= x_hi or y_lo >= y_hi:
                continue
            yy, xx = np.mgrid[y_lo:y_hi, x_lo:x_hi]
            dist = np.hypot(xx - x0, yy - y0)
            cov = np.clip(r + 0.5 - dist, 0.0, 1.0)
            patch = img_cov[y_lo:y_hi, x_lo:x_hi]
            np.maximum(patch, cov, out=patch)
    return spec.background + (spec.dot_intensity - spec.background) * img_cov


def degrade_exposure(img: Array, mode: str, gain: float) -> ExposureResult:
    """Scale intensities by a gain and clamp, recording clipped pixels."""
    if mode not in ("under", "over"):
        raise ValueError(f"mode must be 'under' or 'over', got {mode!r}")
    if gain <= 0.0:
        raise ValueError("gain must be > 0")
    if mode == "under" and gain > 1.0:
        raise ValueError("underexposure requires gain <= 1")
    if mode == "over" and gain < 1.0:
        raise ValueError("overexposure requires gain >= 1")
    scaled = img * gain
    clipped = (scaled > 1.0) | (scaled < 0.0)
    return ExposureResult(image=np.clip(scaled, 0.0, 1.0), clipped=clipped)


def degrade_haze(img: Array, spec: HazeSpec) -> Array:
    """Turbulence blur, then a smooth random warp, then additive noise.

    The warp is Gaussian-filtered white noise rescaled to the requested
    RMS amplitude and applied by bilinear resampling with replicate
    boundaries. Deterministic per seed.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    h, w = img.shape
    out = img
    if spec.params.beta > 0.0:
        out = np.clip(ifft2(fft2(out) * turbulence_otf(w, h, spec.params)), 0.0, 1.0)
    if spec.warp_amplitude > 0.0:
        dx = gaussian_filter(rng.standard_normal((h, w)), spec.warp_correlation_length, mode="reflect")
        dy = gaussian_filter(rng.standard_normal((h, w)), spec.warp_correlation_length, mode="reflect")
        for d in (dx, dy):
            rms = float(np.sqrt(np.mean(d * d)))
            if rms > 0.0:
                d *= spec.warp_amplitude / rms
        yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
        out = map_coordinates(out, [yy + dy, xx + dx], order=1, mode="nearest")
    if spec.noise_sigma > 0.0:
        out = out + rng.normal(0.0, spec.noise_sigma, size=(h, w))
    return np.clip(out, 0.0, 1.0)


def planck_radiance(wavelength: float, temperature: float) -> float:
    """Blackbody spectral radiance in W sr^-1 m^-3.

    radiance = (2 h c^2 / lambda^5) / (exp(h c / (lambda k T)) - 1)
    evaluated with the exact SI constants.
    """
    if wavelength <= 0.0:
        raise ValueError("wavelength must be > 0")
    if temperature <= 0.0:
        raise ValueError("temperature must be > 0")
    exponent = PLANCK_H * SPEED_OF_LIGHT / (wavelength * BOLTZMANN_K * temperature)
    return (2.0 * PLANCK_H * SPEED_OF_LIGHT**2 / wavelength**5) / math.expm1(exponent)


def gladstone_dale(gas_density: float, k_gd: float) -> float:
    """Refractive index n = 1 + k rho of a gas at the given density."""
    if gas_density < 0.0:
        raise ValueError("gas density must be >= 0")
    if k_gd <= 0.0:
        raise ValueError("Gladstone-Dale constant must be > 0")
    return 1.0 + k_gd * gas_density
