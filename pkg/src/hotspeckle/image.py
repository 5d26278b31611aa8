"""Raster primitives shared by every stage of the pipeline.

Images are plain 2-D float64 numpy arrays with intensities normalized to
[0, 1]; 8-bit values appear only at the I/O boundary (see ``imgio``).
All windowed operations use replicate padding so that borders do not
introduce spurious edges.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.ndimage import correlate1d, uniform_filter

Array = np.ndarray

# Separable Sobel: binomial smoothing along one axis, central difference
# along the other, scaled so a unit step edge yields gradient magnitude 1.
# The difference stage sees an exactly constant map when the input is
# constant, making the zero-gradient invariant exact in floating point.
_SOBEL_SMOOTH = np.array([0.25, 0.5, 0.25])
_SOBEL_DIFF = np.array([-1.0, 0.0, 1.0])


class GradientField(NamedTuple):
    """Per-pixel horizontal/vertical derivatives and their magnitude."""

    gx: Array
    gy: Array
    magnitude: Array


def as_image(data, *, clip: bool = False) -> Array:
    """Coerce ``data`` to a valid float64 grayscale raster in [0, 1].

    With ``clip=True`` out-of-range values are clamped instead of rejected.
    """
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale raster, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"empty raster: shape {img.shape}")
    if clip:
        return np.clip(img, 0.0, 1.0)
    if not np.isfinite(img).all():
        raise ValueError("raster contains non-finite values")
    lo, hi = float(img.min()), float(img.max())
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"intensities outside [0, 1]: min={lo:g} max={hi:g}")
    return img


def to_u8(img: Array) -> Array:
    """Quantize [0, 1] intensities to uint8 (round-half-away at the scale 255)."""
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def from_u8(raw: Array) -> Array:
    """Map uint8 values linearly onto [0, 1]."""
    return raw.astype(np.float64) / 255.0


def local_mean(img: Array, radius: int) -> Array:
    """Arithmetic mean over a (2r+1)^2 replicate-padded sliding window."""
    if radius < 1:
        raise ValueError("window radius must be >= 1")
    return uniform_filter(img, size=2 * radius + 1, mode="nearest")


def local_variance(img: Array, radius: int) -> Array:
    """Population variance over a (2r+1)^2 replicate-padded sliding window."""
    m = local_mean(img, radius)
    m2 = local_mean(img * img, radius)
    # Cancellation can leave tiny negatives.
    return np.maximum(m2 - m * m, 0.0)


def local_std(img: Array, radius: int) -> Array:
    return np.sqrt(local_variance(img, radius))


def gradient(img: Array) -> GradientField:
    """Sobel derivative field with replicate boundary handling.

    Normalized so a unit step edge produces magnitude 1 on the two columns
    (rows) adjacent to the step.
    """
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"image too small for gradients: shape {img.shape}")
    smooth_rows = correlate1d(img, _SOBEL_SMOOTH, axis=0, mode="nearest")
    smooth_cols = correlate1d(img, _SOBEL_SMOOTH, axis=1, mode="nearest")
    gx = correlate1d(smooth_rows, _SOBEL_DIFF, axis=1, mode="nearest")
    gy = correlate1d(smooth_cols, _SOBEL_DIFF, axis=0, mode="nearest")
    return GradientField(gx=gx, gy=gy, magnitude=np.hypot(gx, gy))


def mig(img: Array) -> float:
    """Mean intensity gradient on the 8-bit scale (intensities x 255).

    Standard speckle-quality score: the larger, the better the pattern
    supports subset correlation.
    """
    return float(gradient(img).magnitude.mean() * 255.0)


def fft2(img: Array) -> Array:
    """2-D DFT; the (0, 0) spectrum bin is the DC term."""
    return np.fft.fft2(img)


def ifft2(spectrum: Array) -> Array:
    """Inverse 2-D DFT returning the real part."""
    return np.fft.ifft2(spectrum).real


def psnr(ref: Array, test: Array) -> float:
    """Peak signal-to-noise ratio in dB for unit-range images."""
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)
