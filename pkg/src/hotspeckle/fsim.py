"""Full-reference feature-similarity score (phase congruency + gradients).

Phase congruency is computed from a log-Gabor quadrature filter bank:
each frequency-domain filter lives on an angular half-plane, so the
inverse transform of the filtered spectrum is an analytic signal whose
real/imaginary parts are the even/odd responses. Orientation responses
are summed within each scale before amplitudes are formed.

All internal arithmetic runs on the 8-bit scale (intensities x 255) so
the stabilizing constants sit in their intended regime.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .image import Array, gradient

MIN_FSIM_SIZE = 32


class UndefinedScoreError(ValueError):
    """Raised when both inputs carry zero phase congruency everywhere."""


@dataclass(frozen=True)
class FsimConstants:
    """Stabilizers of the similarity ratios (defaults follow common use)."""

    epsilon: float = 0.001
    t1: float = 0.85
    t2: float = 160.0

    def __post_init__(self):
        if min(self.epsilon, self.t1, self.t2) <= 0.0:
            raise ValueError("all constants must be strictly positive")


@dataclass(frozen=True)
class LogGaborConfig:
    n_scales: int = 4
    n_orientations: int = 4
    min_wavelength: float = 6.0
    scale_mult: float = 2.0
    sigma_ratio: float = 0.55


class LogGaborBank(NamedTuple):
    """Immutable frequency-domain filter stack, shape (scales, orients, H, W)."""

    filters: Array
    config: LogGaborConfig
    width: int
    height: int


class PcMap(NamedTuple):
    """Phase congruency, summed amplitude and pooled energy maps."""

    pc: Array
    amplitude_sum: Array
    energy: Array


@lru_cache(maxsize=16)
def build_log_gabor(width: int, height: int, cfg: LogGaborConfig = LogGaborConfig()) -> LogGaborBank:
    """Construct the log-Gabor quadrature bank for a raster size.

    Every filter has exactly zero DC response. Banks are cached per
    (size, config) and safe to share across threads.
    """
    if width < MIN_FSIM_SIZE or height < MIN_FSIM_SIZE:
        raise ValueError(
            f"image too small for the filter bank: {width}x{height} (min {MIN_FSIM_SIZE})"
        )
    fx = np.fft.fftfreq(width)
    fy = np.fft.fftfreq(height)
    x = fx[np.newaxis, :]
    y = fy[:, np.newaxis]
    radius = np.hypot(x, y)
    radius[0, 0] = 1.0  # avoid log(0); DC is zeroed below
    theta = np.arctan2(-y, x)
    sin_t, cos_t = np.sin(theta), np.cos(theta)

    # Butterworth low-pass keeps the largest-frequency corners tame.
    lowpass = 1.0 / (1.0 + (radius / 0.45) ** 30)

    n_s, n_o = cfg.n_scales, cfg.n_orientations
    log_sigma = np.log(cfg.sigma_ratio)
    radial = np.empty((n_s, height, width))
    for s in range(n_s):
        f0 = 1.0 / (cfg.min_wavelength * cfg.scale_mult**s)
        lg = np.exp(-np.log(radius / f0) ** 2 / (2.0 * log_sigma**2))
        lg *= lowpass
        lg[0, 0] = 0.0
        radial[s] = lg

    spreads = np.empty((n_o, height, width))
    for o in range(n_o):
        angle = o * np.pi / n_o
        ds = sin_t * np.cos(angle) - cos_t * np.sin(angle)
        dc = cos_t * np.cos(angle) + sin_t * np.sin(angle)
        dtheta = np.minimum(np.abs(np.arctan2(ds, dc)) * n_o / 2.0, np.pi)
        spreads[o] = (np.cos(dtheta) + 1.0) / 2.0

    filters = radial[:, np.newaxis, :, :] * spreads[np.newaxis, :, :, :]
    filters.setflags(write=False)
    return LogGaborBank(filters=filters, config=cfg, width=width, height=height)


def phase_congruency(img: Array, bank: LogGaborBank, eps: float = 0.001) -> PcMap:
    """Phase congruency map PC = E / (eps + sum_n A_n), in [0, 1].

    Even/odd responses are pooled across orientations inside each scale;
    A_n is the per-scale local amplitude and E the magnitude of the summed
    response vector.
    """
    if img.shape != (bank.height, bank.width):
        raise ValueError(
            f"image shape {img.shape} does not match bank "
            f"({bank.height}, {bank.width})"
        )
    spectrum = np.fft.fft2(img)
    sum_e = np.zeros(img.shape)
    sum_o = np.zeros(img.shape)
    amp_sum = np.zeros(img.shape)
    for s in range(bank.config.n_scales):
        e_scale = np.zeros(img.shape)
        o_scale = np.zeros(img.shape)
        for o in range(bank.config.n_orientations):
            resp = np.fft.ifft2(spectrum * bank.filters[s, o])
            e_scale += resp.real
            o_scale += resp.imag
        amp_sum += np.hypot(e_scale, o_scale)
        sum_e += e_scale
        sum_o += o_scale
    energy = np.hypot(sum_e, sum_o)
    pc = energy / (eps + amp_sum)
    return PcMap(pc=pc, amplitude_sum=amp_sum, energy=energy)


def fsim(
    ref: Array,
    target: Array,
    constants: FsimConstants = FsimConstants(),
    bank_cfg: LogGaborConfig = LogGaborConfig(),
) -> float:
    """Feature-similarity score in (0, 1]; 1 for identical images.

    Pools the phase-congruency and gradient similarity maps weighted by
    the pointwise maximum phase congruency. Symmetric in its arguments
    (bit-exactly). Raises UndefinedScoreError when both images are
    featureless (all phase congruency zero).
    """
    if ref.shape != target.shape:
        raise ValueError("images must share dimensions")
    h, w = ref.shape
    bank = build_log_gabor(w, h, bank_cfg)
    a = ref * 255.0
    b = target * 255.0
    pc1 = phase_congruency(a, bank, constants.epsilon).pc
    pc2 = phase_congruency(b, bank, constants.epsilon).pc
    g1 = gradient(a).magnitude
    g2 = gradient(b).magnitude
    s_pc = (2.0 * pc1 * pc2 + constants.t1) / (pc1 * pc1 + pc2 * pc2 + constants.t1)
    s_g = (2.0 * g1 * g2 + constants.t2) / (g1 * g1 + g2 * g2 + constants.t2)
    weight = np.maximum(pc1, pc2)
    denom = float(weight.sum())
    if denom == 0.0:
        raise UndefinedScoreError("both images have zero phase congruency everywhere")
    return float((s_pc * s_g * weight).sum() / denom)
