"""Multiscale edge-aware guided filtering.

The filter runs in four stages: gradients are classified into weak and
strong edges by comparing local gradient variance against its global mean,
each class is denoised by a single-level Haar shrink, the merged gradient
map drives an edge-strength weight field, and a regularized local linear
model produces the filtered image. Repeating the chain over several window
radii gives the multiscale variant.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .image import Array, GradientField, gradient, local_mean, local_std, local_variance

DEFAULT_EDGE_THRESHOLD = 0.2


@dataclass(frozen=True)
class GuidedFilterParams:
    """Tunables of the edge-aware guided filter.

    lam is the regularization weight of the linear-model solve; eta and
    mu_kappa_inf shape the sigmoid that maps edge strength kappa to the
    slope prior psi (mu_kappa_inf=None means "use the image mean of
    kappa"). epsilon guards every division. scales lists the window radii
    used by multiscale_filter.
    """

    radius: int = 5
    lam: float = 1e-3
    eta: float = 10.0
    mu_kappa_inf: float | None = None
    epsilon: float = 1e-3
    scales: tuple[int, ...] = (2, 5, 9)

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if self.lam <= 0.0:
            raise ValueError("lam must be > 0")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be > 0")
        if len(self.scales) == 0:
            raise ValueError("scales must be non-empty")


@dataclass(frozen=True)
class EdgeClassification:
    """Weak/strong edge partition of a raster.

    rho is the per-pixel classification metric; the two boolean masks are
    disjoint and cover every pixel.
    """

    rho: Array
    weak_mask: Array
    strong_mask: Array
    threshold: float


@dataclass(frozen=True)
class EdgeWeightMap:
    """Edge strength kappa, global weight t_hat and slope prior psi."""

    kappa: Array
    t_hat: Array
    psi: Array


def classify_edges(
    grad: GradientField, radius: int = 5, threshold: float = DEFAULT_EDGE_THRESHOLD
) -> EdgeClassification:
    """Split pixels into weak and strong edge sets.

    rho = |sigma_r(|grad|) / mean(sigma_r) - 1| where sigma_r is the local
    variance of gradient magnitudes in a radius-r window. Pixels with
    rho < threshold form the weak set. A constant image (zero mean
    variance) classifies as all-weak by convention.
    """
    if threshold <= 0.0:
        raise ValueError("threshold must be > 0")
    var_map = local_variance(grad.magnitude, radius)
    mu = float(var_map.mean())
    if mu <= np.finfo(np.float64).tiny:
        rho = np.zeros_like(var_map)
    else:
        rho = np.abs(var_map / mu - 1.0)
    weak = rho < threshold
    return EdgeClassification(
        rho=rho, weak_mask=weak, strong_mask=~weak, threshold=threshold
    )


def _haar_soft(field: Array, thresh: float) -> Array:
    """Single-level 2x2 Haar transform with soft thresholding of all bands.

    Uses the mean/half-difference normalization, so every coefficient of a
    field bounded by ``a`` is itself bounded by ``a``: a field entirely
    below the threshold collapses to exactly zero, and thresh=0 is the
    identity.
    """
    if thresh <= 0.0:
        return field.copy()
    h, w = field.shape
    padded = field
    if h % 2 or w % 2:
        padded = np.pad(field, ((0, h % 2), (0, w % 2)), mode="edge")
    a = padded[0::2, 0::2]
    b = padded[0::2, 1::2]
    c = padded[1::2, 0::2]
    d = padded[1::2, 1::2]
    ll = (a + b + c + d) / 4.0
    hl = (a - b + c - d) / 4.0
    lh = (a + b - c - d) / 4.0
    hh = (a - b - c + d) / 4.0

    def soft(x):
        return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)

    ll, hl, lh, hh = soft(ll), soft(hl), soft(lh), soft(hh)
    out = np.empty_like(padded)
    out[0::2, 0::2] = ll + hl + lh + hh
    out[0::2, 1::2] = ll - hl + lh - hh
    out[1::2, 0::2] = ll + hl - lh - hh
    out[1::2, 1::2] = ll - hl - lh + hh
    return out[:h, :w]


def _mad(values: Array) -> float:
    if values.size == 0:
        return 0.0
    med = np.median(values)
    return float(np.median(np.abs(values - med)))


def denoise_gradients(
    cls: EdgeClassification, grad: GradientField, strong_scale: float = 0.25
) -> Array:
    """Merge shrunken weak-set and strong-set gradients into a map g'.

    Each set is Haar-shrunk at 3x the median absolute deviation of its own
    magnitudes; the strong-set threshold is additionally scaled by
    strong_scale (0 disables shrinkage entirely). The merged map is
    clamped to be non-negative.
    """
    mag = grad.magnitude
    weak, strong = cls.weak_mask, cls.strong_mask
    t_weak = 3.0 * _mad(mag[weak])
    t_strong = strong_scale * 3.0 * _mad(mag[strong])
    g_weak = _haar_soft(np.where(weak, mag, 0.0), t_weak)
    g_strong = _haar_soft(np.where(strong, mag, 0.0), t_strong)
    merged = np.where(weak, g_weak, 0.0) + np.where(strong, g_strong, 0.0)
    return np.maximum(merged, 0.0)


def edge_weight(g_prime: Array, params: GuidedFilterParams) -> EdgeWeightMap:
    """Build the edge-strength weight field from a merged gradient map.

    kappa(m) = cv_3(m) * cv_r(m) * g'(m) with cv_s the coefficient of
    variation (local std over local mean) of g' in a radius-s window.
    t_hat(m) averages the ratios (kappa(m)+eps)/(kappa(p)+eps) over all
    pixels p, so the mean of 1/t_hat is exactly 1. psi squashes kappa
    through a sigmoid centered at mu_kappa_inf.
    """
    eps = params.epsilon

    def cv(radius):
        return local_std(g_prime, radius) / (local_mean(g_prime, radius) + eps)

    kappa = cv(3) * cv(params.radius) * g_prime
    inv_mean = float(np.mean(1.0 / (kappa + eps)))
    t_hat = (kappa + eps) * inv_mean
    mu_k = params.mu_kappa_inf
    if mu_k is None:
        mu_k = float(kappa.mean())
    # expit saturates to exactly 0/1 for |x| > ~37; keep psi strictly open.
    psi = np.clip(expit(params.eta * (kappa - mu_k)), 1e-12, 1.0 - 1e-12)
    return EdgeWeightMap(kappa=kappa, t_hat=t_hat, psi=psi)


def guided_filter(
    src: Array,
    guide: Array,
    weights: EdgeWeightMap,
    params: GuidedFilterParams,
    clip: tuple[float | None, float | None] = (0.0, 1.0),
) -> Array:
    """Edge-aware regularized local linear filter.

    Per window m the model output a_m*q + b_m minimizes
    sum((a q_i + b - I_i)^2) + (lam/t_hat)(a - psi)^2 giving

        a = (cov(q, I) + (lam/t_hat) psi) / (var(q) + lam/t_hat)
        b = mean(I) - a mean(q)

    and each pixel averages a, b over every window covering it. The
    default clip keeps the [0, 1] image contract; pass (0, None) when
    filtering unbounded maps such as reflectance layers.
    """
    if src.shape != guide.shape:
        raise ValueError("input and guide must share dimensions")
    r = params.radius
    lam_w = params.lam / weights.t_hat
    mean_q = local_mean(guide, r)
    mean_i = local_mean(src, r)
    var_q = np.maximum(local_mean(guide * guide, r) - mean_q * mean_q, 0.0)
    cov_qi = local_mean(guide * src, r) - mean_q * mean_i
    a = (cov_qi + lam_w * weights.psi) / (var_q + lam_w)
    b = mean_i - a * mean_q
    out = local_mean(a, r) * guide + local_mean(b, r)
    return np.clip(out, clip[0], clip[1])


def multiscale_filter(
    src: Array,
    params: GuidedFilterParams,
    scales: tuple[int, ...] | None = None,
    clip: tuple[float | None, float | None] = (0.0, 1.0),
) -> Array:
    """Sequential guided filtering over several radii.

    The edge classification and weight map are recomputed from the current
    image at every scale, so later (larger) scales see the already-cleaned
    result of earlier ones.
    """
    if scales is None:
        scales = params.scales
    if len(scales) == 0:
        raise ValueError("scale list must be non-empty")
    out = src
    for radius in scales:
        p = replace(params, radius=radius)
        grad = gradient(out)
        cls = classify_edges(grad, radius=radius)
        g_prime = denoise_gradients(cls, grad)
        w = edge_weight(g_prime, p)
        out = guided_filter(out, out, w, p, clip=clip)
    return out
