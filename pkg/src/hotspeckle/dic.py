"""Minimal 2-D subset DIC: ZNCC matching, displacement and strain fields.

Integer displacements come from an exhaustive zero-normalized
cross-correlation search; the subpixel part iterates a quadratic fit to a
3x3 correlation patch with a shrinking sampling step. Only translation
shape functions are modeled, which suits the static and quasi-static
scenes this package targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import gaussian_filter

from .image import Array

MICROSTRAIN = 1e6

# Subsets whose mean-square deviation falls below this are treated as
# featureless: far below any real texture, far above rounding dust.
VARIANCE_FLOOR = 1e-18


@dataclass(frozen=True)
class DicConfig:
    """Subset matching parameters (defaults follow common practice).

    prefilter_sigma is an optional Gaussian low-pass applied to both
    images before matching; it suppresses the interpolation bias of
    subpixel refinement on coarse speckle at the cost of competing with
    any upstream denoising (0, the default, disables it). Integer-shift
    recovery is unaffected because the filter commutes with translation
    away from borders.
    """

    subset_size: int = 21
    grid_step: int = 5
    zncc_threshold: float = 0.8
    max_iterations: int = 10
    search_radius: int = 15
    strain_window: int = 2
    prefilter_sigma: float = 0.0

    def __post_init__(self):
        if self.subset_size < 5 or self.subset_size % 2 == 0:
            raise ValueError("subset_size must be odd and >= 5")
        if self.grid_step < 1:
            raise ValueError("grid_step must be >= 1")
        if not 0.0 < self.zncc_threshold <= 1.0:
            raise ValueError("zncc_threshold must lie in (0, 1]")
        if self.search_radius < 1:
            raise ValueError("search_radius must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.strain_window < 1:
            raise ValueError("strain_window must be >= 1")
        if self.prefilter_sigma < 0.0:
            raise ValueError("prefilter_sigma must be >= 0")


@dataclass
class DisplacementField:
    """Grid-node displacements with per-node correlation scores.

    xs/ys are the node coordinates (px); u, v, score are (ny, nx) arrays;
    valid marks nodes whose final score reached the ZNCC threshold.
    """

    xs: Array
    ys: Array
    u: Array
    v: Array
    score: Array
    valid: Array
    config: DicConfig


@dataclass
class StrainField:
    """Per-node in-plane strain components in microstrain."""

    xs: Array
    ys: Array
    exx: Array
    eyy: Array
    gxy: Array
    valid: Array


def zncc(subset_a: Array, subset_b: Array) -> float:
    """Zero-normalized cross-correlation in [-1, 1].

    Invariant to affine intensity changes of either subset. Returns NaN
    (the invalid-score sentinel) when a subset has zero variance.
    """
    if subset_a.shape != subset_b.shape:
        raise ValueError("subsets must share dimensions")
    a = subset_a - subset_a.mean()
    b = subset_b - subset_b.mean()
    n = subset_a.size
    ea = float(np.sum(a * a))
    eb = float(np.sum(b * b))
    if ea <= n * VARIANCE_FLOOR or eb <= n * VARIANCE_FLOOR:
        return float("nan")
    return float(np.sum(a * b) / np.sqrt(ea * eb))


def _bilinear_patch(img: Array, top: float, left: float, size: int) -> Array:
    """Sample a size x size patch whose top-left corner sits at (top, left)."""
    y0 = int(np.floor(top))
    x0 = int(np.floor(left))
    fy = top - y0
    fx = left - x0
    block = img[y0 : y0 + size + 1, x0 : x0 + size + 1]
    top_rows = block[:size, :]
    bot_rows = block[1:, :]
    interp_y = top_rows * (1.0 - fy) + bot_rows * fy
    return interp_y[:, :size] * (1.0 - fx) + interp_y[:, 1:] * fx


# Pseudo-inverse of the 9-point quadratic design [1, x, y, x^2, y^2, xy],
# rows ordered (dy, dx) in {-1, 0, 1}^2 row-major.
_QUAD_POINTS = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
_QUAD_PINV = np.linalg.pinv(
    np.array([[1.0, dx, dy, dx * dx, dy * dy, dx * dy] for dy, dx in _QUAD_POINTS])
)


def _parabolic_offset(left: float, center: float, right: float) -> float:
    """1-D three-point peak offset, clamped to half a cell.

    Uses tent (linear) interpolation, which is exact when the correlation
    surface is piecewise linear around the peak, as it is for
    bilinear-resampled imagery; a parabola systematically undershoots
    there. Missing or untextured neighbors (sentinel scores) yield no
    offset.
    """
    if left < -1.0 or right < -1.0:
        return 0.0
    if right > left and center > right:
        return float(np.clip(0.5 * (right - left) / (center - left), -0.5, 0.5))
    if left > right and center > left:
        return float(np.clip(-0.5 * (left - right) / (center - right), -0.5, 0.5))
    return 0.0


def _quadratic_peak(scores9: Array) -> tuple[float, float] | None:
    """Stationary point of the least-squares quadratic through 9 samples.

    Returns (dx, dy) in sample-step units, or None when the fit is not a
    proper maximum or the peak escapes the unit cell.
    """
    c = _QUAD_PINV @ scores9
    hxx, hyy, hxy = 2.0 * c[3], 2.0 * c[4], c[5]
    det = hxx * hyy - hxy * hxy
    if hxx >= 0.0 or det <= 0.0:
        return None
    dx = (-c[1] * hyy + c[2] * hxy) / det
    dy = (-c[2] * hxx + c[1] * hxy) / det
    if abs(dx) > 1.0 or abs(dy) > 1.0:
        return None
    return float(dx), float(dy)


def match_field(ref: Array, deformed: Array, cfg: DicConfig | None = None) -> DisplacementField:
    """Match every grid node of ref against deformed.

    Per node: exhaustive integer ZNCC search in a (2R+1)^2 neighborhood
    (ties broken by first occurrence in row-major order), then iterated
    quadratic-surface refinement with a halving step, capped at
    max_iterations. Nodes scoring below the threshold are flagged invalid
    rather than raising.
    """
    if cfg is None:
        cfg = DicConfig()
    if ref.shape != deformed.shape:
        raise ValueError("reference and deformed images must share dimensions")
    halo = 0
    if cfg.prefilter_sigma > 0.0:
        ref = gaussian_filter(ref, cfg.prefilter_sigma, mode="nearest")
        deformed = gaussian_filter(deformed, cfg.prefilter_sigma, mode="nearest")
        # Keep the border strip whose filtered values depend on the
        # replicate padding out of every subset and search window.
        halo = int(np.ceil(4.0 * cfg.prefilter_sigma))
    h_img, w_img = ref.shape
    half = cfg.subset_size // 2
    radius = cfg.search_radius
    n = cfg.subset_size
    margin = half + radius + 2 + halo  # +2: refinement slack for bilinear sampling
    if w_img - 2 * margin < 1 or h_img - 2 * margin < 1:
        raise ValueError(
            f"image {w_img}x{h_img} too small for subset {n} with search radius {radius}"
        )
    xs = np.arange(margin, w_img - margin, cfg.grid_step)
    ys = np.arange(margin, h_img - margin, cfg.grid_step)
    nx, ny = len(xs), len(ys)
    u = np.zeros((ny, nx))
    v = np.zeros((ny, nx))
    score = np.full((ny, nx), np.nan)

    limit = float(radius + 1)
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            sub = ref[y - half : y + half + 1, x - half : x + half + 1]
            s_centered = sub - sub.mean()
            s_energy = float(np.sum(s_centered * s_centered))
            if s_energy <= n * n * VARIANCE_FLOOR:
                continue  # featureless reference subset: invalid node
            region = deformed[
                y - half - radius : y + half + radius + 1,
                x - half - radius : x + half + radius + 1,
            ]
            # Centering the region keeps the windowed variance free of the
            # catastrophic cancellation that near-flat subsets would hit.
            region = region - region.mean()
            windows = sliding_window_view(region, (n, n))
            wsum = windows.sum(axis=(2, 3))
            wsq = np.einsum("ijkl,ijkl->ij", windows, windows)
            cross = np.einsum("ijkl,kl->ij", windows, s_centered)
            w_var = np.maximum(wsq - wsum * wsum / (n * n), 0.0)
            textured = w_var > n * n * VARIANCE_FLOOR
            denom = np.sqrt(w_var * s_energy)
            zmap = np.where(textured, cross / np.where(textured, denom, 1.0), -2.0)
            flat_idx = int(np.argmax(zmap))
            pv, pu = divmod(flat_idx, zmap.shape[1])
            best = float(zmap[pv, pu])
            cur_u = float(pu - radius)
            cur_v = float(pv - radius)

            def sample_score(uu: float, vv: float) -> float:
                # Symmetric sampling: both images are resampled by half the
                # candidate displacement, so the interpolation smoothing is
                # identical on both sides. One-sided resampling suppresses
                # only the deformed frame's noise and plants a spurious
                # correlation ridge at fractional offsets.
                ref_patch = _bilinear_patch(ref, y - vv / 2.0 - half, x - uu / 2.0 - half, n)
                def_patch = _bilinear_patch(deformed, y + vv / 2.0 - half, x + uu / 2.0 - half, n)
                r_centered = ref_patch - ref_patch.mean()
                d_centered = def_patch - def_patch.mean()
                r_energy = float(np.sum(r_centered * r_centered))
                d_energy = float(np.sum(d_centered * d_centered))
                if r_energy <= n * n * VARIANCE_FLOOR or d_energy <= n * n * VARIANCE_FLOOR:
                    return -2.0
                return float(np.sum(r_centered * d_centered) / np.sqrt(r_energy * d_energy))

            # Subpixel refinement; skipped when the integer peak is already
            # numerically perfect (pure integer shifts stay exact). The
            # resampled correlation surface is smooth inside each unit
            # cell but kinks at integer offsets, so a tent seed picks the
            # cell per axis and the iterated quadratic fits keep all their
            # samples inside that cell.
            if cfg.max_iterations > 0 and best < 1.0 - 1e-9:
                seed_u = _parabolic_offset(
                    zmap[pv, pu - 1] if pu > 0 else -2.0,
                    best,
                    zmap[pv, pu + 1] if pu < zmap.shape[1] - 1 else -2.0,
                )
                seed_v = _parabolic_offset(
                    zmap[pv - 1, pu] if pv > 0 else -2.0,
                    best,
                    zmap[pv + 1, pu] if pv < zmap.shape[0] - 1 else -2.0,
                )
                cur_u, cur_v = cur_u + seed_u, cur_v + seed_v

                def cell_bounds(center: float, seed: float) -> tuple[float, float]:
                    # One resampling cell around the seeded estimate; a zero
                    # seed means the peak sits at the integer, where the
                    # surface is symmetric, so allow both neighbor cells.
                    if seed == 0.0:
                        lo, hi = center - 1.0, center + 1.0
                    else:
                        lo = float(np.floor(center))
                        hi = lo + 1.0
                    return max(lo, -limit), min(hi, limit)

                lo_u, hi_u = cell_bounds(cur_u, seed_u)
                lo_v, hi_v = cell_bounds(cur_v, seed_v)
                step = 0.25
                best = sample_score(cur_u, cur_v)
                for _ in range(cfg.max_iterations):
                    gu = float(np.clip(cur_u, lo_u + step, hi_u - step))
                    gv = float(np.clip(cur_v, lo_v + step, hi_v - step))
                    samples = np.empty(9)
                    for k, (dy, dx) in enumerate(_QUAD_POINTS):
                        samples[k] = sample_score(gu + dx * step, gv + dy * step)
                    peak = _quadratic_peak(samples)
                    if peak is not None:
                        dx_opt, dy_opt = peak
                        cand_u = float(np.clip(gu + dx_opt * step, lo_u, hi_u))
                        cand_v = float(np.clip(gv + dy_opt * step, lo_v, hi_v))
                        cand_score = sample_score(cand_u, cand_v)
                        # Greedy acceptance: on low-texture (heavily
                        # blurred) subsets the fitted surface is nearly
                        # flat and an unchecked move would random-walk
                        # within the cell.
                        if cand_score > best:
                            cur_u, cur_v, best = cand_u, cand_v, cand_score
                    step *= 0.5
                    if step < 1e-3:
                        break

            u[iy, ix] = cur_u
            v[iy, ix] = cur_v
            score[iy, ix] = best

    valid = np.isfinite(score) & (score >= cfg.zncc_threshold)
    return DisplacementField(xs=xs, ys=ys, u=u, v=v, score=score, valid=valid, config=cfg)


def strain(field: DisplacementField, window: int | None = None, scale: float = MICROSTRAIN) -> StrainField:
    """Least-squares plane-fit strain over node windows, in microstrain.

    A node gets a strain value only when its full (2w+1)^2 node window
    lies inside the grid and every node in it is valid; plane fits on
    exact affine displacement fields reproduce the analytic gradients.
    """
    if window is None:
        window = field.config.strain_window
    step = field.config.grid_step
    ny, nx = field.u.shape
    exx = np.zeros((ny, nx))
    eyy = np.zeros((ny, nx))
    gxy = np.zeros((ny, nx))
    valid = np.zeros((ny, nx), dtype=bool)

    w = window
    size = 2 * w + 1
    coords = (np.arange(size) - w) * step
    xx = np.broadcast_to(coords[np.newaxis, :], (size, size))
    yy = np.broadcast_to(coords[:, np.newaxis], (size, size))
    sxx = float(np.sum(xx * xx))

    for iy in range(w, ny - w):
        for ix in range(w, nx - w):
            block_valid = field.valid[iy - w : iy + w + 1, ix - w : ix + w + 1]
            if not block_valid.all():
                continue
            bu = field.u[iy - w : iy + w + 1, ix - w : ix + w + 1]
            bv = field.v[iy - w : iy + w + 1, ix - w : ix + w + 1]
            # Centered coordinates are orthogonal over the full window, so
            # the plane-fit slopes reduce to projections.
            du_dx = float(np.sum(bu * xx)) / sxx
            du_dy = float(np.sum(bu * yy)) / sxx
            dv_dx = float(np.sum(bv * xx)) / sxx
            dv_dy = float(np.sum(bv * yy)) / sxx
            exx[iy, ix] = du_dx * scale
            eyy[iy, ix] = dv_dy * scale
            gxy[iy, ix] = (du_dy + dv_dx) * scale
            valid[iy, ix] = True

    return StrainField(xs=field.xs, ys=field.ys, exx=exx, eyy=eyy, gxy=gxy, valid=valid)


def edca(field: DisplacementField) -> float:
    """Effective deformation calculation area: percent of valid grid nodes."""
    if field.valid.size == 0:
        raise ValueError("empty displacement grid")
    return 100.0 * float(field.valid.sum()) / float(field.valid.size)
