"""Heat-haze suppression: turbulence-model Wiener restoration and frame averaging.

The degradation transfer function H(u, v) = exp(-beta (u^2 + v^2)^omega)
models turbulence-like blur; its two parameters are recovered by
maximizing the feature-similarity score against a clean reference with a
bounded derivative-free simplex search. Residual random grayscale errors
are attenuated by arithmetic frame averaging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .fsim import FsimConstants, LogGaborConfig, fsim
from .image import Array, fft2, ifft2

BETA_BOUNDS = (1e-12, 1e-3)
OMEGA_BOUNDS = (0.5, 1.5)
DEFAULT_NSR = 0.01
DEFAULT_FRAME_COUNT = 15
MAX_SEARCH_ITERATIONS = 100
FSIM_TOL = 1e-6


@dataclass(frozen=True)
class TurbulenceParams:
    """Blur intensity beta and radial exponent omega of the transfer map."""

    beta: float = 2.5e-5
    omega: float = 5.0 / 6.0

    def __post_init__(self):
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")


@dataclass
class RestorationReport:
    """Search trace of the parameter optimization.

    fsim_trace holds the best accepted score after each iteration, hence
    is non-decreasing. improved is False when no candidate beat the
    unrestored target and the identity fallback was returned.
    """

    params: TurbulenceParams
    fsim_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    initial_fsim: float = 0.0
    final_fsim: float = 0.0
    improved: bool = True

    def to_dict(self) -> dict:
        return {
            "beta": self.params.beta,
            "omega": self.params.omega,
            "fsim_trace": list(self.fsim_trace),
            "iterations": self.iterations,
            "converged": self.converged,
            "initial_fsim": self.initial_fsim,
            "final_fsim": self.final_fsim,
            "improved": self.improved,
        }


def turbulence_otf(width: int, height: int, params: TurbulenceParams) -> Array:
    """Transfer map H(u, v) = exp(-beta (u^2 + v^2)^omega).

    Frequencies are in cycles per image with the DC term at index (0, 0);
    the map is real, positive, equals 1 at DC and decreases radially.
    """
    u = np.fft.fftfreq(width) * width
    v = np.fft.fftfreq(height) * height
    r2 = v[:, np.newaxis] ** 2 + u[np.newaxis, :] ** 2
    return np.exp(-params.beta * np.power(r2, params.omega))


def apply_otf(img: Array, params: TurbulenceParams) -> Array:
    """Degrade an image by the turbulence transfer map (clamped to [0, 1])."""
    h_map = turbulence_otf(img.shape[1], img.shape[0], params)
    return np.clip(ifft2(fft2(img) * h_map), 0.0, 1.0)


def wiener_restore(img: Array, params: TurbulenceParams, nsr: float = DEFAULT_NSR) -> Array:
    """Wiener deconvolution against the turbulence transfer map.

    Frequency gain is H / (H^2 + nsr) (H is real); nsr = 0 degenerates to
    the inverse filter. Output is clamped to [0, 1].
    """
    if nsr < 0.0:
        raise ValueError("nsr must be >= 0")
    h_map = turbulence_otf(img.shape[1], img.shape[0], params)
    denom = h_map * h_map + nsr
    gain = np.where(denom > 0.0, h_map / np.where(denom > 0.0, denom, 1.0), 0.0)
    return np.clip(ifft2(fft2(img) * gain), 0.0, 1.0)


def _clip_vertex(z: Array) -> Array:
    lo = np.array([math.log10(BETA_BOUNDS[0]), OMEGA_BOUNDS[0]])
    hi = np.array([math.log10(BETA_BOUNDS[1]), OMEGA_BOUNDS[1]])
    return np.clip(z, lo, hi)


def _params_of(z: Array) -> TurbulenceParams:
    return TurbulenceParams(beta=10.0 ** z[0], omega=float(z[1]))


def optimize_params(
    ref: Array,
    target: Array,
    init: TurbulenceParams = TurbulenceParams(),
    nsr: float = DEFAULT_NSR,
    constants: FsimConstants = FsimConstants(),
    bank_cfg: LogGaborConfig = LogGaborConfig(),
    max_iterations: int = MAX_SEARCH_ITERATIONS,
    tol: float = FSIM_TOL,
) -> tuple[Array, RestorationReport]:
    """Search (beta, omega) maximizing fsim(ref, wiener(target)).

    A bounded Nelder-Mead simplex runs in (log10 beta, omega) space with a
    fixed, deterministic update rule. The search stops when an accepted
    improvement of the best score is <= tol, when the simplex collapses,
    or after max_iterations. If no candidate beats the unrestored target
    score the target itself is returned (identity fallback), so the
    result never scores below the input.
    """
    if ref.shape != target.shape:
        raise ValueError("reference and target must share dimensions")
    baseline = fsim(ref, target, constants, bank_cfg)

    cache: dict[tuple[float, float], float] = {}

    def score(z: Array) -> float:
        p = _params_of(z)
        key = (p.beta, p.omega)
        if key not in cache:
            restored = wiener_restore(target, p, nsr)
            cache[key] = fsim(ref, restored, constants, bank_cfg)
        return cache[key]

    z0 = _clip_vertex(np.array([math.log10(max(init.beta, BETA_BOUNDS[0])), init.omega]))
    simplex = [z0, _clip_vertex(z0 + [0.5, 0.0]), _clip_vertex(z0 + [0.0, 0.1])]
    values = [score(z) for z in simplex]

    best = max(values)
    trace = [best]
    iterations = 0
    converged = False
    # Standard reflection/expansion/contraction/shrink coefficients.
    alpha, gamma_e, rho_c, sigma_s = 1.0, 2.0, 0.5, 0.5
    while iterations < max_iterations:
        iterations += 1
        order = sorted(range(3), key=lambda i: -values[i])
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        centroid = (simplex[0] + simplex[1]) / 2.0

        reflected = _clip_vertex(centroid + alpha * (centroid - simplex[2]))
        f_r = score(reflected)
        if f_r > values[0]:
            expanded = _clip_vertex(centroid + gamma_e * (centroid - simplex[2]))
            f_e = score(expanded)
            if f_e > f_r:
                simplex[2], values[2] = expanded, f_e
            else:
                simplex[2], values[2] = reflected, f_r
        elif f_r > values[1]:
            simplex[2], values[2] = reflected, f_r
        else:
            contracted = _clip_vertex(centroid + rho_c * (simplex[2] - centroid))
            f_c = score(contracted)
            if f_c > values[2]:
                simplex[2], values[2] = contracted, f_c
            else:
                for i in (1, 2):
                    simplex[i] = _clip_vertex(
                        simplex[0] + sigma_s * (simplex[i] - simplex[0])
                    )
                    values[i] = score(simplex[i])

        new_best = max(values)
        if new_best > best:
            delta = new_best - best
            best = new_best
            trace.append(best)
            if delta <= tol:
                converged = True
                break
        else:
            trace.append(best)
        diameter = max(float(np.abs(s - simplex[0]).max()) for s in simplex[1:])
        if diameter < 1e-10:
            converged = True
            break

    best_idx = int(np.argmax(values))
    best_params = _params_of(simplex[best_idx])
    final = score(simplex[best_idx])
    if final >= baseline:
        restored = wiener_restore(target, best_params, nsr)
        report = RestorationReport(
            params=best_params,
            fsim_trace=trace,
            iterations=iterations,
            converged=converged,
            initial_fsim=baseline,
            final_fsim=final,
            improved=True,
        )
        return restored, report
    report = RestorationReport(
        params=replace(init),
        fsim_trace=trace,
        iterations=iterations,
        converged=converged,
        initial_fsim=baseline,
        final_fsim=baseline,
        improved=False,
    )
    return target.copy(), report


class AverageStack:
    """Running per-pixel sum with the mean available on demand."""

    def __init__(self):
        self._sum: Array | None = None
        self.count = 0

    def add(self, img: Array) -> None:
        if self._sum is None:
            self._sum = np.array(img, dtype=np.float64, copy=True)
        else:
            if img.shape != self._sum.shape:
                raise ValueError("frame dimensions do not match the stack")
            self._sum += img
        self.count += 1

    def mean(self) -> Array:
        if self._sum is None or self.count < 1:
            raise ValueError("cannot average an empty stack")
        return self._sum / self.count


def grayscale_average(frames: Sequence[Array]) -> Array:
    """Arithmetic per-pixel mean of a frame sequence (N = 15 is customary)."""
    stack = AverageStack()
    for frame in frames:
        stack.add(frame)
    return stack.mean()


def snr(clean: Array, noisy: Array) -> float:
    """Energy ratio sum(clean^2) / sum((noisy - clean)^2).

    Identical inputs have zero error energy and report infinite SNR.
    """
    if clean.shape != noisy.shape:
        raise ValueError("images must share dimensions")
    err = noisy - clean
    err_energy = float(np.sum(err * err))
    if err_energy == 0.0:
        return math.inf
    return float(np.sum(clean * clean)) / err_energy
