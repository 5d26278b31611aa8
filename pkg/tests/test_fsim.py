import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from hotspeckle.fsim import (
    FsimConstants,
    LogGaborConfig,
    UndefinedScoreError,
    build_log_gabor,
    fsim,
    phase_congruency,
)
from hotspeckle.image import gradient
from hotspeckle.synth import SpeckleSpec, gen_speckle


@pytest.fixture(scope="module")
def bank64():
    return build_log_gabor(64, 64)


class TestBank:
    def test_zero_dc_response(self, bank64):
        img = np.full((64, 64), 0.7)
        pc = phase_congruency(img, bank64)
        assert np.allclose(pc.amplitude_sum, 0.0, atol=1e-12)
        assert np.allclose(pc.energy, 0.0, atol=1e-12)

    def test_filters_have_zero_dc(self, bank64):
        assert np.all(bank64.filters[:, :, 0, 0] == 0.0)

    def test_reproducible(self):
        a = build_log_gabor(48, 48)
        b = build_log_gabor(48, 48)
        assert a is b or np.array_equal(a.filters, b.filters)

    def test_peak_frequency_halves_per_scale(self):
        bank = build_log_gabor(128, 128)
        fx = np.fft.fftfreq(128)
        peaks = []
        for s in range(bank.config.n_scales):
            # radial profile along the +u axis of the orientation-0 filter
            profile = bank.filters[s, 0][0, :]
            peaks.append(abs(fx[int(np.argmax(profile))]))
        for a, b in zip(peaks, peaks[1:]):
            assert b == pytest.approx(a / 2.0, rel=0.35)

    def test_too_small_raises(self):
        with pytest.raises(ValueError):
            build_log_gabor(16, 64)


class TestPhaseCongruency:
    def test_constant_image_zero(self, bank64):
        pc = phase_congruency(np.full((64, 64), 0.4), bank64)
        assert np.allclose(pc.pc, 0.0, atol=1e-12)

    def test_single_scale_ratio(self):
        cfg = LogGaborConfig(n_scales=1)
        bank = build_log_gabor(64, 64, cfg)
        rng = np.random.default_rng(3)
        img = rng.uniform(size=(64, 64)) * 255.0
        pc = phase_congruency(img, bank, eps=0.001)
        # with one scale E = A_1 identically, so PC = A/(eps + A)
        expected = pc.amplitude_sum / (0.001 + pc.amplitude_sum)
        assert np.allclose(pc.pc, expected, atol=1e-12)
        strong = pc.amplitude_sum > 1.0
        assert np.all(pc.pc[strong] > 0.99)

    def test_step_edge_peaks_on_edge(self):
        img = np.zeros((64, 64))
        img[:, 32:] = 255.0
        bank = build_log_gabor(64, 64)
        pc = phase_congruency(img, bank).pc
        edge_pc = pc[20:44, 31:33].mean()
        flat_pc = pc[20:44, 8:16].mean()
        assert edge_pc > flat_pc + 0.1

    def test_range_zero_one(self, bank64, rng):
        img = rng.uniform(size=(64, 64)) * 255.0
        pc = phase_congruency(img, bank64).pc
        assert pc.min() >= 0.0 and pc.max() <= 1.0

    def test_shape_mismatch(self, bank64):
        with pytest.raises(ValueError):
            phase_congruency(np.zeros((32, 64)), bank64)


class TestFsim:
    def test_identity_exact(self):
        img = gen_speckle(SpeckleSpec(width=96, height=96, seed=8))
        assert fsim(img, img) == 1.0

    def test_symmetry_bit_exact(self):
        a = gen_speckle(SpeckleSpec(width=96, height=96, seed=9))
        b = np.clip(a + np.random.default_rng(4).normal(0, 0.05, a.shape), 0, 1)
        assert fsim(a, b) == fsim(b, a)

    def test_blur_ordering(self):
        img = gen_speckle(SpeckleSpec(width=128, height=128, seed=10))
        blur1 = np.clip(gaussian_filter(img, 1.0), 0, 1)
        blur2 = np.clip(gaussian_filter(img, 2.0), 0, 1)
        assert fsim(img, blur1) > fsim(img, blur2)

    def test_monotone_blur_on_corpus(self):
        wins = 0
        for seed in range(10):
            img = gen_speckle(SpeckleSpec(width=96, height=96, seed=seed))
            scores = [fsim(img, np.clip(gaussian_filter(img, s), 0, 1)) for s in (0.5, 1.0, 2.0, 3.0)]
            if all(x > y for x, y in zip(scores, scores[1:])):
                wins += 1
        assert wins >= 9  # >= 95% of ordered pairs in practice

    def test_range(self):
        img = gen_speckle(SpeckleSpec(width=64, height=64, seed=12))
        noisy = np.clip(img + np.random.default_rng(5).normal(0, 0.2, img.shape), 0, 1)
        score = fsim(img, noisy)
        assert 0.0 < score < 1.0

    def test_both_constant_undefined(self):
        flat = np.full((64, 64), 0.5)
        with pytest.raises(UndefinedScoreError):
            fsim(flat, flat)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fsim(np.zeros((64, 64)), np.zeros((64, 32)))

    def test_similarity_maps_bounded(self):
        # S_PC and S_G are bounded ratios in (0, 1]
        c = FsimConstants()
        a = gen_speckle(SpeckleSpec(width=64, height=64, seed=13)) * 255.0
        b = np.clip(
            gen_speckle(SpeckleSpec(width=64, height=64, seed=13))
            + np.random.default_rng(6).normal(0, 0.1, (64, 64)),
            0,
            1,
        ) * 255.0
        bank = build_log_gabor(64, 64)
        pc1 = phase_congruency(a, bank, c.epsilon).pc
        pc2 = phase_congruency(b, bank, c.epsilon).pc
        g1 = gradient(a).magnitude
        g2 = gradient(b).magnitude
        s_pc = (2 * pc1 * pc2 + c.t1) / (pc1**2 + pc2**2 + c.t1)
        s_g = (2 * g1 * g2 + c.t2) / (g1**2 + g2**2 + c.t2)
        for m in (s_pc, s_g):
            assert m.min() > 0.0 and m.max() <= 1.0 + 1e-12
