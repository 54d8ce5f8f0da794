import math

import numpy as np
import pytest

from edibench.metrics import CAP, entropy, fsim, mutual_information, psnr, snr, ssim
from edibench.raster import RasterImage


def test_psnr_closed_form(rng):
    ref = rng.uniform(0, 200, (16, 16))
    assert psnr(ref, ref + 1) == pytest.approx(20 * math.log10(255), abs=1e-9)
    assert round(psnr(ref, ref + 1), 4) == 48.1308
    assert psnr(ref, ref) == CAP


def test_snr_examples():
    ref = np.full((8, 8), 255.0)
    assert snr(ref, ref - 1) == pytest.approx(48.1308, abs=1e-4)
    assert snr(ref, ref) == CAP
    a = np.linspace(10, 200, 64).reshape(8, 8)
    b = a + np.sin(a)
    assert snr(a / 2, b / 2) == pytest.approx(snr(a, b), abs=1e-12)


def test_psnr_snr_consistency(rng):
    a = rng.uniform(0, 255, (20, 30))
    b = a + rng.normal(0, 4, a.shape)
    offset = 10 * math.log10(255 ** 2 * a.size / np.sum(a * a))
    assert psnr(a, b) == pytest.approx(snr(a, b) + offset, abs=1e-9)


def test_dimension_mismatch():
    for fn in (psnr, snr, ssim, fsim, mutual_information):
        with pytest.raises(ValueError, match="mismatch"):
            fn(np.zeros((40, 40)), np.zeros((40, 41)))


def test_ssim_identity_symmetry_and_size(rng):
    a = rng.uniform(0, 255, (24, 30))
    b = np.clip(a + rng.normal(0, 10, a.shape), 0, 255)
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)
    assert ssim(a, b) < 1
    with pytest.raises(ValueError, match="11x11"):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))


def test_ssim_known_value():
    # mean shift only: structure and contrast terms are 1, luminance term is closed form
    a = np.full((11, 11), 100.0)
    b = np.full((11, 11), 120.0)
    c1 = (0.01 * 255) ** 2
    assert ssim(a, b) == pytest.approx((2 * 100 * 120 + c1) / (100 ** 2 + 120 ** 2 + c1), rel=1e-12)


def test_fsim_identity_symmetry(rng):
    a = rng.uniform(0, 255, (40, 48))
    b = np.clip(a + rng.normal(0, 20, a.shape), 0, 255)
    assert fsim(a, a) == pytest.approx(1.0, abs=1e-6)
    assert fsim(a, b) == pytest.approx(fsim(b, a), abs=1e-6)
    assert 0 < fsim(a, b) < 1
    with pytest.raises(ValueError, match="32x32"):
        fsim(np.zeros((31, 40)), np.zeros((31, 40)))


def test_fsim_flat_images():
    assert fsim(np.full((32, 32), 5.0), np.full((32, 32), 5.0)) == pytest.approx(1.0)


def test_fsim_prefers_smaller_distortion(natural_dir):
    from edibench.raster import load_image, to_luminance

    y = to_luminance(load_image(natural_dir / "monarch.png")).data  # > 256 px: prefiltered path
    rng = np.random.default_rng(3)
    light = y + rng.normal(0, 3, y.shape)
    heavy = y + rng.normal(0, 25, y.shape)
    assert 1 > fsim(y, light) > fsim(y, heavy)


def test_mutual_information_examples():
    half = np.zeros((8, 8))
    half[:, 4:] = 255
    assert mutual_information(half, half) == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(0)
    noise = rng.uniform(0, 255, (8, 8))
    assert mutual_information(np.full((8, 8), 30.0), noise) == 0.0
    assert mutual_information(half, noise) == pytest.approx(mutual_information(noise, half), abs=1e-12)


def test_mi_self_equals_entropy(rng):
    a = rng.uniform(0, 255, (30, 30))
    assert mutual_information(a, a) == pytest.approx(entropy(a), abs=1e-12)


def test_rejects_colour():
    with pytest.raises(ValueError, match="single-channel"):
        psnr(RasterImage(np.zeros((4, 4, 3))), RasterImage(np.zeros((4, 4, 3))))
