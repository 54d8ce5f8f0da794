import numpy as np
import pytest

from edibench.raster import (
    ImageFormatError,
    PixelRect,
    RasterImage,
    crop,
    downsample_dyadic,
    load_image,
    save_image,
    to_luminance,
)


def test_ascii_pgm(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_text("P2\n# comment\n2 2\n255\n0 10\n20 30\n")
    img = load_image(p)
    assert (img.width, img.height, img.channels) == (2, 2, 1)
    assert img.samples.tolist() == [0, 10, 20, 30]


def test_binary_ppm_keeps_interleaving(tmp_path):
    p = tmp_path / "a.ppm"
    # images must be at least 2x2, so the hand-written file is 2x2 rather than 2x1
    p.write_bytes(b"P6\n2 2\n255\n" + bytes([1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]))
    img = load_image(p)
    assert img.channels == 3
    assert img.samples.tolist() == list(range(1, 13))
    assert img.data[0, 1].tolist() == [4, 5, 6]


def test_ascii_ppm_and_16_bit_pgm(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_text("P3 2 2 255  1 2 3 4 5 6 7 8 9 10 11 12")
    assert load_image(p).data[1, 1].tolist() == [10, 11, 12]
    q = tmp_path / "b.pgm"
    q.write_bytes(b"P5\n2 2\n65535\n" + np.array([0, 65535, 257, 32768], dtype=">u2").tobytes())
    got = load_image(q).samples
    assert got[0] == 0 and got[1] == 255
    assert got[2] == pytest.approx(1.0)
    assert got[3] == pytest.approx(32768 * 255 / 65535)


def test_16_bit_gray_png(tmp_path):
    from PIL import Image

    arr = np.array([[0, 65535], [257, 1000]], dtype=np.uint16)
    Image.fromarray(arr).save(tmp_path / "g16.png")
    got = load_image(tmp_path / "g16.png").data
    assert np.allclose(got, arr * 255.0 / 65535.0)


def test_truncated_png_is_format_error(tmp_path):
    img = RasterImage(np.arange(64.0).reshape(8, 8))
    save_image(img, tmp_path / "ok.png")
    raw = (tmp_path / "ok.png").read_bytes()
    (tmp_path / "bad.png").write_bytes(raw[: len(raw) // 2])
    with pytest.raises(ImageFormatError, match="bad.png"):
        load_image(tmp_path / "bad.png")


def test_missing_and_unknown_files(tmp_path):
    with pytest.raises(ImageFormatError, match="nope.pgm"):
        load_image(tmp_path / "nope.pgm")
    (tmp_path / "x.pgm").write_bytes(b"GIF89a....")
    with pytest.raises(ImageFormatError, match="unrecognised"):
        load_image(tmp_path / "x.pgm")


@pytest.mark.parametrize("suffix", [".pgm", ".png"])
def test_round_trip_integer_gray(tmp_path, rng, suffix):
    img = RasterImage(rng.integers(0, 256, (7, 9)).astype(float))
    save_image(img, tmp_path / f"r{suffix}")
    assert load_image(tmp_path / f"r{suffix}") == img


@pytest.mark.parametrize("suffix", [".ppm", ".png"])
def test_round_trip_integer_rgb(tmp_path, rng, suffix):
    img = RasterImage(rng.integers(0, 256, (5, 6, 3)).astype(float))
    save_image(img, tmp_path / f"r{suffix}")
    back = load_image(tmp_path / f"r{suffix}")
    assert back == img
    save_image(back, tmp_path / f"s{suffix}")
    assert load_image(tmp_path / f"s{suffix}") == back


def test_encode_rounds_and_clamps_only_on_save(tmp_path):
    img = RasterImage(np.array([[254.6, -3.2], [0.5, 300.0]]))
    save_image(img, tmp_path / "c.pgm")
    assert load_image(tmp_path / "c.pgm").samples.tolist() == [255, 0, 1, 255]
    assert img.data[0, 1] == -3.2  # in-memory value untouched


def test_save_reports_path_on_io_error(tmp_path):
    img = RasterImage(np.zeros((2, 2)))
    with pytest.raises(OSError, match="missing"):
        save_image(img, tmp_path / "missing" / "x.pgm")


def test_luminance():
    gray = RasterImage(np.full((2, 2), 9.0))
    assert to_luminance(gray) == gray
    white = RasterImage(np.full((2, 2, 3), 255.0))
    assert np.allclose(to_luminance(white).data, 255.0)
    red = np.zeros((2, 2, 3))
    red[..., 0] = 255
    assert to_luminance(RasterImage(red)).data[0, 0] == pytest.approx(76.245)


def test_downsample_example():
    r, c = np.mgrid[1:5, 1:5]
    out = downsample_dyadic(RasterImage(10 * r + c))
    assert out.data.tolist() == [[11, 13], [31, 33]]


def test_downsample_sizes_and_errors():
    assert downsample_dyadic(RasterImage(np.full((5, 7), 4.0))).data.shape == (3, 4)
    assert downsample_dyadic(RasterImage(np.zeros((512, 768)))).data.shape == (256, 384)
    with pytest.raises(ValueError, match="too small"):
        downsample_dyadic(RasterImage(np.zeros((3, 8))))


def test_crop():
    ramp = RasterImage(np.arange(16.0).reshape(4, 4))
    assert crop(ramp, PixelRect(1, 1, 4, 4)) == ramp
    assert crop(ramp, PixelRect(1, 1, 1, 1)).data.tolist() == [[0.0]]
    assert crop(ramp, PixelRect(2, 3, 2, 2)).data.tolist() == [[9, 10], [13, 14]]
    with pytest.raises(ValueError, match="outside"):
        crop(ramp, PixelRect(4, 4, 2, 1))


def test_invariants_enforced():
    with pytest.raises(ValueError):
        RasterImage(np.zeros((1, 5)))
    with pytest.raises(ValueError):
        RasterImage(np.array([[0, np.nan], [0, 0]]))
    img = RasterImage.from_samples(3, 2, 1, [1, 2, 3, 4, 5, 6])
    assert img.data.tolist() == [[1, 2, 3], [4, 5, 6]]
    with pytest.raises(ValueError):
        img.data[0, 0] = 5
