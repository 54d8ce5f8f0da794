import numpy as np
import pytest

from edibench.edges import canny
from edibench.interp import (
    ALL_METHODS,
    InterpConfig,
    MethodId,
    _grid,
    _pykernels,
    available_backends,
    bicubic_pass,
    bilinear_pass,
    dcci_pass,
    egii_pass,
    icbi_pass,
    nedi_pass,
    time_upscale,
    upscale,
)
from edibench.raster import RasterImage, downsample_dyadic, load_image, to_luminance

from oracles import bicubic_oracle, bilinear_oracle, keys  # noqa: E402

COMPILED = "compiled" in available_backends()


# ---------------------------------------------------------------- baselines

def test_bilinear_examples():
    lr = np.zeros((4, 4))
    lr[:2, :2] = [[0, 2], [4, 6]]
    out = bilinear_pass(RasterImage(lr)).data
    assert out[1, 1] == 3.0  # 1-indexed site (2, 2)
    assert out[0, 1] == 1.0  # 1-indexed site (1, 2)


def test_bilinear_matches_oracle(rng):
    lr = rng.uniform(0, 255, (5, 5))
    assert np.max(np.abs(bilinear_pass(RasterImage(lr)).data - bilinear_oracle(lr))) <= 1e-9


def test_bicubic_matches_separable_oracle(rng):
    lr = rng.uniform(0, 255, (6, 6))
    out = bicubic_pass(RasterImage(lr)).data
    assert np.max(np.abs(out[:-1, :-1] - bicubic_oracle(lr))) <= 1e-9
    # the appended row/column replicate their neighbours
    assert np.array_equal(out[-1], out[-2]) and np.array_equal(out[:, -1], out[:, -2])


def test_bicubic_hand_example():
    lr = np.tile([0.0, 0.0, 16.0, 0.0, 0.0], (5, 1))
    out = bicubic_pass(RasterImage(lr)).data
    # midpoint between 1-indexed entries 2 and 3 of each row
    assert np.allclose(out[::2, 3], 9.0)


def test_bicubic_reproduces_ramp_away_from_border():
    i = np.arange(10.0)[:, None] * np.ones((1, 10))
    out = bicubic_pass(RasterImage(i * 7)).data
    exact = np.arange(19.0)[:, None] / 2 * 7 * np.ones((1, 19))
    # replicate padding breaks linear precision only in the outermost interval
    assert np.max(np.abs(out[2:-3, 2:-3] - exact[2:-2, 2:-2])) <= 1e-9


# ---------------------------------------------------------------- shared contracts

@pytest.mark.parametrize("method", ALL_METHODS)
def test_constant_image_stays_constant(method):
    out = upscale(RasterImage(np.full((6, 7), 42.0)), method, 1).image
    assert out.data.shape == (12, 14)
    assert np.allclose(out.data, 42.0, atol=1e-9, rtol=0)


@pytest.mark.parametrize("method", ALL_METHODS)
def test_lattice_preserved_and_iteration(method, rng):
    lr = rng.uniform(0, 255, (9, 8))
    one = upscale(RasterImage(lr), method, 1).image
    assert np.array_equal(one.data[::2, ::2], lr)
    two = upscale(RasterImage(lr), method, 2).image
    assert two == upscale(one, method, 1).image
    assert two.data.shape == (36, 32)
    assert np.array_equal(downsample_dyadic(downsample_dyadic(two)).data, lr)


def test_errors():
    rgb = RasterImage(np.zeros((8, 8, 3)))
    with pytest.raises(ValueError, match="single-channel"):
        upscale(rgb, "nedi", 1)
    with pytest.raises(ValueError, match="unknown method"):
        upscale(RasterImage(np.zeros((8, 8))), "lanczos", 1)
    with pytest.raises(ValueError, match="at least 4x4"):
        upscale(RasterImage(np.zeros((3, 8))), "bilinear", 1)
    with pytest.raises(ValueError):
        upscale(RasterImage(np.zeros((8, 8))), "bilinear", 0)
    with pytest.raises(ValueError):
        InterpConfig(dcci_threshold=0)


def test_method_names():
    assert [m.value for m in MethodId] == ["bilinear", "bicubic", "nedi", "egii", "icbi", "dcci"]
    assert MethodId.parse("DCCI") is MethodId.DCCI


def test_range_safety(rng):
    lr = rng.uniform(0, 255, (12, 12))
    lo, hi = lr.min(), lr.max()
    span = hi - lo
    out = bilinear_pass(RasterImage(lr)).data
    assert lo <= out.min() and out.max() <= hi
    # tensor-product cubic: negative lobes sum to 72/256 of the taps
    out = bicubic_pass(RasterImage(lr)).data
    assert out.min() >= lo - 72 / 256 * span and out.max() <= hi + 72 / 256 * span
    # two chained 1-D cubic steps: 1/8 + 1/8 * (1 + 2/8)
    bound = 0.125 + 0.125 * 1.25
    for fn in (dcci_pass, egii_pass):
        out = fn(RasterImage(lr)).data
        assert out.min() >= lo - bound * span and out.max() <= hi + bound * span
    out = icbi_pass(RasterImage(lr), InterpConfig(icbi_max_iters=0)).data
    assert lo <= out.min() and out.max() <= hi


# ---------------------------------------------------------------- NEDI

def test_nedi_constant_region_uses_fallback():
    lr = np.full((12, 12), 80.0)
    lr[:, 8:] = 200.0
    out = nedi_pass(RasterImage(lr)).data
    ref = bilinear_pass(RasterImage(lr)).data
    # far from the step the window is flat: bilinear value exactly
    assert np.array_equal(out[:6, :6], ref[:6, :6])


def test_nedi_weights_solve_normal_equations(rng):
    lr = rng.uniform(0, 255, (16, 16))
    pad = 5
    g = _grid.new_grid(_grid.pad_lr(lr, pad))
    cfg = InterpConfig()
    _pykernels.nedi_step(g, _grid.DIAG, cfg.nedi_window, cfg.nedi_variance_threshold, cfg.nedi_condition_limit)
    train = _grid.offsets_for(_grid.DIAG, _grid.training_offsets(cfg.nedi_window))
    nb = _grid.offsets_for(_grid.DIAG, _grid.NEIGHBOURS)
    padded = np.pad(g, 20, mode="reflect")

    def at(r, c):
        return padded[r + 20, c + 20]

    checked = 0
    for r, c in [(2 * pad + 7, 2 * pad + 9), (2 * pad + 15, 2 * pad + 15), (2 * pad + 21, 2 * pad + 3)]:
        y = np.array([at(r + t[0], c + t[1]) for t in train]) / 255.0
        C = np.array([[at(r + t[0] + 2 * d[0], c + t[1] + 2 * d[1]) for d in nb] for t in train]) / 255.0
        R, b = C.T @ C, C.T @ y
        iu = np.triu_indices(4)
        x0, x1, x2, x3, ok, cond = _pykernels.chol_solve4(*R[iu], *b)
        a = np.array([x0, x1, x2, x3])
        assert ok and cond < cfg.nedi_condition_limit
        assert np.max(np.abs(R @ a - b)) <= 1e-8
        n = np.array([at(r + d[0], c + d[1]) for d in nb])
        assert g[r, c] == pytest.approx(float(a @ n), abs=1e-9)
        checked += 1
    assert checked == 3


def test_nedi_45_degree_step_has_no_staircase():
    i, j = np.mgrid[0:24, 0:24]
    lr = np.where(i + j > 23, 220.0, 30.0)
    out = nedi_pass(RasterImage(lr)).data
    r, c = np.nonzero(canny(out).mask)
    assert r.size >= 40
    # every edge pixel sits within one pixel of the HR diagonal r + c = 47
    assert np.all(np.abs(r + c - 47) <= 1)


# ---------------------------------------------------------------- EGII

def test_egii_fusion_rule():
    f = _pykernels.egii_fuse
    assert float(f(7.5, 7.5, 3.0, 40.0)) == 7.5
    assert float(f(10.0, 20.0, 0.0, 5.0)) == 10.0
    assert float(f(10.0, 20.0, 4.0, 4.0)) == 15.0
    assert float(f(10.0, 20.0, 0.0, 0.0)) == 15.0


def test_egii_follows_flat_direction():
    # values constant along one diagonal: that direction has zero variance and wins
    i, j = np.mgrid[0:14, 0:14]
    lr = np.where((i - j) % 4 < 2, 40.0, 200.0)
    out = egii_pass(RasterImage(lr)).data
    r, c = 13, 13  # diagonal site between lattice (6,6) and (7,7)
    assert lr[6, 6] == lr[7, 7]
    assert out[r, c] == lr[6, 6]


# ---------------------------------------------------------------- ICBI

def test_icbi_phase1_reproduces_diagonal_ramp():
    i, j = np.mgrid[0:16, 0:16]
    lr = (i - j) * 5.0 + 120
    out = icbi_pass(RasterImage(lr), InterpConfig(icbi_max_iters=0)).data
    rr, cc = np.mgrid[0:31, 0:31]
    exact = (rr - cc) / 2 * 5.0 + 120
    diag = (rr % 2 == 1) & (cc % 2 == 1)
    inner = (rr >= 4) & (rr <= 26) & (cc >= 4) & (cc <= 26)
    assert np.max(np.abs(out[:31, :31] - exact)[diag & inner]) <= 1e-12


def test_icbi_tie_gives_four_neighbour_mean():
    lr = np.zeros((8, 8))
    lr[::2, ::2] = 90.0  # a checker of period 2: equal second differences both ways
    out = icbi_pass(RasterImage(lr), InterpConfig(icbi_max_iters=0)).data
    ref = bilinear_pass(RasterImage(lr)).data
    assert np.array_equal(out[5:10:2, 5:10:2], ref[5:10:2, 5:10:2])


def test_icbi_energy_non_increasing_and_bounded_sweeps(rng):
    cfg = InterpConfig(icbi_max_iters=7)
    for _ in range(5):
        lr = rng.uniform(0, 255, tuple(rng.integers(6, 14, 2)))
        _, traces = icbi_pass(RasterImage(lr), cfg, return_trace=True)
        assert len(traces) == 2
        for t in traces:
            assert 1 <= len(t) <= cfg.icbi_max_iters + 1
            assert all(b <= a for a, b in zip(t, t[1:])), t


# ---------------------------------------------------------------- DCCI

def test_dcci_selection_rule():
    f = _pykernels.dcci_choose
    assert float(f(10.0, 30.0, 4.0, 4.0, 1.15, 5)) == 20.0
    assert float(f(10.0, 30.0, 0.0, 500.0, 1.15, 5)) == 10.0
    assert float(f(10.0, 30.0, 500.0, 0.0, 1.15, 5)) == 30.0


def test_dcci_matches_bicubic_on_quadratic():
    i, j = np.mgrid[0:24, 0:24].astype(float)
    lr = (i + j) ** 2 * 0.1
    a = dcci_pass(RasterImage(lr)).data[:47, :47]
    b = bicubic_pass(RasterImage(lr)).data[:47, :47]
    # away from the replicate-padded border both reproduce the quadratic
    assert np.max(np.abs(a - b)[6:-6, 6:-6]) <= 1e-9


# ---------------------------------------------------------------- backends and timing

@pytest.mark.skipif(not COMPILED, reason="compiled kernels not built")
@pytest.mark.parametrize("method", [MethodId.NEDI, MethodId.EGII, MethodId.ICBI, MethodId.DCCI])
def test_backends_bit_identical(method, rng):
    from edibench.interp import _upscale_array

    for shape in ((5, 5), (11, 17), (24, 9)):
        lr = rng.uniform(0, 255, shape)
        lr[:, : shape[1] // 2] = 100 + lr[:, : shape[1] // 2] * 0.01  # include near-flat areas
        a = _upscale_array(lr, method, 1, InterpConfig(), "numpy")
        b = _upscale_array(lr, method, 1, InterpConfig(), "compiled")
        assert np.array_equal(a, b)


def test_time_upscale_orders(natural_dir):
    lr = downsample_dyadic(to_luminance(load_image(natural_dir / "kodim23.png")))
    assert (lr.height, lr.width) == (256, 384)
    tc = {m: time_upscale(lr, m).elapsed_seconds for m in (MethodId.BILINEAR, MethodId.NEDI,
                                                           MethodId.ICBI, MethodId.DCCI)}
    assert all(t > 0 for t in tc.values())
    assert tc[MethodId.NEDI] > tc[MethodId.BILINEAR]
    assert tc[MethodId.ICBI] < tc[MethodId.NEDI] and tc[MethodId.DCCI] < tc[MethodId.NEDI]
