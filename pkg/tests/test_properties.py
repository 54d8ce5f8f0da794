"""Randomised invariants; the hypothesis profile in conftest runs 200 cases each."""
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from edibench.edges import EdgeMap, epr_accuracy, epr_robustness
from edibench.interp import ALL_METHODS, InterpConfig, icbi_pass, upscale
from edibench.metrics import entropy, fsim, mutual_information, psnr, ssim
from edibench.raster import RasterImage

PSNR_UNIT_ERROR = 20 * math.log10(255)  # 48.1308 at 4 decimals

pixels = st.floats(0, 255, allow_nan=False, allow_infinity=False, width=64)


def planes(min_side, max_side):
    shape = st.tuples(st.integers(min_side, max_side), st.integers(min_side, max_side))
    return shape.flatmap(lambda s: arrays(np.float64, s, elements=pixels))


def pair(min_side, max_side):
    """Two same-shaped planes: the second is a noisy copy or an unrelated draw."""
    return planes(min_side, max_side).flatmap(
        lambda a: st.tuples(st.just(a), st.one_of(
            arrays(np.float64, a.shape, elements=pixels),
            st.integers(0, 2 ** 32 - 1).map(
                lambda seed: np.clip(a + np.random.default_rng(seed).normal(0, 12, a.shape), 0, 255)))))


@given(planes(4, 12), st.sampled_from(ALL_METHODS))
def test_lattice_preserved(lr, method):
    out = upscale(RasterImage(lr), method, 1).image.data
    assert np.array_equal(out[::2, ::2], lr)


def _edge_maps(draw_shape=st.tuples(st.integers(2, 16), st.integers(2, 16))):
    return draw_shape.flatmap(lambda s: st.tuples(arrays(np.bool_, s), arrays(np.bool_, s))).filter(
        lambda ab: ab[0].any())


@given(_edge_maps())
def test_epr_bounds_and_order(maps):
    ems, emi = EdgeMap(maps[0]), EdgeMap(maps[1])
    a, r = epr_accuracy(ems, emi), epr_robustness(ems, emi)
    assert 0 <= r <= a <= 1
    assert r == epr_robustness(emi, ems)


@given(pair(11, 24))
def test_ssim_identity_and_symmetry(ab):
    a, b = ab
    assert abs(ssim(a, a) - 1) <= 1e-12
    assert abs(ssim(a, b) - ssim(b, a)) <= 1e-12
    assert ssim(a, b) <= 1 + 1e-12


@given(pair(32, 40))
def test_fsim_identity_and_symmetry(ab):
    a, b = ab
    assert abs(fsim(a, a) - 1) <= 1e-6
    assert abs(fsim(a, b) - fsim(b, a)) <= 1e-6
    assert fsim(a, b) <= 1 + 1e-6


@given(planes(1, 24))
def test_mi_self_is_entropy(a):
    assert abs(mutual_information(a, a) - entropy(a)) <= 1e-12


@given(pair(1, 24))
def test_mi_symmetric_and_non_negative(ab):
    a, b = ab
    assert abs(mutual_information(a, b) - mutual_information(b, a)) <= 1e-12
    assert mutual_information(a, b) >= 0


@given(planes(1, 24), st.sampled_from([1.0, -1.0]))
def test_psnr_unit_error(ref, sign):
    assert abs(psnr(ref, ref + sign) - PSNR_UNIT_ERROR) <= 1e-6
    assert round(psnr(ref, ref + sign), 4) == 48.1308


@settings(max_examples=20)
@given(planes(5, 14))
def test_icbi_energy_non_increasing(lr):
    _, traces = icbi_pass(RasterImage(lr), InterpConfig(), return_trace=True)
    for t in traces:
        assert all(later <= earlier for earlier, later in zip(t, t[1:]))
