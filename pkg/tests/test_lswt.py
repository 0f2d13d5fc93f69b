import math

import numpy as np
import pytest
import pywt
from hypothesis import given, settings, strategies as st

from npmixer import tensor as T
from npmixer.errors import ConfigurationError, ContractError, ParameterError
from npmixer.lswt import (WaveletCoefficients, WaveletFilterBank, dilation, iswt_reconstruct,
                          swt_decompose)
from npmixer.tensor import Tensor
from npmixer.wavelets import SUPPORTED, reference_filters

from gradcheck import check


def test_db1_taps():
    h0, h1, g0, g1 = reference_filters("db1")
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(h0, [r, r], atol=1e-15)
    np.testing.assert_allclose(h1, [r, -r], atol=1e-15)


def test_db2_closed_form():
    s3, den = math.sqrt(3), 4 * math.sqrt(2)
    lo = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / den
    h0, h1, _, _ = reference_filters("db2")
    np.testing.assert_allclose(h0, lo, atol=1e-12)
    # quadrature mirror: h1[k] = (-1)^k h0[F-1-k]
    np.testing.assert_allclose(h1, [(-1) ** k * lo[3 - k] for k in range(4)], atol=1e-12)


@pytest.mark.parametrize("name", SUPPORTED)
def test_tables_match_pywavelets(name):
    w = pywt.Wavelet(name)
    h0, h1, g0, g1 = reference_filters(name)
    F = len(h0)

    def pad(v):
        return np.pad(np.asarray(v), (0, F - len(v)))

    np.testing.assert_allclose(h0, pad(w.rec_lo), atol=1e-14)
    np.testing.assert_allclose(h1, pad(w.rec_hi), atol=1e-14)
    np.testing.assert_allclose(g0, pad(w.dec_lo[::-1]), atol=1e-14)
    np.testing.assert_allclose(g1, pad(w.dec_hi[::-1]), atol=1e-14)


def test_unknown_wavelet_lists_supported():
    with pytest.raises(ConfigurationError, match="db2"):
        reference_filters("haar9")


@pytest.mark.parametrize("name", SUPPORTED)
def test_filter_bank_frequency_condition(name):
    # perfect reconstruction <=> 1/2 (conj(G0) H0 + conj(G1) H1) == 1 on every DFT bin
    h0, h1, g0, g1 = reference_filters(name)
    n = 64

    def spec(v):
        return np.fft.fft(v, n)

    resp = 0.5 * (np.conj(spec(g0)) * spec(h0) + np.conj(spec(g1)) * spec(h1))
    np.testing.assert_allclose(resp, 1.0, atol=1e-10)


@pytest.mark.parametrize("name", SUPPORTED)
@pytest.mark.parametrize("levels", [1, 2, 3, 4, 5])
def test_perfect_reconstruction(name, levels, rng):
    bank = WaveletFilterBank(name)
    x = rng.standard_normal((4, 7, 96))
    with T.no_grad():
        y = iswt_reconstruct(swt_decompose(Tensor(x), bank, levels), bank)
    assert np.abs(y.data - x).max() < 1e-8


def test_detail_band_matches_fft_filtering(rng):
    bank = WaveletFilterBank("db3")
    x = rng.standard_normal(48)
    coeffs = swt_decompose(Tensor(x), bank, 2)
    for m, d in ((1, 1), (2, 2)):
        kernel = np.zeros(48)
        for k, v in enumerate(bank.h1.data):
            kernel[(k * d) % 48] += v
        src = x if m == 1 else swt_decompose(Tensor(x), bank, 1).approx.data
        expect = np.fft.ifft(np.fft.fft(src) * np.fft.fft(kernel)).real
        np.testing.assert_allclose(coeffs.details[m - 1].data, expect, atol=1e-12)


def test_haar_level_one_by_hand():
    bank = WaveletFilterBank("db1")
    x = np.array([1.0, 2.0, 4.0, 8.0])
    c = swt_decompose(Tensor(x), bank, 1)
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(c.approx.data, r * (x + np.roll(x, 1)), atol=1e-15)
    np.testing.assert_allclose(c.details[0].data, r * (x - np.roll(x, 1)), atol=1e-15)


def test_dilations_double():
    assert [dilation(m) for m in range(1, 6)] == [1, 2, 4, 8, 16]


def test_bands_preserve_length(rng):
    bank = WaveletFilterBank("sym4")
    c = swt_decompose(Tensor(rng.standard_normal((3, 50))), bank, 3)
    assert c.levels == 3
    assert all(b.shape == (3, 50) for b in c.bands())


def test_translation_invariance(rng):
    bank = WaveletFilterBank("db2")
    x = rng.standard_normal(64)
    a = swt_decompose(Tensor(x), bank, 3)
    b = swt_decompose(Tensor(np.roll(x, 5)), bank, 3)
    for u, v in zip(a.bands(), b.bands()):
        np.testing.assert_allclose(np.roll(u.data, 5), v.data, atol=1e-12)


def test_constant_signal_has_zero_details():
    bank = WaveletFilterBank("coif5")
    c = swt_decompose(Tensor(np.full(40, 3.0)), bank, 2)
    for d in c.details:
        assert np.abs(d.data).max() < 1e-10


def test_perturbed_filters_no_longer_reconstruct(rng):
    bank = WaveletFilterBank("db2")
    bank.h0.data[0] += 0.05
    x = rng.standard_normal(32)
    y = iswt_reconstruct(swt_decompose(Tensor(x), bank, 1), bank)
    assert np.abs(y.data - x).max() > 1e-3
    lo, hi = bank.delta()
    assert lo[0] == pytest.approx(0.05) and np.all(hi == 0)


def test_level_mismatch_and_zero_levels(rng):
    bank = WaveletFilterBank("db1")
    c = swt_decompose(Tensor(rng.standard_normal(8)), bank, 2)
    with pytest.raises(ContractError):
        iswt_reconstruct(c, bank, levels=3)
    with pytest.raises(ParameterError):
        swt_decompose(Tensor(np.ones(8)), bank, 0)


def test_fixed_bank_filters_need_no_grad():
    bank = WaveletFilterBank("db2", learnable=False)
    assert list(bank.named_parameters()) == []
    assert len(list(bank.named_tensors())) == 6


def test_round_trip_gradient_wrt_filters_and_signal(rng):
    bank = WaveletFilterBank("db2")
    x = Tensor(rng.standard_normal((2, 16)), requires_grad=True)
    w = rng.standard_normal((2, 16))

    def loss():
        c = swt_decompose(x, bank, 2)
        c = WaveletCoefficients(T.square(c.approx), [T.gelu(d) for d in c.details])
        return T.tsum(T.mul(iswt_reconstruct(c, bank), w))

    assert check(loss, [x, bank.h0, bank.h1, bank.g0, bank.g1]) < 1e-4


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SUPPORTED), st.integers(1, 4), st.integers(8, 60), st.integers(0, 2**31 - 1))
def test_reconstruction_for_any_length(name, levels, L, seed):
    bank = WaveletFilterBank(name)
    x = np.random.default_rng(seed).standard_normal((2, L))
    with T.no_grad():
        y = iswt_reconstruct(swt_decompose(Tensor(x), bank, levels), bank)
    assert np.abs(y.data - x).max() < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31 - 1))
def test_decomposition_is_linear(levels, a, b, seed):
    r = np.random.default_rng(seed)
    bank = WaveletFilterBank("sym3")
    x1, x2 = r.standard_normal(24), r.standard_normal(24)
    with T.no_grad():
        c = swt_decompose(Tensor(a * x1 + b * x2), bank, levels).bands()
        c1 = swt_decompose(Tensor(x1), bank, levels).bands()
        c2 = swt_decompose(Tensor(x2), bank, levels).bands()
    for u, v, w in zip(c, c1, c2):
        np.testing.assert_allclose(u.data, a * v.data + b * w.data, atol=1e-9)
