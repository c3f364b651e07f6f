"""Tests for the spectral-efficiency evaluators."""

import numpy as np
import pytest

from sicbeam.channel import ChannelMatrix
from sicbeam.rate import achievable_rate, db_to_linear, decomposed_rate


def _complex(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def test_db_to_linear():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(-10.0) == pytest.approx(0.1)


def test_zero_precoder_gives_zero_rate():
    rng = np.random.default_rng(1)
    h = _complex(rng, 4, 8)
    assert achievable_rate(h, np.zeros((8, 2)), 3.0) == 0.0


def test_scalar_channel_matches_closed_form():
    """With one antenna each side the determinant is a single log."""
    rng = np.random.default_rng(2)
    h = _complex(rng, 1, 1)
    p = _complex(rng, 1, 1)
    snr = 2.5
    expected = np.log2(1.0 + snr * abs(h[0, 0] * p[0, 0]) ** 2)
    assert achievable_rate(h, p, snr) == pytest.approx(expected, rel=1e-12)


def test_decomposition_sums_to_total():
    rng = np.random.default_rng(3)
    h = _complex(rng, 16, 64)
    p = _complex(rng, 64, 8)
    for snr in (0.01, 1.0, 100.0):
        parts = decomposed_rate(h, p, snr)
        total = achievable_rate(h, p, snr)
        assert parts.shape == (8,)
        assert np.sum(parts) == pytest.approx(total, rel=1e-10)


def test_decomposition_prefix_sums_match_truncated_precoders():
    """The telescoping identity holds column by column, not just in total."""
    rng = np.random.default_rng(4)
    h = _complex(rng, 6, 12)
    p = _complex(rng, 12, 4)
    snr = 1.7
    parts = decomposed_rate(h, p, snr)
    for j in range(1, 5):
        truncated = achievable_rate(h, p[:, :j], snr, n_streams=4)
        assert np.sum(parts[:j]) == pytest.approx(truncated, rel=1e-10)


def test_rate_invariant_to_column_order():
    rng = np.random.default_rng(5)
    h = _complex(rng, 8, 16)
    p = _complex(rng, 16, 4)
    base = achievable_rate(h, p, 0.8)
    shuffled = achievable_rate(h, p[:, [2, 0, 3, 1]], 0.8)
    assert shuffled == pytest.approx(base, rel=1e-12)


def test_rate_increases_with_snr():
    rng = np.random.default_rng(6)
    h = _complex(rng, 4, 8)
    p = _complex(rng, 8, 2)
    rates = [achievable_rate(h, p, snr) for snr in (0.1, 1.0, 10.0, 100.0)]
    assert all(b > a for a, b in zip(rates, rates[1:]))


def test_channel_scaling_equals_snr_scaling():
    # |c|^2 moves freely between the channel and the SNR inside H P P^H H^H.
    rng = np.random.default_rng(7)
    h = _complex(rng, 4, 8)
    p = _complex(rng, 8, 3)
    c = 0.3 - 1.1j
    left = achievable_rate(c * h, p, 2.0)
    right = achievable_rate(h, p, 2.0 * abs(c) ** 2)
    assert left == pytest.approx(right, rel=1e-12)


def test_accepts_channel_matrix_wrapper():
    rng = np.random.default_rng(8)
    raw = _complex(rng, 4, 8)
    p = _complex(rng, 8, 2)
    wrapped = ChannelMatrix(entries=raw)
    assert achievable_rate(wrapped, p, 1.0) == achievable_rate(raw, p, 1.0)


def test_single_column_decomposition_equals_total():
    rng = np.random.default_rng(9)
    h = _complex(rng, 5, 3)
    p = _complex(rng, 3, 1)
    parts = decomposed_rate(h, p, 4.0)
    assert parts.shape == (1,)
    assert parts[0] == pytest.approx(achievable_rate(h, p, 4.0), rel=1e-12)


def test_rate_input_validation():
    rng = np.random.default_rng(10)
    h = _complex(rng, 4, 8)
    p = _complex(rng, 8, 2)
    with pytest.raises(ValueError, match="non-negative"):
        achievable_rate(h, p, -1.0)
    with pytest.raises(ValueError, match="non-negative"):
        achievable_rate(h, p, np.inf)
    with pytest.raises(ValueError, match="n_streams"):
        achievable_rate(h, p, 1.0, n_streams=0)
    with pytest.raises(ValueError, match="do not match"):
        achievable_rate(h, _complex(rng, 7, 2), 1.0)
    with pytest.raises(ValueError, match="non-negative"):
        decomposed_rate(h, p, -0.5)
    with pytest.raises(ValueError, match="channel"):
        achievable_rate(np.array([np.nan + 0j]).reshape(1, 1), np.ones((1, 1)), 1.0)
