"""Tests for the benchmark precoders and their rate ordering."""

import numpy as np
import pytest

from sicbeam.channel import ArrayGeometry, ChannelMatrix, PathSet, build_channel, sample_paths
from sicbeam.baselines import (
    FullPrecoder,
    analog_steering_precoder,
    optimal_subconnected_precoder,
    svd_precoder,
)
from sicbeam.precoding import sic_precode
from sicbeam.rate import achievable_rate


def _channel(seed, n=8, m=8, k=16, paths=3):
    rng = np.random.default_rng(seed)
    return build_channel(
        ArrayGeometry.ula(n * m), ArrayGeometry.ula(k), sample_paths(rng, paths), n_subarrays=n
    )


def test_svd_precoder_structure():
    channel = _channel(1, n=4, m=4, k=8)
    precoder = svd_precoder(channel)
    p = precoder.matrix
    assert p.shape == (16, 4)
    np.testing.assert_allclose(p.conj().T @ p, np.eye(4), atol=1e-12)
    assert np.linalg.norm(p) ** 2 == pytest.approx(4.0, abs=1e-12)
    assert precoder.method == "fully_connected_svd"
    precoder.validate()


def test_svd_precoder_spans_top_singular_directions():
    channel = _channel(2, n=2, m=4, k=8)
    p = svd_precoder(channel, n_streams=2).matrix
    _, s, vh = np.linalg.svd(channel.entries)
    # same subspace: projecting onto the top right singular pair is lossless
    top = vh[:2].conj().T
    np.testing.assert_allclose(top @ (top.conj().T @ p), p, atol=1e-10)
    assert s[0] > s[1]  # the check above is only meaningful off-degeneracy


def test_svd_precoder_validation():
    channel = _channel(3, n=2, m=2, k=2)
    with pytest.raises(ValueError, match="streams"):
        svd_precoder(channel, n_streams=3)  # only min(K, NM) = 2 available
    with pytest.raises(ValueError, match="streams"):
        svd_precoder(channel, n_streams=0)
    with pytest.raises(ValueError, match="unknown"):
        svd_precoder(channel.entries)  # raw matrix, no stream count


def test_optimal_subconnected_structure():
    channel = _channel(4, n=4, m=8, k=16)
    precoder = optimal_subconnected_precoder(channel, 1.0)
    p = precoder.matrix
    assert precoder.method == "optimal_subconnected"
    assert np.linalg.norm(p) ** 2 == pytest.approx(4.0, abs=1e-9)
    for idx in range(4):
        block = p[idx * 8 : (idx + 1) * 8, idx]
        assert np.linalg.norm(block) == pytest.approx(1.0, abs=1e-12)
        off = p[:, idx].copy()
        off[idx * 8 : (idx + 1) * 8] = 0
        assert np.all(off == 0)


def test_optimal_subconnected_first_block_is_exact_eigenvector():
    channel = _channel(5, n=2, m=8, k=16)
    h = channel.entries
    g = h.conj().T @ h
    _, vecs = np.linalg.eigh(0.5 * (g[:8, :8] + g[:8, :8].conj().T))
    top = vecs[:, -1]
    block = optimal_subconnected_precoder(channel, 1.0).matrix[:8, 0]
    assert abs(np.vdot(top, block)) == pytest.approx(1.0, abs=1e-10)


def test_optimal_subconnected_rejects_bad_snr():
    channel = _channel(6, n=2, m=4, k=4)
    with pytest.raises(ValueError, match="snr"):
        optimal_subconnected_precoder(channel, -2.0)


def test_analog_steering_structure():
    channel = _channel(7)
    precoder = analog_steering_precoder(channel)
    np.testing.assert_allclose(np.abs(precoder.analog), 1 / np.sqrt(8), atol=1e-12)
    # the budget guard may shave one ulp when ||P||^2 rounds just above N
    np.testing.assert_allclose(precoder.digital, np.ones(8), rtol=1e-12)
    assert np.linalg.norm(precoder.matrix) ** 2 == pytest.approx(8.0, abs=1e-9)
    precoder.validate()


def test_analog_steering_points_at_strongest_path():
    from sicbeam.channel import steering_vector

    tx = ArrayGeometry.ula(8)
    paths = PathSet(
        gains=np.array([0.1, 2.0, 0.5], dtype=complex),
        aod_az=np.array([-0.2, 0.3, 0.1]),
        aod_el=np.full(3, np.pi / 2),
        aoa_az=np.array([0.5, -1.0, 2.0]),
        aoa_el=np.full(3, np.pi / 2),
    )
    channel = build_channel(tx, ArrayGeometry.ula(4), paths, n_subarrays=2)
    precoder = analog_steering_precoder(channel)
    beam = steering_vector(tx, 0.3)  # the gain-2.0 path
    np.testing.assert_allclose(precoder.analog, np.sqrt(2) * beam.reshape(2, 4), atol=1e-12)


def test_analog_steering_needs_path_metadata():
    channel = _channel(8, n=2, m=4, k=4)
    with pytest.raises(TypeError, match="ChannelMatrix"):
        analog_steering_precoder(channel.entries)
    bare = ChannelMatrix(entries=channel.entries, n_subarrays=2)
    with pytest.raises(ValueError, match="source paths"):
        analog_steering_precoder(bare)
    no_split = ChannelMatrix(
        entries=channel.entries,
        source_paths=channel.source_paths,
        tx_geometry=channel.tx_geometry,
    )
    with pytest.raises(ValueError, match="unknown"):
        analog_steering_precoder(no_split)


def test_full_precoder_validation():
    with pytest.raises(ValueError, match="2-D"):
        FullPrecoder(matrix=np.ones(3), method="x")
    precoder = FullPrecoder(matrix=np.ones((2, 2)), method="x")
    with pytest.raises(ValueError, match="power"):
        precoder.validate()  # ||P||^2 = 4 > 2 columns
    precoder.validate(power_budget=4.0)


def test_fully_connected_dominates_subconnected_per_seed():
    """Removing the block-diagonal constraint can only help, seed by seed."""
    for snr in (0.1, 1.0, 10.0):
        for seed in range(50):
            channel = _channel(seed)
            r_full = achievable_rate(channel, svd_precoder(channel), snr, 8)
            r_opt = achievable_rate(channel, optimal_subconnected_precoder(channel, snr), snr, 8)
            assert r_full >= r_opt - 1e-9


def test_mean_rate_ordering_across_methods():
    """full > subconnected ceiling > successive hybrid > analog-only, on average.

    Individual seeds can and do cross (different downdate trajectories), so
    the ordering is asserted on 100-seed means with generous margins.
    """
    snr = 1.0
    totals = np.zeros(4)
    for seed in range(100):
        channel = _channel(seed)
        totals += [
            achievable_rate(channel, svd_precoder(channel), snr, 8),
            achievable_rate(channel, optimal_subconnected_precoder(channel, snr), snr, 8),
            achievable_rate(channel, sic_precode(channel, snr), snr, 8),
            achievable_rate(channel, analog_steering_precoder(channel), snr, 8),
        ]
    full, opt, sic, analog = totals / 100
    assert full > opt > sic > analog
    assert sic > 0.9 * opt  # the hybrid design tracks its ceiling closely


def test_zero_channel_yields_zero_rate_for_every_method():
    paths = PathSet(
        gains=np.zeros(2, dtype=complex),
        aod_az=np.array([0.1, -0.1]),
        aod_el=np.full(2, np.pi / 2),
        aoa_az=np.array([0.5, 1.5]),
        aoa_el=np.full(2, np.pi / 2),
    )
    channel = build_channel(ArrayGeometry.ula(8), ArrayGeometry.ula(4), paths, n_subarrays=2)
    assert np.all(channel.entries == 0)
    for precoder in (
        svd_precoder(channel),
        optimal_subconnected_precoder(channel, 1.0),
        sic_precode(channel, 1.0),
        analog_steering_precoder(channel),
    ):
        assert achievable_rate(channel, precoder, 1.0, 2) == 0.0


def test_single_path_channel_closes_the_hybrid_gap():
    """With one path the residual blocks are rank one and already feasible,
    so beam steering, the hybrid design, and the subconnected ceiling agree."""
    paths = PathSet(
        gains=np.array([1.3 * np.exp(0.4j)]),
        aod_az=np.array([0.25]),
        aod_el=np.array([np.pi / 2]),
        aoa_az=np.array([-0.8]),
        aoa_el=np.array([np.pi / 2]),
    )
    channel = build_channel(ArrayGeometry.ula(32), ArrayGeometry.ula(8), paths, n_subarrays=4)
    snr = 2.0
    sic = sic_precode(channel, snr)
    np.testing.assert_allclose(sic.digital, np.ones(4), atol=1e-9)
    r_sic = achievable_rate(channel, sic, snr, 4)
    r_analog = achievable_rate(channel, analog_steering_precoder(channel), snr, 4)
    r_opt = achievable_rate(channel, optimal_subconnected_precoder(channel, snr), snr, 4)
    assert r_sic == pytest.approx(r_analog, abs=1e-9)
    assert r_sic == pytest.approx(r_opt, abs=1e-9)
