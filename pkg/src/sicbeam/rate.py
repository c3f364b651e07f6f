"""Achievable-rate evaluation for linear precoders.

The figure of merit throughout is the Gaussian-input spectral efficiency

    R = log2 det( I + (snr / n_streams) * (H P) (H P)^H )

in bits/s/Hz, with ``snr`` the linear transmit-SNR and the identity sized by
the receive dimension.  ``decomposed_rate`` evaluates the same quantity as a
telescoping sum of per-column contributions, which is the form the
successive-interference-cancellation design optimises one subarray at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_complex_matrix

__all__ = ["RateSample", "achievable_rate", "decomposed_rate", "db_to_linear"]


def db_to_linear(value_db: float) -> float:
    """Convert a decibel quantity to linear scale."""
    return float(10.0 ** (value_db / 10.0))


@dataclass(frozen=True)
class RateSample:
    """One Monte Carlo rate observation."""

    snr_db: float
    rate_bpshz: float
    method: str
    seed: int


def _as_matrices(channel, precoder):
    entries = getattr(channel, "entries", channel)
    h = check_complex_matrix(entries, "channel")
    p = getattr(precoder, "matrix", precoder)
    p = check_complex_matrix(p, "precoder")
    if p.shape[0] != h.shape[1]:
        raise ValueError(
            f"precoder rows ({p.shape[0]}) do not match transmit antennas ({h.shape[1]})"
        )
    return h, p


def achievable_rate(channel, precoder, snr: float, n_streams: int | None = None) -> float:
    """Spectral efficiency of ``precoder`` over ``channel`` at linear SNR ``snr``.

    Parameters
    ----------
    channel : ChannelMatrix or array_like
        Receive-by-transmit channel matrix.
    precoder : HybridPrecoder or array_like
        Precoding matrix (transmit antennas by streams).
    snr : float
        Linear signal-to-noise ratio; must be non-negative.
    n_streams : int, optional
        Stream count used in the per-stream power factor ``snr / n_streams``.
        Defaults to the number of precoder columns; pass the full count
        explicitly when evaluating truncated precoders.

    Returns
    -------
    float
        Rate in bits/s/Hz (non-negative).
    """
    h, p = _as_matrices(channel, precoder)
    if not (np.isfinite(snr) and snr >= 0):
        raise ValueError(f"snr must be a non-negative finite number, got {snr}")
    n = p.shape[1] if n_streams is None else int(n_streams)
    if n < 1:
        raise ValueError("n_streams must be at least 1")
    b = h @ p
    gram = np.eye(h.shape[0], dtype=np.complex128) + (snr / n) * (b @ b.conj().T)
    residual = float(np.linalg.norm(gram - gram.conj().T))
    if residual > 1e-8 * max(1.0, float(np.linalg.norm(gram))):
        raise FloatingPointError(
            f"rate matrix lost Hermitian symmetry (residual {residual:.3g}); "
            "inputs are likely corrupted"
        )
    gram = 0.5 * (gram + gram.conj().T)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - identity + PSD is PD
        raise FloatingPointError(f"rate determinant failed: {exc}") from exc
    rate = 2.0 * float(np.sum(np.log2(np.real(np.diag(chol)))))
    if not np.isfinite(rate):
        raise FloatingPointError(
            f"non-finite rate (||H||={np.linalg.norm(h):.3g}, ||P||={np.linalg.norm(p):.3g})"
        )
    return rate


def decomposed_rate(channel, precoder, snr: float, n_streams: int | None = None):
    """Per-column rate contributions whose sum equals :func:`achievable_rate`.

    Column ``n`` contributes ``log2(1 + c * p_n^H H^H T^{-1} H p_n)`` where
    ``T`` accumulates the contributions of columns ``0 .. n-1`` and
    ``c = snr / n_streams``.  Each step inverts ``T`` afresh via a dense
    solve, making this an independent cross-check of the log-det evaluation.

    Returns
    -------
    numpy.ndarray
        Vector of per-column rates in bits/s/Hz.
    """
    h, p = _as_matrices(channel, precoder)
    if not (np.isfinite(snr) and snr >= 0):
        raise ValueError(f"snr must be a non-negative finite number, got {snr}")
    n = p.shape[1] if n_streams is None else int(n_streams)
    if n < 1:
        raise ValueError("n_streams must be at least 1")
    c = snr / n
    k = h.shape[0]
    t = np.eye(k, dtype=np.complex128)
    parts = np.empty(p.shape[1])
    for col in range(p.shape[1]):
        hp = h @ p[:, col]
        gain = float(np.real(hp.conj() @ np.linalg.solve(t, hp)))
        parts[col] = np.log2(1.0 + c * gain)
        t = t + c * np.outer(hp, hp.conj())
    return parts
