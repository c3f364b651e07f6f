"""Reference precoders the successive design is benchmarked against.

Three schemes bracket the SIC hybrid precoder:

* :func:`svd_precoder` — the fully-connected benchmark: equal-power
  transmission on the channel's top right singular vectors, unconstrained by
  any phase-shifter structure.
* :func:`optimal_subconnected_precoder` — the same successive per-subarray
  loop as the hybrid designer, but each block keeps the exact dominant
  eigenvector of its residual Gram (no constant-modulus projection) and the
  residual is downdated exactly.  This is the performance ceiling of the
  sub-connected architecture under unit per-subarray power.
* :func:`analog_steering_precoder` — conventional analog-only operation:
  every subarray points a beam at the strongest propagation path and the
  digital stage applies no shaping (unit gains).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelMatrix, steering_vector
from .precoding import HybridPrecoder, _resolve_channel
from .validation import check_power_budget

__all__ = [
    "FullPrecoder",
    "svd_precoder",
    "optimal_subconnected_precoder",
    "analog_steering_precoder",
]


@dataclass(frozen=True)
class FullPrecoder:
    """A dense (unconstrained) precoding matrix with its method label."""

    matrix: np.ndarray
    method: str

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if mat.ndim != 2:
            raise ValueError(f"precoding matrix must be 2-D, got shape {mat.shape}")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    def validate(self, power_budget: Optional[float] = None) -> None:
        budget = float(self.matrix.shape[1]) if power_budget is None else power_budget
        check_power_budget(self.matrix, budget)


def svd_precoder(channel, n_streams: Optional[int] = None) -> FullPrecoder:
    """Equal-power precoding on the top right singular vectors of the channel.

    The columns are orthonormal, so the power budget ``||P||_F^2 = n_streams``
    is met with equality.  Raises ``ValueError`` when more streams are
    requested than ``min(n_rx, n_tx)`` supports.
    """
    if isinstance(channel, ChannelMatrix):
        h = channel.entries
        if n_streams is None:
            n_streams = channel.n_subarrays
    else:
        h = np.ascontiguousarray(channel, dtype=np.complex128)
    if n_streams is None:
        raise ValueError("number of streams is unknown; pass n_streams")
    n = int(n_streams)
    if n < 1 or n > min(h.shape):
        raise ValueError(
            f"cannot extract {n} streams from a {h.shape[0]} x {h.shape[1]} channel"
        )
    _, _, vh = np.linalg.svd(h, full_matrices=False)
    return FullPrecoder(matrix=vh[:n].conj().T, method="fully_connected_svd")


def optimal_subconnected_precoder(
    channel, snr: float, n_subarrays: Optional[int] = None
) -> FullPrecoder:
    """Successive per-subarray design with exact eigenvectors and exact downdates.

    Each block carries the dominant eigenvector of its residual Gram at unit
    norm, so the assembled matrix is block diagonal with
    ``||P||_F^2 = n_subarrays`` but respects no phase-shifter constraint.
    """
    h, n, m = _resolve_channel(channel, n_subarrays)
    if not (np.isfinite(snr) and snr >= 0):
        raise ValueError(f"snr must be non-negative and finite, got {snr}")
    c = snr / n
    g = h.conj().T @ h
    g = 0.5 * (g + g.conj().T)
    p = np.zeros((n * m, n), dtype=np.complex128)
    for idx in range(n):
        block = slice(idx * m, (idx + 1) * m)
        _, vecs = np.linalg.eigh(g[block, block])
        v = vecs[:, -1]
        p[block, idx] = v
        w = g[:, block] @ v
        denom = 1.0 + c * float(np.real(v.conj() @ w[block]))
        g = g - (c / denom) * np.outer(w, w.conj())
        g = 0.5 * (g + g.conj().T)
    return FullPrecoder(matrix=p, method="optimal_subconnected")


def analog_steering_precoder(channel: ChannelMatrix, n_subarrays: Optional[int] = None) -> HybridPrecoder:
    """Conventional analog-only precoding: beam-steer every subarray at the strongest path.

    Each subarray's phase shifters reproduce its slice of the transmit
    steering vector of the largest-gain path (lowest index on ties), which is
    feasible exactly because steering entries already share a common modulus.
    The digital stage is the identity (all gains 1), so only phases adapt;
    the assembled matrix would be rescaled by ``min(1, sqrt(N / ||P||_F^2))``
    to stay inside the power budget, but unit-gain steering blocks meet it
    with equality and the factor is 1.

    Requires a channel built by :func:`sicbeam.channel.build_channel` (the
    path list and transmit geometry must be available).
    """
    if not isinstance(channel, ChannelMatrix):
        raise TypeError("analog steering needs a ChannelMatrix with path metadata")
    if channel.source_paths is None or channel.tx_geometry is None:
        raise ValueError(
            "analog steering needs the channel's source paths and transmit geometry"
        )
    if n_subarrays is None:
        n_subarrays = channel.n_subarrays
    if n_subarrays is None:
        raise ValueError(
            "number of subarrays is unknown; pass n_subarrays or build the "
            "channel with an RF-chain split"
        )
    n = int(n_subarrays)
    m = channel.n_tx // n
    if n * m != channel.n_tx:
        raise ValueError(
            f"{channel.n_tx} transmit elements do not split into {n} equal subarrays"
        )
    paths = channel.source_paths
    strongest = int(np.argmax(np.abs(paths.gains)))
    beam = steering_vector(
        channel.tx_geometry, paths.aod_az[strongest], paths.aod_el[strongest]
    )
    analog = np.sqrt(n) * beam.reshape(n, m)
    digital = np.ones(n)
    precoder = HybridPrecoder(analog=analog, digital=digital)
    power = float(np.linalg.norm(precoder.matrix) ** 2)
    if power > n:
        precoder = HybridPrecoder(analog=analog, digital=digital * min(1.0, np.sqrt(n / power)))
    return precoder
