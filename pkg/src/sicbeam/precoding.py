"""Successive per-subarray synthesis of hybrid analog/digital precoders.

A sub-connected transmitter drives ``N`` subarrays of ``M`` antennas each
from one RF chain apiece, so the precoder is block diagonal: column ``n``
holds a phase-shifter vector of constant modulus ``1/sqrt(M)`` scaled by one
real digital gain.  The designer walks the subarrays in order, and for each

1. extracts the current subarray's block of the transmit-side residual Gram
   ``H^H T^{-1} H`` (``T`` accumulates what earlier subarrays already serve),
2. estimates the block's dominant eigenpair with a short power iteration
   accelerated by Aitken extrapolation,
3. projects the eigenvector onto the feasible set in closed form (phase
   matching plus an l1 digital gain), and
4. removes the served direction from the residual Gram with a rank-one
   Sherman-Morrison downdate so later subarrays see what remains.

The downdate comes in two flavours: ``"exact"`` uses the realised block
vector and keeps the residual Gram equal to ``H^H T^{-1} H`` exactly, while
``"eigen"`` substitutes the estimated eigenpair, trading a small
approximation for a cost of one squared-block multiply per subarray.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .channel import ChannelMatrix
from .validation import (
    check_complex_matrix,
    check_constant_modulus,
    check_hermitian,
    check_power_budget,
    check_vector,
    resolve_subarrays,
)

__all__ = [
    "DominantEigenPair",
    "GramState",
    "HybridPrecoder",
    "initial_gram",
    "power_iteration",
    "closed_form_solution",
    "update_gram",
    "sic_precode",
    "save_precoder_csv",
]

# The Aitken value estimate falls back to the raw pivot when the second
# difference of the pivot sequence degenerates below this absolute threshold.
AITKEN_EPS = 1e-12

_UPDATE_MODES = ("eigen", "exact")


@dataclass(frozen=True)
class DominantEigenPair:
    """Dominant eigenvalue/eigenvector estimate of a Hermitian PSD block."""

    value: float
    vector: np.ndarray
    iterations: int

    def __post_init__(self):
        vec = np.ascontiguousarray(self.vector, dtype=np.complex128)
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class GramState:
    """One subarray's residual Gram block together with its SNR scale.

    ``scale`` is the per-stream SNR factor ``snr / n_subarrays`` that weighs
    rank-one downdates; ``subarray`` records which diagonal block this is.
    """

    matrix: np.ndarray
    scale: float
    subarray: int = 0

    def __post_init__(self):
        mat = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"Gram block must be square, got shape {mat.shape}")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)
        if not (np.isfinite(self.scale) and self.scale >= 0):
            raise ValueError(f"SNR scale must be non-negative and finite, got {self.scale}")
        if self.subarray < 0:
            raise ValueError("subarray index must be non-negative")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def validate(self) -> None:
        """Check Hermitian symmetry and positive semidefiniteness."""
        check_hermitian(self.matrix, "Gram block", rtol=1e-10)
        eigs = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))
        floor = -1e-8 * max(1.0, float(np.real(np.trace(self.matrix))))
        if eigs[0] < floor:
            raise ValueError(f"Gram block has negative eigenvalue {eigs[0]:.3g}")


@dataclass(frozen=True)
class HybridPrecoder:
    """Sub-connected precoder: per-subarray phase vectors plus real gains.

    Row ``n`` of ``analog`` is the phase-shifter vector of subarray ``n``
    (every entry of modulus ``1/sqrt(M)``); ``digital[n]`` is the real gain
    applied by RF chain ``n``.  The assembled matrix is block diagonal with
    column ``n`` equal to ``digital[n] * analog[n]``.
    """

    analog: np.ndarray
    digital: np.ndarray

    def __post_init__(self):
        analog = np.ascontiguousarray(self.analog, dtype=np.complex128)
        if analog.ndim != 2:
            raise ValueError(f"analog stage must be 2-D (subarrays x antennas), got {analog.shape}")
        digital = np.asarray(self.digital)
        if np.iscomplexobj(digital):
            if digital.size and float(np.abs(digital.imag).max()) > 0.0:
                raise ValueError("digital gains must be real")
            digital = digital.real
        digital = np.ascontiguousarray(digital, dtype=np.float64)
        if digital.shape != (analog.shape[0],):
            raise ValueError("need exactly one digital gain per subarray")
        if not np.all(np.isfinite(digital)) or not np.all(np.isfinite(analog)):
            raise ValueError("precoder stages contain non-finite entries")
        analog.flags.writeable = False
        digital.flags.writeable = False
        object.__setattr__(self, "analog", analog)
        object.__setattr__(self, "digital", digital)

    @property
    def n_subarrays(self) -> int:
        return self.analog.shape[0]

    @property
    def subarray_size(self) -> int:
        return self.analog.shape[1]

    @property
    def analog_matrix(self) -> np.ndarray:
        """Block-diagonal ``(N*M, N)`` matrix of phase-shifter vectors."""
        n, m = self.analog.shape
        a = np.zeros((n * m, n), dtype=np.complex128)
        for i in range(n):
            a[i * m : (i + 1) * m, i] = self.analog[i]
        return a

    @property
    def digital_matrix(self) -> np.ndarray:
        return np.diag(self.digital.astype(np.complex128))

    @property
    def matrix(self) -> np.ndarray:
        """Assembled block-diagonal precoding matrix of shape ``(N*M, N)``."""
        n, m = self.analog.shape
        p = np.zeros((n * m, n), dtype=np.complex128)
        for i in range(n):
            p[i * m : (i + 1) * m, i] = self.digital[i] * self.analog[i]
        return p

    def validate(self) -> None:
        """Raise ``ValueError`` on any structural violation.

        Checks the constant-modulus phase constraint and the transmit power
        budget ``||P||_F^2 <= N`` (block-diagonal support holds by
        construction).
        """
        check_constant_modulus(self.analog)
        check_power_budget(self.matrix, float(self.n_subarrays))


def _resolve_channel(channel, n_subarrays: Optional[int]):
    """Return ``(H, N, M)`` from a ChannelMatrix or a raw matrix plus split."""
    if isinstance(channel, ChannelMatrix):
        h = channel.entries
        if n_subarrays is None:
            n_subarrays = channel.n_subarrays
    else:
        h = check_complex_matrix(channel, "channel")
    if n_subarrays is None:
        raise ValueError(
            "number of subarrays is unknown; pass n_subarrays or build the "
            "channel with an RF-chain split"
        )
    m = resolve_subarrays(h.shape[1], int(n_subarrays))
    return h, int(n_subarrays), m


def initial_gram(
    channel,
    snr_factor: float,
    subarray: int = 0,
    n_subarrays: Optional[int] = None,
    counter=None,
) -> GramState:
    """Diagonal Gram block of the interference-free channel.

    Returns ``G[b, b]`` where ``G = H^H H`` and ``b`` is the index range of
    the requested subarray; this is the state the first design step sees.
    ``snr_factor`` is the per-stream SNR ``snr / n_subarrays`` carried along
    for later downdates.
    """
    h, n, m = _resolve_channel(channel, n_subarrays)
    if not 0 <= subarray < n:
        raise ValueError(f"subarray index {subarray} out of range for {n} subarrays")
    if not (np.isfinite(snr_factor) and snr_factor >= 0):
        raise ValueError(f"snr_factor must be non-negative and finite, got {snr_factor}")
    cols = h[:, subarray * m : (subarray + 1) * m]
    block = cols.conj().T @ cols
    if counter is not None:
        counter.add(mults=h.shape[0] * m * m)
    block = 0.5 * (block + block.conj().T)
    return GramState(matrix=block, scale=float(snr_factor), subarray=subarray)


def power_iteration(
    gram,
    max_iterations: int = 5,
    initial=None,
    accelerate: bool = True,
    counter=None,
) -> DominantEigenPair:
    """Dominant eigenpair of a Hermitian PSD block by accelerated power iteration.

    Each sweep multiplies the running vector by the block, reads off the
    entry of largest amplitude as the eigenvalue pivot (lowest index on
    ties), and renormalises by that pivot.  Once three pivots exist the
    value estimate is sharpened by Aitken extrapolation of the pivot
    sequence, roughly from ``r^s`` to ``r^(2s)`` accuracy, ``r`` being the
    eigenvalue ratio, at two extra multiplications per sweep; the estimate
    falls back to the raw pivot whenever the extrapolation denominator
    degenerates.  Renormalising by the extrapolated value instead of the
    pivot looks algebraically equivalent but couples the estimate back into
    the pivot sequence; one early overshoot then feeds on itself (period-four
    limit cycles with relative errors above 1e3 show up on ordinary Wishart
    blocks within a couple hundred draws), so the vector update deliberately
    uses the raw pivot, which leaves the iterate direction untouched.

    Parameters
    ----------
    gram : GramState or array_like
        Hermitian positive-semidefinite block.
    max_iterations : int
        Number of sweeps ``S`` to execute (no early exit).
    initial : array_like, optional
        Start vector; defaults to all ones.  If the start lies in the null
        space the iteration restarts once from a fixed perturbation and
        raises ``ValueError("degenerate start ...")`` if that fails too.
    accelerate : bool
        Disable to report the raw pivot instead of the extrapolated value.
    counter : OpCounter, optional
        Receives the arithmetic tally of the execution.

    Returns
    -------
    DominantEigenPair
        Eigenvalue estimate, unit-norm eigenvector estimate, and the number
        of sweeps run.
    """
    g = np.ascontiguousarray(getattr(gram, "matrix", gram), dtype=np.complex128)
    check_hermitian(g, "Gram block", rtol=1e-10)
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be at least 1, got {max_iterations}")
    m = g.shape[0]
    if initial is None:
        u0 = np.ones(m, dtype=np.complex128)
    else:
        u0 = check_vector(initial, "initial vector")
        if u0.size != m:
            raise ValueError(f"initial vector length {u0.size} does not match block size {m}")
    if not u0.any():
        raise ValueError("initial vector must be non-zero")
    if not g.any():
        # The zero operator maps every direction to eigenvalue zero; report
        # the start direction rather than failing.
        return DominantEigenPair(0.0, u0 / np.linalg.norm(u0), 0)

    def _run(u):
        pivots = []
        estimate = 0j
        for _ in range(max_iterations):
            z = g @ u
            if counter is not None:
                counter.add(mults=m * m)
            if not z.any():
                return None
            pivot = z[int(np.argmax(np.abs(z)))]
            estimate = pivot
            if accelerate and len(pivots) >= 2:
                m1, m2 = pivots[-1], pivots[-2]
                delta = pivot - m1
                denom = delta - (m1 - m2)
                if counter is not None:
                    counter.add(mults=2, divs=1)
                if abs(denom) >= AITKEN_EPS:
                    # Stable rearrangement of (pivot*m2 - m1^2)/denom: the
                    # product form cancels catastrophically once the pivots
                    # agree to several digits.
                    estimate = pivot - delta * delta / denom
            u = z / pivot
            if counter is not None:
                counter.add(divs=1)
            pivots.append(pivot)
        return estimate, u

    result = _run(u0)
    if result is None:
        bump = 1e-3 * max(1.0, float(np.abs(u0).max()))
        result = _run(u0 + bump * np.arange(1, m + 1))
        if result is None:
            raise ValueError(
                "degenerate start: the initial vector and its perturbation lie "
                "in the null space of the block"
            )
    estimate, u = result
    scale = float(np.linalg.norm(u))
    if counter is not None:
        counter.add(mults=m, divs=1)
    return DominantEigenPair(float(np.real(estimate)), u / scale, max_iterations)


def closed_form_solution(vector, counter=None):
    """Feasible subarray vector closest to a unit target direction.

    Given a unit-norm target ``v`` the nearest constant-modulus vector keeps
    the phases of ``v`` with every amplitude pinned to ``1/sqrt(M)``, and the
    best real gain is ``||v||_1 / sqrt(M)``.  Entries of ``v`` that are
    exactly zero contribute phase zero.

    Returns
    -------
    tuple
        ``(analog, gain, block)`` where ``analog`` is the phase-shifter
        vector, ``gain`` the real digital gain, and ``block = gain * analog``
        the realised subarray column (always of 2-norm at most 1).
    """
    v = check_vector(vector, "target direction")
    if v.size == 0:
        raise ValueError("target direction must be non-empty")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"target direction must have unit 2-norm, got {norm:.12g}")
    m = v.size
    root_m = np.sqrt(m)
    analog = np.exp(1j * np.angle(v)) / root_m
    gain = float(np.abs(v).sum() / root_m)
    block = gain * analog
    if counter is not None:
        counter.add(mults=2)
    return analog, gain, block


def update_gram(
    gram: GramState,
    pair: Optional[DominantEigenPair] = None,
    mode: str = "eigen",
    p_bar=None,
    counter=None,
) -> GramState:
    """Rank-one downdate of a residual Gram block after serving one subarray.

    With per-stream SNR ``c`` and served block vector ``p`` the residual Gram
    becomes ``G - c * (G p)(G p)^H / (1 + c * p^H G p)`` (Sherman-Morrison on
    the accumulated receive covariance).  Mode ``"exact"`` applies exactly
    that with ``p = p_bar``.  Mode ``"eigen"`` substitutes the dominant
    eigenpair ``(sigma, v)`` for the realised vector, collapsing the update
    to ``G - c * sigma^2 * v v^H / (1 + c * sigma)``, which costs one outer
    product and a single division.  The result is re-symmetrised by
    averaging with its conjugate transpose.

    Denominators are at least 1 for PSD inputs, so no guards are needed.
    """
    if not isinstance(gram, GramState):
        raise TypeError("update_gram expects a GramState")
    g = gram.matrix
    c = gram.scale
    m = g.shape[0]
    if mode == "eigen":
        if pair is None:
            raise ValueError("mode='eigen' requires the dominant eigenpair")
        v = check_vector(pair.vector, "eigenvector")
        if v.size != m:
            raise ValueError(f"eigenvector length {v.size} does not match block size {m}")
        sigma = float(pair.value)
        scale = (c * sigma * sigma) / (1.0 + c * sigma)
        updated = g - scale * np.outer(v, v.conj())
    elif mode == "exact":
        if p_bar is None:
            raise ValueError("mode='exact' requires the realised block vector p_bar")
        p = check_vector(p_bar, "block vector")
        if p.size != m:
            raise ValueError(f"block vector length {p.size} does not match block size {m}")
        gp = g @ p
        denom = 1.0 + c * float(np.real(p.conj() @ gp))
        updated = g - (c / denom) * np.outer(gp, gp.conj())
    else:
        raise ValueError(f"unknown update mode {mode!r}; expected one of {_UPDATE_MODES}")
    if counter is not None:
        counter.add(mults=m * m, divs=1)
    updated = 0.5 * (updated + updated.conj().T)
    return GramState(matrix=updated, scale=c, subarray=gram.subarray)


def sic_precode(
    channel,
    snr: float,
    max_iterations: int = 5,
    update_mode: str = "eigen",
    n_subarrays: Optional[int] = None,
    counter=None,
) -> HybridPrecoder:
    """Design a sub-connected hybrid precoder by successive subarray synthesis.

    Parameters
    ----------
    channel : ChannelMatrix or array_like
        Receive-by-transmit channel.
    snr : float
        Linear transmit SNR; the per-stream factor is ``snr / n_subarrays``.
    max_iterations : int
        Power-iteration sweeps per subarray.
    update_mode : str
        ``"eigen"`` (fast rank-one downdate through the estimated eigenpair)
        or ``"exact"`` (downdate with the realised block vector).
    n_subarrays : int, optional
        RF-chain count; defaults to the channel's recorded split.
    counter : OpCounter, optional
        Tallies the arithmetic of the four design stages (first Gram block,
        power iteration, closed form, downdate) at the accounting granularity
        documented in :mod:`sicbeam.opcount`; cross-block bookkeeping is not
        charged.

    Returns
    -------
    HybridPrecoder
        Feasible precoder: constant-modulus phases, real gains, and
        ``||P||_F^2 <= n_subarrays``.
    """
    h, n, m = _resolve_channel(channel, n_subarrays)
    if not (np.isfinite(snr) and snr >= 0):
        raise ValueError(f"snr must be non-negative and finite, got {snr}")
    if update_mode not in _UPDATE_MODES:
        raise ValueError(f"unknown update mode {update_mode!r}; expected one of {_UPDATE_MODES}")
    c = snr / n
    # Residual transmit-side Gram, downdated in place as subarrays are
    # served; slicing its diagonal blocks avoids re-solving the accumulated
    # receive covariance at every step.
    g = h.conj().T @ h
    g = 0.5 * (g + g.conj().T)
    if counter is not None:
        counter.add(mults=h.shape[0] * m * m)
    analog = np.empty((n, m), dtype=np.complex128)
    digital = np.empty(n, dtype=np.float64)
    for idx in range(n):
        block = slice(idx * m, (idx + 1) * m)
        pair = power_iteration(g[block, block], max_iterations=max_iterations, counter=counter)
        analog[idx], digital[idx], realised = closed_form_solution(pair.vector, counter=counter)
        if update_mode == "eigen":
            w = g[:, block] @ pair.vector
            denom = 1.0 + c * pair.value
        else:
            w = g[:, block] @ realised
            denom = 1.0 + c * float(np.real(realised.conj() @ g[block, block] @ realised))
        g = g - (c / denom) * np.outer(w, w.conj())
        g = 0.5 * (g + g.conj().T)
        if counter is not None:
            counter.add(mults=m * m, divs=1)
    return HybridPrecoder(analog=analog, digital=digital)


def save_precoder_csv(precoder, path) -> None:
    """Write a precoding matrix as CSV with interleaved re/im columns.

    One row per transmit antenna; columns ``s0_re, s0_im, s1_re, ...`` hold
    the real and imaginary parts of each stream's weight.
    """
    p = getattr(precoder, "matrix", precoder)
    p = check_complex_matrix(p, "precoder")
    path = Path(path)
    header = []
    for col in range(p.shape[1]):
        header += [f"s{col}_re", f"s{col}_im"]
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in p:
            cells = []
            for value in row:
                cells += [format(value.real, ".17g"), format(value.imag, ".17g")]
            writer.writerow(cells)
