"""Geometric multipath channel synthesis for mmWave antenna arrays.

The channel is a sum of ``L`` planar-wave paths between a transmit array and a
receive array.  Each path carries a complex gain and a pair of departure /
arrival directions; the resulting matrix is

    H = sqrt(n_tx * n_rx / L) * sum_l  gain_l * a_rx(l) @ a_tx(l)^H

with unit-norm array steering vectors on both sides, so that
``E[||H||_F^2] = n_tx * n_rx`` for unit-variance path gains.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .validation import check_size_limit

__all__ = [
    "ArrayGeometry",
    "PathSet",
    "ChannelMatrix",
    "steering_vector",
    "sample_paths",
    "build_channel",
    "save_channel_csv",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna array layout.

    Parameters
    ----------
    kind : str
        ``"ula"`` for a uniform linear array or ``"upa"`` for a uniform
        planar array.
    elements : int
        Total number of antenna elements.
    spacing : float
        Element spacing in wavelengths (default half wavelength).
    planar_shape : tuple of int, optional
        ``(width, height)`` grid of a planar array.  Required for ``"upa"``,
        must multiply out to ``elements``.
    """

    kind: str
    elements: int
    spacing: float = 0.5
    planar_shape: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("ula", "upa"):
            raise ValueError(f"unknown array kind {self.kind!r}; expected 'ula' or 'upa'")
        if int(self.elements) != self.elements or self.elements < 1:
            raise ValueError(f"element count must be a positive integer, got {self.elements}")
        check_size_limit(self.elements, "antenna array")
        if not (self.spacing > 0 and np.isfinite(self.spacing)):
            raise ValueError(f"element spacing must be positive and finite, got {self.spacing}")
        if self.kind == "upa":
            if self.planar_shape is None:
                raise ValueError("planar arrays need planar_shape=(width, height)")
            w, h = self.planar_shape
            if w < 1 or h < 1 or w * h != self.elements:
                raise ValueError(
                    f"planar_shape {self.planar_shape} inconsistent with {self.elements} elements"
                )
        elif self.planar_shape is not None:
            raise ValueError("planar_shape is only meaningful for kind='upa'")

    @classmethod
    def ula(cls, elements: int, spacing: float = 0.5) -> "ArrayGeometry":
        return cls("ula", elements, spacing)

    @classmethod
    def upa(cls, width: int, height: int, spacing: float = 0.5) -> "ArrayGeometry":
        return cls("upa", width * height, spacing, (width, height))


def steering_vector(
    geometry: ArrayGeometry, azimuth: float, elevation: float = np.pi / 2
) -> np.ndarray:
    """Unit-norm array response for a planar wave from the given direction.

    For a linear array with ``U`` elements and spacing ``d`` (in wavelengths)
    element ``u`` contributes ``exp(j*2*pi*d*u*sin(azimuth)) / sqrt(U)``;
    elevation is ignored.  For a planar array laid out x-major on a
    ``(W1, W2)`` grid, element ``(x, y)`` contributes
    ``exp(j*2*pi*d*(x*sin(az)*sin(el) + y*cos(el))) / sqrt(U)``.

    Parameters
    ----------
    geometry : ArrayGeometry
        Array layout and element spacing.
    azimuth : float
        Azimuth angle in radians.
    elevation : float
        Elevation angle in radians; defaults to broadside (pi/2), where the
        planar response reduces to the linear one.

    Returns
    -------
    numpy.ndarray
        Complex response of shape ``(geometry.elements,)`` with unit 2-norm.
    """
    if not (np.isfinite(azimuth) and np.isfinite(elevation)):
        raise ValueError("angles must be finite")
    u = geometry.elements
    if geometry.kind == "ula":
        offsets = np.arange(u) * np.sin(azimuth)
    else:
        w1, w2 = geometry.planar_shape
        x, y = np.meshgrid(np.arange(w1), np.arange(w2), indexing="ij")
        offsets = (x * np.sin(azimuth) * np.sin(elevation) + y * np.cos(elevation)).ravel()
    phases = 2.0 * np.pi * geometry.spacing * offsets
    return np.exp(1j * phases) / np.sqrt(u)


@dataclass(frozen=True)
class PathSet:
    """Gains and angles of a set of propagation paths (one entry per path)."""

    gains: np.ndarray
    aod_az: np.ndarray
    aod_el: np.ndarray
    aoa_az: np.ndarray
    aoa_el: np.ndarray

    def __post_init__(self):
        gains = np.ascontiguousarray(self.gains, dtype=np.complex128)
        if gains.ndim != 1 or gains.size == 0:
            raise ValueError("empty path set: at least one path is required")
        object.__setattr__(self, "gains", gains)
        for name in ("aod_az", "aod_el", "aoa_az", "aoa_el"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != gains.shape:
                raise ValueError(f"{name} must have one entry per path")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite angles")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not np.all(np.isfinite(gains.real)) or not np.all(np.isfinite(gains.imag)):
            raise ValueError("gains contain non-finite entries")
        gains.flags.writeable = False

    @property
    def n_paths(self) -> int:
        return self.gains.size

    def to_records(self) -> list:
        """Per-path dictionaries, convenient for JSON serialisation."""
        return [
            {
                "gain_re": float(self.gains[l].real),
                "gain_im": float(self.gains[l].imag),
                "aod_az": float(self.aod_az[l]),
                "aod_el": float(self.aod_el[l]),
                "aoa_az": float(self.aoa_az[l]),
                "aoa_el": float(self.aoa_el[l]),
            }
            for l in range(self.n_paths)
        ]


def _uniform(rng: np.random.Generator, bounds, size: int) -> np.ndarray:
    lo, hi = float(bounds[0]), float(bounds[1])
    if hi < lo:
        raise ValueError(f"angle range ({lo}, {hi}) is reversed")
    return rng.uniform(lo, hi, size)


def sample_paths(
    rng: np.random.Generator,
    n_paths: int,
    aod_az_range=(-np.pi / 6, np.pi / 6),
    aoa_az_range=(-np.pi, np.pi),
    aod_el_range=None,
    aoa_el_range=None,
) -> PathSet:
    """Draw a random :class:`PathSet` from the given generator.

    Gains are i.i.d. circularly-symmetric complex normal with unit variance;
    azimuths are uniform over the given ranges.  Elevation ranges default to
    the fixed broadside value pi/2, which makes planar steering degenerate to
    the linear formula; pass explicit ranges for genuine planar experiments.

    The draw order is fixed (gains, departure azimuth, arrival azimuth,
    departure elevation, arrival elevation), so a given seed always produces
    the same path set.
    """
    if n_paths < 1:
        raise ValueError("empty path set: n_paths must be at least 1")
    gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2.0)
    aod_az = _uniform(rng, aod_az_range, n_paths)
    aoa_az = _uniform(rng, aoa_az_range, n_paths)
    broadside = (np.pi / 2, np.pi / 2)
    aod_el = _uniform(rng, aod_el_range if aod_el_range is not None else broadside, n_paths)
    aoa_el = _uniform(rng, aoa_el_range if aoa_el_range is not None else broadside, n_paths)
    return PathSet(gains=gains, aod_az=aod_az, aod_el=aod_el, aoa_az=aoa_az, aoa_el=aoa_el)


@dataclass(frozen=True)
class ChannelMatrix:
    """A synthesised channel together with the paths that produced it.

    ``entries`` has shape ``(n_rx, n_tx)``.  ``n_subarrays`` records how the
    transmit array splits into equal RF-chain subarrays; precoding routines
    read it when not given an explicit override.
    """

    entries: np.ndarray
    source_paths: Optional[PathSet] = None
    n_subarrays: Optional[int] = None
    tx_geometry: Optional[ArrayGeometry] = None
    rx_geometry: Optional[ArrayGeometry] = None

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if entries.ndim != 2:
            raise ValueError(f"channel entries must be 2-D, got shape {entries.shape}")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        if self.n_subarrays is not None:
            if self.n_subarrays < 1 or entries.shape[1] % self.n_subarrays != 0:
                raise ValueError(
                    f"{entries.shape[1]} transmit elements do not split into "
                    f"{self.n_subarrays} equal subarrays"
                )

    @property
    def n_rx(self) -> int:
        return self.entries.shape[0]

    @property
    def n_tx(self) -> int:
        return self.entries.shape[1]

    @property
    def subarray_size(self) -> int:
        if self.n_subarrays is None:
            raise ValueError("channel was built without an RF-chain split")
        return self.n_tx // self.n_subarrays

    @property
    def dims(self) -> dict:
        """Dimension summary ``{n_rx, n_subarrays, subarray_size}``."""
        return {
            "n_rx": self.n_rx,
            "n_subarrays": self.n_subarrays,
            "subarray_size": self.subarray_size if self.n_subarrays else None,
        }


def build_channel(
    tx_geometry: ArrayGeometry,
    rx_geometry: ArrayGeometry,
    paths: PathSet,
    n_subarrays: Optional[int] = None,
) -> ChannelMatrix:
    """Assemble the channel matrix from path gains and steering vectors.

    Parameters
    ----------
    tx_geometry, rx_geometry : ArrayGeometry
        Transmit and receive array layouts.
    paths : PathSet
        Path gains and angles; departure angles address the transmit array,
        arrival angles the receive array.
    n_subarrays : int, optional
        RF-chain count recorded on the result for downstream precoding.

    Returns
    -------
    ChannelMatrix
        ``n_rx x n_tx`` matrix normalised so that unit-variance gains give
        ``E[||H||_F^2] = n_tx * n_rx``.
    """
    check_size_limit(tx_geometry.elements, "transmit array")
    check_size_limit(rx_geometry.elements, "receive array")
    l = paths.n_paths
    f_tx = np.column_stack(
        [steering_vector(tx_geometry, paths.aod_az[i], paths.aod_el[i]) for i in range(l)]
    )
    f_rx = np.column_stack(
        [steering_vector(rx_geometry, paths.aoa_az[i], paths.aoa_el[i]) for i in range(l)]
    )
    gamma = np.sqrt(tx_geometry.elements * rx_geometry.elements / l)
    entries = gamma * ((f_rx * paths.gains) @ f_tx.conj().T)
    return ChannelMatrix(
        entries=entries,
        source_paths=paths,
        n_subarrays=n_subarrays,
        tx_geometry=tx_geometry,
        rx_geometry=rx_geometry,
    )


def save_channel_csv(channel: ChannelMatrix, path, seed=None) -> None:
    """Dump a channel to ``<path>`` as CSV plus a ``<path>.json`` sidecar.

    The CSV has header ``re,im`` and one row per matrix entry in row-major
    order.  The sidecar records the dimensions, the seed that produced the
    channel (when supplied), and the per-path gains and angles.
    """
    path = Path(path)
    flat = channel.entries.ravel(order="C")
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["re", "im"])
        for value in flat:
            writer.writerow([format(value.real, ".17g"), format(value.imag, ".17g")])
    sidecar = {
        "n_rx": channel.n_rx,
        "n_tx": channel.n_tx,
        "n_subarrays": channel.n_subarrays,
        "seed": seed,
        "paths": channel.source_paths.to_records() if channel.source_paths else None,
    }
    with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
