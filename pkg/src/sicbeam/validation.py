"""Input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

# Upper bound on antenna counts accepted anywhere; keeps accidental huge
# allocations from taking the process down.
MAX_ARRAY_ELEMENTS = 4096


def check_complex_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a finite 2-D complex128 array or raise ``ValueError``."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_vector(x, name: str = "vector") -> np.ndarray:
    """Coerce ``x`` to a finite 1-D complex128 array or raise ``ValueError``."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_hermitian(g: np.ndarray, name: str = "matrix", rtol: float = 1e-10) -> None:
    """Raise ``ValueError`` when ``g`` deviates from its conjugate transpose."""
    if g.shape[0] != g.shape[1]:
        raise ValueError(f"{name} must be square, got shape {g.shape}")
    scale = max(1.0, float(np.linalg.norm(g)))
    if float(np.linalg.norm(g - g.conj().T)) > rtol * scale:
        raise ValueError(f"{name} is not Hermitian within tolerance {rtol}")


def resolve_subarrays(n_tx: int, n_subarrays: int) -> int:
    """Validate the RF-chain count against the transmit array and return the subarray size."""
    if n_subarrays < 1:
        raise ValueError(f"number of subarrays must be positive, got {n_subarrays}")
    if n_tx % n_subarrays != 0:
        raise ValueError(
            f"transmit array of {n_tx} elements does not split into {n_subarrays} equal subarrays"
        )
    return n_tx // n_subarrays


def check_size_limit(n_elements: int, name: str = "array") -> None:
    if n_elements > MAX_ARRAY_ELEMENTS:
        raise ValueError(
            f"{name} with {n_elements} elements exceeds the supported maximum "
            f"of {MAX_ARRAY_ELEMENTS}"
        )


def check_block_diagonal(
    p: np.ndarray, n_subarrays: int, subarray_size: int, atol: float = 1e-12
) -> None:
    """Raise ``ValueError`` unless column ``n`` of ``p`` is supported on subarray ``n`` only."""
    n_tx = n_subarrays * subarray_size
    if p.shape != (n_tx, n_subarrays):
        raise ValueError(f"precoder shape {p.shape} does not match ({n_tx}, {n_subarrays})")
    scale = max(1.0, float(np.abs(p).max()))
    for n in range(n_subarrays):
        block = slice(n * subarray_size, (n + 1) * subarray_size)
        off = np.delete(p[:, n], np.r_[block])
        if off.size and float(np.abs(off).max()) > atol * scale:
            raise ValueError(f"column {n} has energy outside subarray {n}")


def check_power_budget(p: np.ndarray, budget: float, slack: float = 1e-9) -> None:
    """Raise ``ValueError`` when the squared Frobenius norm exceeds ``budget + slack``."""
    power = float(np.linalg.norm(p) ** 2)
    if power > budget + slack:
        raise ValueError(f"precoder power {power:.12g} exceeds budget {budget:.12g}")


def check_constant_modulus(rows: np.ndarray, rtol: float = 1e-12) -> None:
    """Raise ``ValueError`` unless every entry of ``rows`` has modulus 1/sqrt(len(row))."""
    rows = np.atleast_2d(rows)
    target = 1.0 / np.sqrt(rows.shape[1])
    err = float(np.abs(np.abs(rows) - target).max())
    if err > rtol * target:
        raise ValueError(
            f"phase-shifter entries deviate from constant modulus {target:.6g} by {err:.3g}"
        )
