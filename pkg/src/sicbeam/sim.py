"""Seeded Monte Carlo sweeps over SNR or array size, with CSV emission.

A sweep is fully determined by a :class:`SimConfig` (including its seed):
every trial draws its channel from a substream derived from the seed and the
``(grid point, trial)`` index pair, so results do not depend on execution
order and a re-run reproduces the output byte for byte.  Within a trial all
selected methods see the same channel, which pairs the comparison and keeps
rate-ratio statistics tight.

Rates are compared at equal spent power: each design is scaled to exhaust
the transmit budget ``||P||_F^2 = N`` before scoring.  Only the successive
hybrid design is affected (its digital gains are bounded by 1, so the raw
design underspends by a few percent); the scale factor rides on the digital
stage, which preserves every structural constraint.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import (
    FullPrecoder,
    analog_steering_precoder,
    optimal_subconnected_precoder,
    svd_precoder,
)
from .channel import ArrayGeometry, build_channel, sample_paths
from .opcount import ComplexityReport, OpCounter, analytic_sic_op_count
from .precoding import HybridPrecoder, sic_precode
from .rate import achievable_rate, db_to_linear
from .validation import check_block_diagonal, resolve_subarrays

__all__ = [
    "SimConfig",
    "RatePoint",
    "RateCurve",
    "trial_rng",
    "run_sweep",
    "count_ops",
    "emit_csv",
    "emit_chart",
    "METHOD_LABELS",
]

SWEEP_KINDS = ("snr", "antennas", "user_antennas")

_DEFAULT_SNR_GRID = tuple(float(x) for x in range(-30, 25, 5))
_DEFAULT_ANTENNA_GRID = (16, 32, 64)
_DEFAULT_USER_GRID = (16, 24, 32, 40, 48, 56, 64)


def _design_sic(channel, snr, cfg):
    return sic_precode(
        channel, snr, max_iterations=cfg.iterations, update_mode=cfg.update_mode
    )


def _design_optimal_subconnected(channel, snr, cfg):
    return optimal_subconnected_precoder(channel, snr)


def _design_full_svd(channel, snr, cfg):
    return svd_precoder(channel)


def _design_analog(channel, snr, cfg):
    return analog_steering_precoder(channel)


METHOD_DESIGNERS = {
    "analog_only": _design_analog,
    "fully_connected_svd": _design_full_svd,
    "optimal_subconnected": _design_optimal_subconnected,
    "sic_hybrid": _design_sic,
}

METHOD_LABELS = tuple(sorted(METHOD_DESIGNERS))


@dataclass(frozen=True)
class SimConfig:
    """Everything a sweep needs; (config, seed) determines every output number.

    ``sweep`` selects the grid: ``"snr"`` walks ``snr_grid_db`` at fixed
    dimensions, ``"antennas"`` grows transmit and receive arrays together
    (each sweep value is ``n_tx = n_rx``) at fixed RF-chain count, and
    ``"user_antennas"`` grows the receive array alone.  The antenna sweeps
    evaluate at a single SNR and therefore require ``snr_grid_db`` to hold
    exactly one value.
    """

    n_subarrays: int = 8
    subarray_size: int = 8
    n_rx: int = 16
    n_paths: int = 3
    iterations: int = 5
    snr_grid_db: tuple = _DEFAULT_SNR_GRID
    trials: int = 500
    seed: int = 0
    methods: tuple = METHOD_LABELS
    sweep: str = "snr"
    sweep_values: Optional[tuple] = None
    spacing: float = 0.5
    aod_az_range: tuple = (-np.pi / 6, np.pi / 6)
    aoa_az_range: tuple = (-np.pi, np.pi)
    update_mode: str = "eigen"

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(x) for x in self.snr_grid_db))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.sweep_values is not None:
            object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "aod_az_range", tuple(self.aod_az_range))
        object.__setattr__(self, "aoa_az_range", tuple(self.aoa_az_range))

    def validate(self) -> None:
        for name in ("n_subarrays", "subarray_size", "n_rx", "n_paths", "iterations", "trials"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must not be empty")
        if not self.methods:
            raise ValueError("at least one method must be selected")
        unknown = sorted(set(self.methods) - set(METHOD_DESIGNERS))
        if unknown:
            raise ValueError(f"unknown methods {unknown}; known: {sorted(METHOD_DESIGNERS)}")
        if self.sweep not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep {self.sweep!r}; expected one of {SWEEP_KINDS}")
        if self.sweep != "snr" and len(self.snr_grid_db) != 1:
            raise ValueError(
                f"{self.sweep!r} sweeps need exactly one SNR point, got {len(self.snr_grid_db)}"
            )
        if self.update_mode not in ("eigen", "exact"):
            raise ValueError(f"unknown update mode {self.update_mode!r}")
        if self.n_paths > self.n_subarrays:
            warnings.warn(
                f"{self.n_paths} paths exceed the {self.n_subarrays} RF chains; "
                "the sparse-channel design regime assumes n_paths <= n_subarrays",
                stacklevel=2,
            )
        for value in self._sweep_values():
            if self.sweep == "antennas":
                resolve_subarrays(int(value), self.n_subarrays)

    def _sweep_values(self) -> tuple:
        if self.sweep == "snr":
            return self.snr_grid_db
        if self.sweep_values is not None:
            return self.sweep_values
        return _DEFAULT_ANTENNA_GRID if self.sweep == "antennas" else _DEFAULT_USER_GRID

    def grid_points(self) -> list:
        """Resolved (sweep_value, snr_db, n_subarrays, subarray_size, n_rx) tuples."""
        points = []
        for value in self._sweep_values():
            if self.sweep == "snr":
                points.append(
                    _GridPoint(value, value, self.n_subarrays, self.subarray_size, self.n_rx)
                )
            elif self.sweep == "antennas":
                m = int(value) // self.n_subarrays
                points.append(
                    _GridPoint(float(value), self.snr_grid_db[0], self.n_subarrays, m, int(value))
                )
            else:
                points.append(
                    _GridPoint(
                        float(value),
                        self.snr_grid_db[0],
                        self.n_subarrays,
                        self.subarray_size,
                        int(value),
                    )
                )
        return points


@dataclass(frozen=True)
class _GridPoint:
    sweep_value: float
    snr_db: float
    n_subarrays: int
    subarray_size: int
    n_rx: int

    @property
    def n_tx(self) -> int:
        return self.n_subarrays * self.subarray_size


@dataclass(frozen=True)
class RatePoint:
    """Aggregated Monte Carlo statistics for one (grid point, method) cell."""

    sweep_value: float
    method: str
    mean_rate_bpshz: float
    stderr: float
    trials: int
    seed: int


@dataclass(frozen=True)
class RateCurve:
    """Sweep output: ordered rows, the config that produced them, diagnostics."""

    rows: tuple
    config: SimConfig
    diagnostics: tuple = ()
    op_counts: Optional[dict] = None

    def mean(self, method: str, sweep_value: float) -> float:
        for row in self.rows:
            if row.method == method and row.sweep_value == sweep_value:
                return row.mean_rate_bpshz
        raise KeyError(f"no row for method={method!r}, sweep_value={sweep_value}")


def trial_rng(seed: int, grid_index: int, trial: int) -> np.random.Generator:
    """Independent substream for one (grid point, trial) work item.

    Derived from the root seed through a spawn key, so the stream is the
    same no matter which order (or how concurrently) trials execute.
    """
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=(int(grid_index), int(trial)))
    )


def _quantize(value: float) -> float:
    """Round to the 12-significant-digit wire precision of the CSV format."""
    return float(format(float(value), ".12g"))


def _validate_design(label: str, precoder, point: _GridPoint) -> None:
    if isinstance(precoder, HybridPrecoder):
        precoder.validate()
    elif isinstance(precoder, FullPrecoder):
        precoder.validate(float(point.n_subarrays))
        if precoder.method == "optimal_subconnected":
            check_block_diagonal(precoder.matrix, point.n_subarrays, point.subarray_size)
    else:  # pragma: no cover - registry only returns the two shapes above
        raise TypeError(f"method {label!r} returned an unexpected precoder type")


def _exhaust_budget(precoder, budget: float):
    """Scale a design so it spends the whole power budget ``||P||_F^2 = N``.

    The baselines are already at budget by construction; the successive
    hybrid design's digital gains absorb the (>= 1) scale factor, so the
    analog stage and the block structure are untouched.
    """
    matrix = precoder.matrix
    spent = float(np.linalg.norm(matrix) ** 2)
    if spent <= 0.0:
        return precoder
    scale = np.sqrt(budget / spent)
    if isinstance(precoder, HybridPrecoder):
        return HybridPrecoder(analog=precoder.analog, digital=precoder.digital * scale)
    return FullPrecoder(matrix=matrix * scale, method=precoder.method)


def run_sweep(cfg: SimConfig) -> RateCurve:
    """Execute the configured sweep and aggregate per-method rate statistics.

    Every design is brought to full transmit power and feasibility-checked
    before its rate is scored.  A kernel error aborts the affected grid
    point: its rows carry NaN statistics and the error lands in
    ``diagnostics``; remaining points still run.
    """
    cfg.validate()
    methods = sorted(cfg.methods)
    rows = []
    diagnostics = []
    for grid_index, point in enumerate(cfg.grid_points()):
        snr = db_to_linear(point.snr_db)
        samples = {label: np.empty(cfg.trials) for label in methods}
        try:
            for trial in range(cfg.trials):
                rng = trial_rng(cfg.seed, grid_index, trial)
                paths = sample_paths(rng, cfg.n_paths, cfg.aod_az_range, cfg.aoa_az_range)
                channel = build_channel(
                    ArrayGeometry.ula(point.n_tx, cfg.spacing),
                    ArrayGeometry.ula(point.n_rx, cfg.spacing),
                    paths,
                    n_subarrays=point.n_subarrays,
                )
                for label in methods:
                    precoder = METHOD_DESIGNERS[label](channel, snr, cfg)
                    precoder = _exhaust_budget(precoder, float(point.n_subarrays))
                    _validate_design(label, precoder, point)
                    samples[label][trial] = achievable_rate(
                        channel, precoder, snr, n_streams=point.n_subarrays
                    )
        except Exception as exc:  # noqa: BLE001 - diagnostics row, sweep continues
            diagnostics.append(
                {
                    "sweep_value": point.sweep_value,
                    "snr_db": point.snr_db,
                    "error": f"{type(exc).__name__}: {exc}",
                }
            )
            for label in methods:
                rows.append(
                    RatePoint(point.sweep_value, label, float("nan"), float("nan"),
                              cfg.trials, cfg.seed)
                )
            continue
        for label in methods:
            data = samples[label]
            mean = _quantize(data.mean())
            stderr = 0.0
            if cfg.trials > 1:
                stderr = _quantize(data.std(ddof=1) / np.sqrt(cfg.trials))
            rows.append(RatePoint(point.sweep_value, label, mean, stderr, cfg.trials, cfg.seed))
    op_counts = None
    if "sic_hybrid" in cfg.methods and not diagnostics:
        report = count_ops(cfg)
        op_counts = {
            "sic_hybrid": {
                "instrumented": asdict(report.instrumented),
                "analytic": asdict(report.analytic),
            }
        }
    return RateCurve(rows=tuple(rows), config=cfg, diagnostics=tuple(diagnostics),
                     op_counts=op_counts)


def count_ops(cfg: SimConfig) -> ComplexityReport:
    """Instrumented and analytic arithmetic costs of the SIC design under ``cfg``.

    Runs the designer once on a seeded channel at the first grid point with a
    counter threaded through its four stages, and pairs the tally with the
    leading-order model ``M^2 (N S + K)`` multiplications / ``2 N S``
    divisions.
    """
    if "sic_hybrid" not in cfg.methods:
        raise ValueError("operation counting is defined for the SIC designer; select it")
    cfg.validate()
    point = cfg.grid_points()[0]
    rng = trial_rng(cfg.seed, 0, 0)
    paths = sample_paths(rng, cfg.n_paths, cfg.aod_az_range, cfg.aoa_az_range)
    channel = build_channel(
        ArrayGeometry.ula(point.n_tx, cfg.spacing),
        ArrayGeometry.ula(point.n_rx, cfg.spacing),
        paths,
        n_subarrays=point.n_subarrays,
    )
    counter = OpCounter()
    sic_precode(
        channel,
        db_to_linear(point.snr_db),
        max_iterations=cfg.iterations,
        update_mode="eigen",
        counter=counter,
    )
    analytic = analytic_sic_op_count(
        point.n_subarrays, point.subarray_size, point.n_rx, cfg.iterations
    )
    return ComplexityReport(
        instrumented=counter.snapshot(),
        analytic=analytic,
        params={
            "n_subarrays": point.n_subarrays,
            "subarray_size": point.subarray_size,
            "n_rx": point.n_rx,
            "iterations": cfg.iterations,
            "seed": cfg.seed,
        },
    )


def emit_csv(curve: RateCurve, path) -> None:
    """Write sweep rows as CSV plus a ``<path>.json`` sidecar.

    Columns are ``sweep_value,method,mean_rate_bpshz,stderr,trials,seed``
    with rows ordered grid-point-major and method-lexicographic inside each
    point.  Values are decimals with 12 significant digits, which round-trip
    exactly to the in-memory statistics (aggregation already quantizes to
    this precision).  The sidecar records the full configuration, any
    diagnostics, and the designer's operation counts.
    """
    path = Path(path)
    lines = ["sweep_value,method,mean_rate_bpshz,stderr,trials,seed"]
    for row in curve.rows:
        lines.append(
            f"{format(row.sweep_value, '.12g')},{row.method},"
            f"{format(row.mean_rate_bpshz, '.12g')},{format(row.stderr, '.12g')},"
            f"{row.trials},{row.seed}"
        )
    path.write_text("\n".join(lines) + "\n")
    sidecar = {
        "config": _config_dict(curve.config),
        "diagnostics": list(curve.diagnostics),
        "op_counts": curve.op_counts,
    }
    with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_dict(cfg: SimConfig) -> dict:
    raw = asdict(cfg)
    for key, value in raw.items():
        if isinstance(value, tuple):
            raw[key] = list(value)
    return raw


def emit_chart(curve: RateCurve, path) -> None:
    """Render the sweep as a static line chart (format chosen by extension)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    methods = sorted({row.method for row in curve.rows})
    for method in methods:
        xs = [row.sweep_value for row in curve.rows if row.method == method]
        ys = [row.mean_rate_bpshz for row in curve.rows if row.method == method]
        ax.plot(xs, ys, marker="o", label=method)
    xlabel = {
        "snr": "SNR (dB)",
        "antennas": "transmit = receive antennas",
        "user_antennas": "receive antennas",
    }[curve.config.sweep]
    ax.set_xlabel(xlabel)
    ax.set_ylabel("achievable rate (bits/s/Hz)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
