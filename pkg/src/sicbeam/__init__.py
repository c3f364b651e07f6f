"""Hybrid analog/digital precoding for sub-connected mmWave antenna arrays.

The package synthesises block-diagonal precoders for transmitters whose RF
chains each drive a dedicated antenna subarray through phase shifters.  The
core designer serves subarrays successively: each step estimates the dominant
eigendirection of the residual channel Gram with a short accelerated power
iteration, projects it onto the feasible phase/gain set in closed form, and
removes the served direction with a rank-one downdate.  Alongside it live a
geometric multipath channel generator, unconstrained and analog-only
reference precoders, achievable-rate evaluation, an arithmetic-cost model,
and a seeded Monte Carlo sweep harness with a CLI front end.
"""

from .baselines import (
    FullPrecoder,
    analog_steering_precoder,
    optimal_subconnected_precoder,
    svd_precoder,
)
from .channel import (
    ArrayGeometry,
    ChannelMatrix,
    PathSet,
    build_channel,
    sample_paths,
    save_channel_csv,
    steering_vector,
)
from .estimators import (
    AnalogSteeringPrecoder,
    FullSVDPrecoder,
    OptimalSubconnectedPrecoder,
    SICHybridPrecoder,
)
from .opcount import ComplexityReport, OpCount, OpCounter, analytic_sic_op_count
from .precoding import (
    DominantEigenPair,
    GramState,
    HybridPrecoder,
    closed_form_solution,
    initial_gram,
    power_iteration,
    save_precoder_csv,
    sic_precode,
    update_gram,
)
from .rate import RateSample, achievable_rate, db_to_linear, decomposed_rate
from .sim import (
    METHOD_LABELS,
    RateCurve,
    RatePoint,
    SimConfig,
    count_ops,
    emit_chart,
    emit_csv,
    run_sweep,
    trial_rng,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "PathSet",
    "ChannelMatrix",
    "steering_vector",
    "sample_paths",
    "build_channel",
    "save_channel_csv",
    "DominantEigenPair",
    "GramState",
    "HybridPrecoder",
    "initial_gram",
    "power_iteration",
    "closed_form_solution",
    "update_gram",
    "sic_precode",
    "save_precoder_csv",
    "FullPrecoder",
    "svd_precoder",
    "optimal_subconnected_precoder",
    "analog_steering_precoder",
    "RateSample",
    "achievable_rate",
    "decomposed_rate",
    "db_to_linear",
    "OpCount",
    "OpCounter",
    "ComplexityReport",
    "analytic_sic_op_count",
    "SimConfig",
    "RatePoint",
    "RateCurve",
    "run_sweep",
    "count_ops",
    "emit_csv",
    "emit_chart",
    "trial_rng",
    "METHOD_LABELS",
    "SICHybridPrecoder",
    "OptimalSubconnectedPrecoder",
    "FullSVDPrecoder",
    "AnalogSteeringPrecoder",
    "__version__",
]
