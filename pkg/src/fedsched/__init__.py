"""Federated learning over a simulated wireless uplink with probabilistic
client scheduling: unbiased inverse-probability aggregation, virtual-queue
power control with a closed-form Lambert-W solution, Rayleigh fading TDMA
timing, and a reproducible experiment harness."""

__version__ = "0.1.0"

from .channel import ChannelConfig, ChannelSample, capacity_bps, sample_gain, tx_time_seconds
from .fedcore import FedConfig, aggregate, bound_diagnostics, local_update
from .lambertw import LambertResult, lambert_w0
from .scheduler import (
    LyapunovConfig,
    ScheduleDecision,
    decide,
    estimate_mean_selected,
    optimal_power,
    optimal_q,
    per_device_objective,
    queue_update,
    run_policy,
    uniform_baseline,
)
from .simulator import (
    RoundRecord,
    Simulation,
    constraint_convergence_trace,
    moving_average,
    run,
    time_to_target,
)

__all__ = [
    "ChannelConfig",
    "ChannelSample",
    "FedConfig",
    "LambertResult",
    "LyapunovConfig",
    "RoundRecord",
    "ScheduleDecision",
    "Simulation",
    "aggregate",
    "bound_diagnostics",
    "capacity_bps",
    "constraint_convergence_trace",
    "decide",
    "estimate_mean_selected",
    "lambert_w0",
    "local_update",
    "moving_average",
    "optimal_power",
    "optimal_q",
    "per_device_objective",
    "queue_update",
    "run",
    "run_policy",
    "sample_gain",
    "time_to_target",
    "tx_time_seconds",
    "uniform_baseline",
]
