"""Round-loop orchestration: channel -> scheduler -> local SGD -> TDMA clock.

Each round: sample per-device gains, get (q, P) decisions from the active
policy, draw Bernoulli selections (forcing the largest-q device if nobody
was drawn), run local updates for the selected devices, sum their serial
transmit times onto the communication clock, aggregate with 1/q weights,
and advance the virtual queues. Compute time and the downlink are excluded
from the clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .channel import ChannelConfig, tx_time_seconds
from .fedcore import FedConfig, aggregate, local_update
from .scheduler import LyapunovConfig, decide, queue_update, uniform_baseline


@dataclass(frozen=True)
class RoundRecord:
    t: int
    train_loss: float
    test_accuracy: float
    round_comm_time_s: float
    cumulative_comm_time_s: float
    selected_count: int
    sum_inv_q: float
    forced_selection: int
    mean_power_q: np.ndarray = field(repr=False, default=None)
    queues: np.ndarray = field(repr=False, default=None)


@dataclass
class Simulation:
    """A fully assembled run: per-client objectives plus policy settings."""

    fed: FedConfig
    channel: ChannelConfig
    objectives: list
    x0: np.ndarray
    policy: str = "lyapunov"  # or "uniform"
    lyapunov: LyapunovConfig | None = None
    uniform_m: float | None = None
    eval_every: int = 1
    accuracy_fn: object | None = None  # callable(x) -> float, or None

    def __post_init__(self):
        if self.policy not in ("lyapunov", "uniform"):
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.policy == "lyapunov" and self.lyapunov is None:
            raise ValueError("lyapunov policy needs a LyapunovConfig")
        if self.policy == "uniform" and self.uniform_m is None:
            raise ValueError("uniform policy needs uniform_m")
        if len(self.objectives) != self.fed.n_clients:
            raise ValueError("one objective per client required")


def run(sim: Simulation) -> list[RoundRecord]:
    """Execute the configured number of rounds; one record per round."""
    fed = sim.fed
    n = fed.n_clients
    ch = sim.channel
    master = fed.seed
    channel_rngs = [seeding.substream(master, seeding.CHANNEL, i) for i in range(n)]
    batch_rngs = [seeding.substream(master, seeding.MINIBATCH, i) for i in range(n)]
    select_rng = seeding.substream(master, seeding.SELECTION)

    x = sim.x0.copy()
    z = np.zeros(n)
    power_q_sum = np.zeros(n)
    clock = 0.0
    records: list[RoundRecord] = []
    last_loss = math.nan
    last_acc = math.nan

    for t in range(fed.rounds):
        gains = np.array(
            [
                float(np.clip(channel_rngs[i].rayleigh(scale=ch.sigma[i]) ** 2, ch.gain_lo, ch.gain_hi))
                for i in range(n)
            ]
        )

        if sim.policy == "lyapunov":
            decisions = [decide(gains[i], z[i], sim.lyapunov, select_rng, device=i, t=t) for i in range(n)]
        else:
            decisions = uniform_baseline(n, sim.uniform_m, ch.p_avg, select_rng, t=t)

        qs = np.array([d.q for d in decisions])
        powers = np.array([d.power for d in decisions])
        selected = np.array([d.selected for d in decisions])

        forced = 0
        if selected.sum() == 0:
            selected[int(np.argmax(qs))] = 1
            forced = 1

        deltas: list[np.ndarray | None] = [None] * n
        for i in np.flatnonzero(selected):
            try:
                deltas[i] = local_update(
                    x,
                    sim.objectives[i],
                    fed.local_steps,
                    fed.learning_rate,
                    batch_rngs[i],
                    batch_size=fed.minibatch_size,
                    client_id=i,
                )
            except Exception as exc:
                raise RuntimeError(f"round {t}, device {i}: {exc}") from exc

        round_time = float(
            sum(tx_time_seconds(gains[i], powers[i], ch) for i in np.flatnonzero(selected))
        )
        clock += round_time

        x = aggregate(x, deltas, selected, qs)

        if sim.policy == "lyapunov":
            for i in range(n):
                z[i] = queue_update(z[i], powers[i], qs[i], ch.p_avg)
        power_q_sum += powers * qs

        if t % sim.eval_every == 0 or t == fed.rounds - 1:
            last_loss = float(np.mean([obj.loss(x) for obj in sim.objectives]))
            if sim.accuracy_fn is not None:
                last_acc = float(sim.accuracy_fn(x))

        records.append(
            RoundRecord(
                t=t,
                train_loss=last_loss,
                test_accuracy=last_acc,
                round_comm_time_s=round_time,
                cumulative_comm_time_s=clock,
                selected_count=int(selected.sum()),
                sum_inv_q=float(np.sum(1.0 / qs)),
                forced_selection=forced,
                mean_power_q=power_q_sum / (t + 1),
                queues=z.copy(),
            )
        )
    return records


def moving_average(series, window: int = 500) -> np.ndarray:
    """Trailing mean over min(window, t+1) points; same length as input."""
    if window < 1:
        raise ValueError("window must be >= 1")
    series = np.asarray(series, dtype=float)
    csum = np.cumsum(series)
    out = np.empty_like(csum)
    out[:window] = csum[:window] / np.arange(1, min(window, series.shape[0]) + 1)
    if series.shape[0] > window:
        out[window:] = (csum[window:] - csum[:-window]) / window
    return out


def time_to_target(records: list[RoundRecord], metric: str, target: float, window: int = 500):
    """Communication time when the smoothed metric first crosses target.

    metric "test_accuracy" crosses upward (>= target); "train_loss"
    crosses downward (<= target). Returns None if never crossed.
    """
    if metric not in ("test_accuracy", "train_loss"):
        raise ValueError(f"unsupported metric {metric!r}")
    values = moving_average([getattr(r, metric) for r in records], window)
    for r, v in zip(records, values):
        hit = v >= target if metric == "test_accuracy" else v <= target
        if hit:
            return r.cumulative_comm_time_s
    return None


def constraint_convergence_trace(records: list[RoundRecord], n: int) -> np.ndarray:
    """Running time-average of device n's expected power P*q per round."""
    if not records or records[0].mean_power_q is None or n >= records[0].mean_power_q.shape[0]:
        raise ValueError(f"no power trace for device {n}")
    return np.array([r.mean_power_q[n] for r in records])
