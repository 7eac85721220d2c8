"""The V knob: objective weight vs. power-constraint convergence speed.

Runs the scheduling policy alone (no training) for several values of the
drift-penalty weight V and prints how the per-device time-averaged energy
draw E[P*q] approaches the budget p_avg. Small V honors the budget almost
immediately; large V explores aggressively and converges slowly.
"""

import numpy as np

from fedsched.channel import ChannelConfig
from fedsched.scheduler import LyapunovConfig, run_policy


def main():
    channel = ChannelConfig(sigma=np.ones(10), payload_bits=32e4)
    rounds = 5000
    checkpoints = [10, 50, 100, 500, 1000, 5000]

    print(f"{'V':>8} | " + "  ".join(f"t={t:<5}" for t in checkpoints) + "  (max device avg P*q)")
    for v in [1.0, 100.0, 1000.0, 1e5]:
        cfg = LyapunovConfig(channel=channel, n_clients=10, v_weight=v,
                             lambda_weight=10.0)
        trace = run_policy(cfg, rounds, np.random.default_rng(0))
        pq = trace["power"] * trace["q"]
        avg = np.cumsum(pq, axis=0) / np.arange(1, rounds + 1)[:, None]
        row = "  ".join(f"{avg[t - 1].max():7.3f}" for t in checkpoints)
        print(f"{v:8g} | {row}")
    print(f"\nbudget p_avg = {channel.p_avg}; every column should head toward it.")


if __name__ == "__main__":
    main()
