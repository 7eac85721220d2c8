import numpy as np
import pytest

from fedsched.channel import ChannelConfig, sigma_profile
from fedsched.config import parse_config_dict, build_simulation
from fedsched.fedcore import FedConfig
from fedsched.objectives import QuadraticObjective
from fedsched.scheduler import LyapunovConfig
from fedsched.simulator import (
    RoundRecord,
    Simulation,
    constraint_convergence_trace,
    moving_average,
    run,
    time_to_target,
)


def quad_sim(n=3, rounds=5, policy="uniform", uniform_m=None, seed=0, sigma=1.0, **lyap):
    fed = FedConfig(n_clients=n, local_steps=2, rounds=rounds, learning_rate=0.1,
                    minibatch_size=32, seed=seed)
    ch = ChannelConfig(sigma=np.full(n, sigma))
    rng = np.random.default_rng(seed)
    objectives = [QuadraticObjective(rng.standard_normal((6, 4)) + i) for i in range(n)]
    lyconf = LyapunovConfig(channel=ch, n_clients=n, **lyap) if policy == "lyapunov" else None
    return Simulation(
        fed=fed, channel=ch, objectives=objectives, x0=np.zeros(4), policy=policy,
        lyapunov=lyconf, uniform_m=uniform_m if policy == "uniform" else None,
    )


def test_uniform_full_participation_is_fedavg():
    sim = quad_sim(n=3, rounds=4, uniform_m=3.0)
    records = run(sim)
    assert all(r.selected_count == 3 for r in records)
    assert all(r.sum_inv_q == pytest.approx(3.0) for r in records)
    # replicate: with q = 1, update is the plain mean of full deltas
    from fedsched import seeding
    from fedsched.fedcore import local_update

    sim2 = quad_sim(n=3, rounds=4, uniform_m=3.0)
    x = sim2.x0.copy()
    brngs = [seeding.substream(0, seeding.MINIBATCH, i) for i in range(3)]
    for _ in range(4):
        deltas = [local_update(x, o, 2, 0.1, brngs[i], batch_size=32) for i, o in enumerate(sim2.objectives)]
        x = x + np.mean(deltas, axis=0)
    final_loss = float(np.mean([o.loss(x) for o in sim2.objectives]))
    assert records[-1].train_loss == pytest.approx(final_loss, rel=1e-12)


def test_single_device_round_time_exact():
    sim = quad_sim(n=1, rounds=1, uniform_m=1.0)
    rec = run(sim)[0]
    ch = sim.channel
    # reconstruct the gain from the same substream
    from fedsched import seeding

    gain = float(np.clip(seeding.substream(0, seeding.CHANNEL, 0).rayleigh(1.0) ** 2,
                         ch.gain_lo, ch.gain_hi))
    expected = ch.payload_bits / (ch.bandwidth_hz * np.log2(1 + gain * 1.0 / ch.noise_power))
    assert rec.round_comm_time_s == pytest.approx(expected, rel=1e-12)
    assert rec.cumulative_comm_time_s == rec.round_comm_time_s


def test_identical_seeds_identical_records():
    a = run(quad_sim(rounds=6, policy="lyapunov", v_weight=1000.0, lambda_weight=10.0, seed=5))
    b = run(quad_sim(rounds=6, policy="lyapunov", v_weight=1000.0, lambda_weight=10.0, seed=5))
    for ra, rb in zip(a, b):
        assert ra.train_loss == rb.train_loss
        assert ra.cumulative_comm_time_s == rb.cumulative_comm_time_s
        assert ra.selected_count == rb.selected_count


def test_at_least_one_selected_and_monotone_clock():
    sim = quad_sim(n=4, rounds=40, policy="lyapunov", v_weight=1.0, lambda_weight=5e3)
    records = run(sim)
    assert all(r.selected_count >= 1 for r in records)
    times = [r.cumulative_comm_time_s for r in records]
    assert all(b >= a for a, b in zip(times, times[1:]))
    assert any(r.forced_selection for r in records) or all(r.selected_count >= 1 for r in records)


def test_tdma_additivity():
    # round time is the serial sum of selected devices' transmit times:
    # with all devices selected at fixed power, check against direct recompute
    from fedsched import seeding
    from fedsched.channel import tx_time_seconds

    sim = quad_sim(n=3, rounds=2, uniform_m=3.0)
    records = run(sim)
    ch = sim.channel
    crngs = [seeding.substream(0, seeding.CHANNEL, i) for i in range(3)]
    for rec in records:
        gains = [float(np.clip(r.rayleigh(1.0) ** 2, ch.gain_lo, ch.gain_hi)) for r in crngs]
        expected = sum(tx_time_seconds(g, 1.0 * 3 / 3, ch) for g in gains)
        assert rec.round_comm_time_s == pytest.approx(expected, rel=1e-12)


def test_moving_average_examples():
    assert moving_average([2.0, 2.0, 2.0], 2).tolist() == [2.0, 2.0, 2.0]
    assert moving_average([1.0, 5.0, 3.0], 1).tolist() == [1.0, 5.0, 3.0]
    assert moving_average([0.0, 1.0], 2).tolist() == [0.0, 0.5]
    long = moving_average(np.arange(10, dtype=float), 3)
    assert long[5] == pytest.approx(4.0)
    with pytest.raises(ValueError):
        moving_average([1.0], 0)


def _records_from(acc, times):
    return [
        RoundRecord(t=i, train_loss=np.nan, test_accuracy=a, round_comm_time_s=0.0,
                    cumulative_comm_time_s=c, selected_count=1, sum_inv_q=1.0,
                    forced_selection=0)
        for i, (a, c) in enumerate(zip(acc, times))
    ]


def test_time_to_target():
    recs = _records_from([0.5, 0.8], [1.0, 3.0])
    assert time_to_target(recs, "test_accuracy", 0.7, window=1) == 3.0
    assert time_to_target(recs, "test_accuracy", 0.9, window=1) is None
    recs0 = _records_from([0.9, 0.95], [2.0, 4.0])
    assert time_to_target(recs0, "test_accuracy", 0.7, window=1) == 2.0
    with pytest.raises(ValueError):
        time_to_target(recs, "sum_inv_q", 1.0)


def test_constraint_trace_shapes_and_flatline():
    sim = quad_sim(n=2, rounds=5, uniform_m=2.0)
    records = run(sim)
    trace = constraint_convergence_trace(records, 0)
    assert trace.shape == (5,)
    # uniform with integer M = N: P*q = (pavg*N/N)*(M/N) = pavg each round
    np.testing.assert_allclose(trace, np.ones(5))
    with pytest.raises(ValueError):
        constraint_convergence_trace(records, 7)


def test_constraint_trace_decay_arithmetic():
    # P*q = 2*pavg for 10 rounds then 0: running mean decays as 20/t
    pq = np.array([2.0] * 10 + [0.0] * 30)
    running = np.cumsum(pq) / np.arange(1, 41)
    assert running[39] == pytest.approx(20.0 / 40.0)


def test_quantity_vs_quality_lambda_comparison():
    # higher lambda penalizes communication time harder, so the schedule picks
    # fewer/cheaper uploads and total on-air time drops
    base = {
        "seed": 2,
        "policy": "lyapunov",
        "fed": {"n_clients": 20, "rounds": 120, "local_steps": 5, "learning_rate": 0.05},
        "channel": {"sigma": [[2, 0.2], [8, 0.75], [10, 1.2]]},
        "lyapunov": {"v_weight": 1000.0, "lambda_weight": 10.0},
        "workload": {"kind": "logistic", "n_samples": 800, "dim": 8, "n_classes": 4},
    }
    def stats(lam):
        doc = {**base, "lyapunov": {"v_weight": 1000.0, "lambda_weight": lam}}
        records = run(build_simulation(parse_config_dict(doc)))
        total_time = records[-1].cumulative_comm_time_s
        mean_selected = np.mean([r.selected_count for r in records])
        return total_time, mean_selected

    time_lo, sel_lo = stats(10.0)
    time_hi, sel_hi = stats(100.0)
    assert time_hi < time_lo
    assert sel_hi <= sel_lo
