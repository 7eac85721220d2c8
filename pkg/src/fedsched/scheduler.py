"""Per-round selection-probability and transmit-power optimization.

Each device keeps a virtual queue Z tracking accumulated debt against its
time-average power budget. Every round the scheduler minimizes, per
device,

    f(q, P) = V * ( 1/(N q) + lam * ell * q / (B log2(1 + g P / N0)) )
              + Z * (P q - p_avg)

over q in (0, 1], P in [0, p_max]. The interior critical point has a
closed form through the principal Lambert W branch; boundary candidates
cover the clamped cases. The queue update uses the expected power P*q,
so the constraint is enforced in expectation.

Note on constants: differentiating the log2 capacity contributes a single
ln(2) factor, so the Lambert W argument uses
A = V*lam*ell*g*ln(2) / (N0*B*Z). Stationarity of the returned interior
point is checked against finite differences in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelConfig
from .lambertw import lambert_w0

LN2 = math.log(2.0)


@dataclass(frozen=True)
class LyapunovConfig:
    channel: ChannelConfig
    n_clients: int
    v_weight: float = 1000.0
    lambda_weight: float = 10.0
    q_min: float = 1e-6

    def __post_init__(self):
        if self.v_weight <= 0 or self.lambda_weight <= 0:
            raise ValueError("v_weight and lambda_weight must be positive")
        if not 0 < self.q_min <= 1:
            raise ValueError("q_min must be in (0, 1]")
        if self.n_clients < 1:
            raise ValueError("n_clients must be >= 1")


@dataclass(frozen=True)
class ScheduleDecision:
    device: int
    round: int
    q: float
    power: float
    selected: int
    objective_value: float


def per_device_objective(q, power, gain, z, cfg: LyapunovConfig):
    """Drift-plus-penalty objective restricted to one device. Broadcasts."""
    q = np.asarray(q, dtype=float)
    power = np.asarray(power, dtype=float)
    if np.any(q <= 0) or np.any(power <= 0):
        raise ValueError("objective undefined at q=0 or P=0")
    ch = cfg.channel
    cap = ch.bandwidth_hz * np.log1p(np.asarray(gain) * power / ch.noise_power) / LN2
    penalty = cfg.v_weight * (
        1.0 / (cfg.n_clients * q) + cfg.lambda_weight * ch.payload_bits * q / cap
    )
    drift = np.asarray(z) * (power * q - ch.p_avg)
    out = penalty + drift
    return out if out.ndim else float(out)


def optimal_power(gain: float, z: float, cfg: LyapunovConfig) -> float:
    """Interior critical point in P (independent of q). Requires Z > 0."""
    if z <= 0:
        raise ValueError("no interior optimum at Z=0; use p_max")
    if gain <= 0:
        raise ValueError("gain must be positive")
    ch = cfg.channel
    a = cfg.v_weight * cfg.lambda_weight * ch.payload_bits * gain * LN2 / (
        ch.noise_power * ch.bandwidth_hz * z
    )
    s = math.sqrt(a / 4.0)
    w = lambert_w0(s).w
    # x = 1 + g*P/N0 solves x*(ln x)^2 = A; equivalently x = exp(2*W0(sqrt(A/4))).
    x = (a / 4.0) / (w * w) if w > 0 else 1.0
    return ch.noise_power / gain * (x - 1.0)


def optimal_q(gain: float, power: float, z: float, cfg: LyapunovConfig) -> float:
    """Unclamped critical selection probability at a given power."""
    if power <= 0:
        raise ValueError("optimal_q requires positive power")
    ch = cfg.channel
    cap = ch.bandwidth_hz * math.log1p(gain * power / ch.noise_power) / LN2
    inner = (
        cfg.lambda_weight * ch.payload_bits * cfg.n_clients / cap
        + cfg.n_clients / cfg.v_weight * z * power
    )
    return inner ** -0.5


def _hessian_is_minimum(q: float, power: float, gain: float, z: float, cfg: LyapunovConfig) -> bool:
    """Positive-definiteness of the analytic Hessian at (q, P)."""
    ch = cfg.channel
    a = gain / ch.noise_power
    u = 1.0 + a * power
    lnu = math.log(u)
    k = cfg.v_weight * cfg.lambda_weight * ch.payload_bits * LN2 / ch.bandwidth_hz
    f_qq = 2.0 * cfg.v_weight / (cfg.n_clients * q**3)
    f_pp = k * q * a * a / (u * u * lnu * lnu) * (1.0 + 2.0 / lnu)
    f_qp = -k * a / (u * lnu * lnu) + z
    det = f_qq * f_pp - f_qp * f_qp
    return f_qq > 0 and det > 0


def _clamp_q(q: float, cfg: LyapunovConfig) -> float:
    return min(max(q, cfg.q_min), 1.0)


def decide(
    gain: float,
    z: float,
    cfg: LyapunovConfig,
    rng: np.random.Generator,
    device: int = 0,
    t: int = 0,
) -> ScheduleDecision:
    """Pick (q, P) minimizing the per-device objective over the feasible box.

    Candidates: the interior Lambert-W critical point when it is feasible
    and passes the Hessian minimum test, the full-power boundary with its
    own optimal q, and (when the unclamped q exceeds 1) the q=1 edge at the
    interior power. Selection is then drawn Bernoulli(q).
    """
    ch = cfg.channel
    candidates: list[tuple[float, float]] = []

    p_int = None
    if z > 0:
        p_int = optimal_power(gain, z, cfg)
        if 0 < p_int <= ch.p_max:
            q_int = optimal_q(gain, p_int, z, cfg)
            if 0 < q_int <= 1 and _hessian_is_minimum(q_int, p_int, gain, z, cfg):
                candidates.append((q_int, p_int))
            elif q_int > 1:
                candidates.append((1.0, p_int))

    q_edge = _clamp_q(optimal_q(gain, ch.p_max, z, cfg), cfg)
    candidates.append((q_edge, ch.p_max))

    best_q, best_p = min(
        candidates, key=lambda c: per_device_objective(c[0], c[1], gain, z, cfg)
    )
    best_q = _clamp_q(best_q, cfg)
    value = per_device_objective(best_q, best_p, gain, z, cfg)
    selected = int(rng.random() < best_q)
    return ScheduleDecision(
        device=device, round=t, q=best_q, power=best_p, selected=selected, objective_value=value
    )


def queue_update(z: float, power: float, q: float, p_avg: float) -> float:
    """Z' = max(Z + P*q - p_avg, 0); uses the probability, not the draw."""
    if z < 0:
        raise ValueError("queue state must be nonnegative")
    return max(z + power * q - p_avg, 0.0)


def uniform_baseline(
    n_clients: int,
    m: float,
    p_avg: float,
    rng: np.random.Generator,
    t: int = 0,
) -> list[ScheduleDecision]:
    """Matched random-subset baseline selecting E[M'] = m devices per round.

    Fractional m rounds down with probability ceil(m)-m, else up; each
    selected device transmits at p_avg * N / M' so expected round power
    meets the average budget. Recorded q is m/N for aggregation weighting.
    """
    if not 0 < m <= n_clients:
        raise ValueError("m must be in (0, n_clients]")
    lo, hi = math.floor(m), math.ceil(m)
    if lo == hi:
        m_realized = lo
    else:
        m_realized = lo if rng.random() < hi - m else hi
    m_realized = max(m_realized, 1)
    chosen = set(rng.choice(n_clients, size=m_realized, replace=False).tolist())
    power = p_avg * n_clients / m_realized
    q = m / n_clients
    return [
        ScheduleDecision(
            device=i, round=t, q=q, power=power, selected=int(i in chosen), objective_value=math.nan
        )
        for i in range(n_clients)
    ]


def run_policy(
    cfg: LyapunovConfig,
    rounds: int,
    rng: np.random.Generator,
    channel_rngs: list[np.random.Generator] | None = None,
) -> dict:
    """Closed-loop scheduler-only simulation (no training).

    Returns per-round arrays: q, power, selected (each (rounds, N)) and
    the final queue states. Used for constraint diagnostics and for
    Monte-Carlo estimation of the mean number of selected devices.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    n = cfg.n_clients
    z = np.zeros(n)
    qs = np.empty((rounds, n))
    ps = np.empty((rounds, n))
    sel = np.empty((rounds, n), dtype=int)
    ch = cfg.channel
    for t in range(rounds):
        for i in range(n):
            crng = channel_rngs[i] if channel_rngs is not None else rng
            raw = crng.rayleigh(scale=ch.sigma[i]) ** 2
            gain = float(np.clip(raw, ch.gain_lo, ch.gain_hi))
            d = decide(gain, z[i], cfg, rng, device=i, t=t)
            qs[t, i], ps[t, i], sel[t, i] = d.q, d.power, d.selected
        for i in range(n):
            z[i] = queue_update(z[i], ps[t, i], qs[t, i], ch.p_avg)
    return {"q": qs, "power": ps, "selected": sel, "queues": z}


def estimate_mean_selected(cfg: LyapunovConfig, rounds: int, rng: np.random.Generator) -> float:
    """Monte-Carlo mean of sum_n q_n per round under the closed-loop policy."""
    trace = run_policy(cfg, rounds, rng)
    return float(trace["q"].sum(axis=1).mean())
