"""Simulated Rayleigh-fading uplink: gains, capacity, transmit time.

Each device sees an i.i.d. (over rounds) power gain drawn as the square of
a Rayleigh variate, clamped to a realistic modulation range: the high end
corresponds to 1024-QAM (10 bits/s/Hz at the average-power budget), the
low end to a 0.25 bits/s/Hz coded rate at peak power.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ChannelConfig:
    """Uplink parameters shared by all devices.

    sigma is the per-device Rayleigh scale, one entry per device.
    Powers are in watts (noise normalized), bandwidth in Hz, payload in bits.
    """

    sigma: np.ndarray
    noise_power: float = 1.0
    bandwidth_hz: float = 22e6
    payload_bits: float = 32e4
    p_max: float = 100.0
    p_avg: float = 1.0

    def __post_init__(self):
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "sigma", sigma)
        if np.any(sigma <= 0):
            raise ValueError("rayleigh scale sigma must be positive")
        for name in ("noise_power", "bandwidth_hz", "payload_bits", "p_max", "p_avg"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.p_avg > self.p_max:
            raise ValueError("p_avg must not exceed p_max")

    @property
    def n_devices(self) -> int:
        return self.sigma.shape[0]

    @property
    def gain_hi(self) -> float:
        # 1024-QAM ceiling: 10 bits/s/Hz at the average-power budget.
        return (2.0**10 - 1.0) * self.noise_power / self.p_avg

    @property
    def gain_lo(self) -> float:
        # 0.25 bits/s/Hz coded floor at peak power.
        return (2.0**0.25 - 1.0) * self.noise_power / self.p_max


@dataclass(frozen=True)
class ChannelSample:
    device: int
    round: int
    gain: float


def sample_gain(config: ChannelConfig, n: int, t: int, rng: np.random.Generator) -> ChannelSample:
    """Draw device n's clamped power gain |h|^2 for round t."""
    raw = rng.rayleigh(scale=config.sigma[n]) ** 2
    gain = float(np.clip(raw, config.gain_lo, config.gain_hi))
    return ChannelSample(device=n, round=t, gain=gain)


def sample_gains(config: ChannelConfig, rngs: list[np.random.Generator], t: int) -> np.ndarray:
    """One clamped gain per device for round t, each from its own stream."""
    raw = np.array([rng.rayleigh(scale=config.sigma[n]) ** 2 for n, rng in enumerate(rngs)])
    return np.clip(raw, config.gain_lo, config.gain_hi)


def capacity_bps(gain, power, config: ChannelConfig):
    """Shannon capacity B*log2(1 + gain*P/N0); zero at P=0. Broadcasts."""
    power = np.asarray(power, dtype=float)
    if np.any(power < 0):
        raise ValueError("transmit power must be nonnegative")
    out = config.bandwidth_hz * np.log2(1.0 + np.asarray(gain) * power / config.noise_power)
    return out if out.ndim else float(out)


def tx_time_seconds(gain, power, config: ChannelConfig):
    """Seconds to push the payload through at capacity. Requires P > 0."""
    if np.any(np.asarray(power) <= 0):
        raise ValueError("selected device must transmit with positive power")
    cap = capacity_bps(gain, power, config)
    out = config.payload_bits / cap
    return out if np.ndim(out) else float(out)


def sigma_profile(groups: list[tuple[int, float]]) -> np.ndarray:
    """Expand [(count, sigma), ...] into a per-device scale vector."""
    parts = [np.full(count, s, dtype=float) for count, s in groups]
    return np.concatenate(parts) if parts else np.array([])
