"""Local SGD and inverse-probability-weighted global aggregation.

A round proceeds as: each participating client runs `local_update` from
the shared parameters, producing a delta; the server applies `aggregate`,
which weights each realized delta by 1/q so the expected update equals the
full-participation average regardless of the selection probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FedConfig:
    n_clients: int
    local_steps: int = 10
    rounds: int = 100
    learning_rate: float = 0.01
    minibatch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.n_clients < 1 or self.local_steps < 1 or self.rounds < 1:
            raise ValueError("n_clients, local_steps, and rounds must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.minibatch_size < 1:
            raise ValueError("minibatch_size must be >= 1")


class GradientError(RuntimeError):
    """Non-finite gradient encountered during a local update."""


def local_update(
    x: np.ndarray,
    objective,
    steps: int,
    lr: float,
    rng: np.random.Generator,
    batch_size: int | None = None,
    client_id: int | None = None,
) -> np.ndarray:
    """Run `steps` minibatch SGD steps from x; return the parameter delta.

    Minibatches are drawn without replacement within an epoch, reshuffling
    when the dataset is exhausted. batch_size=None means full batch.
    """
    if steps < 1 or lr <= 0:
        raise ValueError("steps must be >= 1 and lr positive")
    y = x.copy()
    n = objective.n_samples
    order: np.ndarray = np.empty(0, dtype=int)
    cursor = 0
    for i in range(steps):
        if batch_size is None or batch_size >= n:
            g = objective.full_gradient(y)
        else:
            if cursor + batch_size > order.shape[0]:
                order = rng.permutation(n)
                cursor = 0
            idx = order[cursor : cursor + batch_size]
            cursor += batch_size
            g = objective.batch_gradient(y, idx)
        if not np.all(np.isfinite(g)):
            who = f"client {client_id}" if client_id is not None else "client"
            raise GradientError(f"non-finite gradient at {who}, local step {i}")
        y -= lr * g
    return y - x


def aggregate(
    x: np.ndarray,
    deltas: list[np.ndarray | None],
    indicators: np.ndarray,
    probs: np.ndarray,
) -> np.ndarray:
    """x + (1/N) * sum_n (1_n / q_n) * delta_n over the N clients.

    Clients with indicator 0 contribute nothing and may pass delta=None.
    """
    indicators = np.asarray(indicators)
    probs = np.asarray(probs, dtype=float)
    n = len(deltas)
    if indicators.shape[0] != n or probs.shape[0] != n:
        raise ValueError("deltas, indicators, and probs must have equal length")
    if np.any(probs <= 0):
        raise ValueError("selection probabilities must be strictly positive")
    if not np.all(np.isin(indicators, (0, 1))):
        raise ValueError("indicators must be 0 or 1")
    update = np.zeros_like(x)
    for i in range(n):
        if indicators[i]:
            if deltas[i] is None:
                raise ValueError(f"client {i} selected but no delta provided")
            update += deltas[i] / probs[i]
    return x + update / n


def bound_diagnostics(probs_history: np.ndarray, constants: dict) -> dict:
    """Evaluate the stationarity upper bound for a finished run.

    probs_history is (T, N) per-round selection probabilities. constants
    needs L, G, lr, local_steps, f0 (initial loss) and f_star (estimate of
    the optimal loss; the result is an upper-bound estimate, not exact).
    """
    probs_history = np.atleast_2d(np.asarray(probs_history, dtype=float))
    if np.any(probs_history <= 0):
        raise ValueError("all selection probabilities must be positive")
    L, G = constants["L"], constants["G"]
    if L <= 0 or G <= 0:
        raise ValueError("L and G must be positive")
    lr = constants["lr"]
    I = constants["local_steps"]
    T, N = probs_history.shape
    sum_inv_q = float(np.sum(1.0 / probs_history) / (T * N))
    gap = constants["f0"] - constants["f_star"]
    bound = (
        2.0 * gap / (lr * T * I)
        + lr**2 * L**2 * (I - 1) ** 2 * G**2
        + lr * L * I * G**2 * sum_inv_q
    )
    return {"sum_inv_q": sum_inv_q, "corollary_bound": float(bound)}
