"""Run configuration: JSON schema, fail-closed validation, assembly.

A run config is a JSON document with nested sections (fed, channel,
lyapunov, workload) plus top-level policy/seed/eval settings. Unknown keys
anywhere are rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .channel import ChannelConfig
from .data import generate_synthetic
from .fedcore import FedConfig
from .objectives import LogisticObjective, QuadraticObjective, TwoLayerNet
from .scheduler import LyapunovConfig
from .simulator import Simulation


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending key."""


_TOP_KEYS = {
    "seed",
    "policy",
    "uniform_m",
    "eval_every",
    "moving_average_window",
    "fed",
    "channel",
    "lyapunov",
    "workload",
}
_FED_KEYS = {"n_clients", "local_steps", "rounds", "learning_rate", "minibatch_size"}
_CHANNEL_KEYS = {"sigma", "noise_power", "bandwidth_hz", "payload_bits", "p_max", "p_avg"}
_LYAP_KEYS = {"v_weight", "lambda_weight", "q_min"}
_WORKLOAD_KEYS = {
    "kind",
    "n_samples",
    "dim",
    "n_classes",
    "heterogeneity",
    "l2",
    "hidden",
    "samples_per_client",
}


@dataclass(frozen=True)
class RunConfig:
    seed: int
    policy: str
    fed: FedConfig
    channel: ChannelConfig
    lyapunov: LyapunovConfig
    workload: dict
    uniform_m: float | None = None
    eval_every: int = 1
    moving_average_window: int = 500
    raw: dict = field(repr=False, default=None)


def _reject_unknown(section: dict, allowed: set, where: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def _number(section: dict, key: str, default, where: str, positive=True):
    value = section.get(key, default)
    if value is None:
        raise ConfigError(f"missing required key {key!r} in {where}")
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"key {key!r} in {where} must be a number")
    if positive and value <= 0:
        raise ConfigError(f"key {key!r} in {where} must be positive")
    return value


def _expand_sigma(sigma, n_clients: int) -> np.ndarray:
    if isinstance(sigma, (int, float)):
        return np.full(n_clients, float(sigma))
    if isinstance(sigma, list) and sigma and isinstance(sigma[0], list):
        # [[count, scale], ...] group shorthand
        out = np.concatenate([np.full(int(c), float(s)) for c, s in sigma])
    elif isinstance(sigma, list):
        out = np.asarray(sigma, dtype=float)
    else:
        raise ConfigError("key 'sigma' in channel must be a number or list")
    if out.shape[0] != n_clients:
        raise ConfigError(
            f"key 'sigma' in channel expands to {out.shape[0]} devices, expected {n_clients}"
        )
    return out


def parse_config_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    _reject_unknown(doc, _TOP_KEYS, "top level")

    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("key 'seed' must be a nonnegative integer")

    policy = doc.get("policy", "lyapunov")
    if policy not in ("lyapunov", "uniform"):
        raise ConfigError("key 'policy' must be 'lyapunov' or 'uniform'")

    fed_doc = doc.get("fed", {})
    _reject_unknown(fed_doc, _FED_KEYS, "fed")
    try:
        fed = FedConfig(
            n_clients=int(_number(fed_doc, "n_clients", None, "fed")),
            local_steps=int(_number(fed_doc, "local_steps", 10, "fed")),
            rounds=int(_number(fed_doc, "rounds", 100, "fed")),
            learning_rate=float(_number(fed_doc, "learning_rate", 0.01, "fed")),
            minibatch_size=int(_number(fed_doc, "minibatch_size", 32, "fed")),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"fed: {exc}") from None

    ch_doc = doc.get("channel", {})
    _reject_unknown(ch_doc, _CHANNEL_KEYS, "channel")
    try:
        channel = ChannelConfig(
            sigma=_expand_sigma(ch_doc.get("sigma", 1.0), fed.n_clients),
            noise_power=float(_number(ch_doc, "noise_power", 1.0, "channel")),
            bandwidth_hz=float(_number(ch_doc, "bandwidth_hz", 22e6, "channel")),
            payload_bits=float(_number(ch_doc, "payload_bits", 32e4, "channel")),
            p_max=float(_number(ch_doc, "p_max", 100.0, "channel")),
            p_avg=float(_number(ch_doc, "p_avg", 1.0, "channel")),
        )
    except ValueError as exc:
        raise ConfigError(f"channel: {exc}") from None

    ly_doc = doc.get("lyapunov", {})
    _reject_unknown(ly_doc, _LYAP_KEYS, "lyapunov")
    try:
        lyapunov = LyapunovConfig(
            channel=channel,
            n_clients=fed.n_clients,
            v_weight=float(_number(ly_doc, "v_weight", 1000.0, "lyapunov")),
            lambda_weight=float(_number(ly_doc, "lambda_weight", 10.0, "lyapunov")),
            q_min=float(_number(ly_doc, "q_min", 1e-6, "lyapunov")),
        )
    except ValueError as exc:
        raise ConfigError(f"lyapunov: {exc}") from None

    wl = dict(doc.get("workload", {}))
    _reject_unknown(wl, _WORKLOAD_KEYS, "workload")
    kind = wl.setdefault("kind", "logistic")
    if kind not in ("quadratic", "logistic", "mlp"):
        raise ConfigError("key 'kind' in workload must be quadratic, logistic, or mlp")

    uniform_m = doc.get("uniform_m")
    if policy == "uniform":
        if uniform_m is None:
            raise ConfigError("key 'uniform_m' is required for the uniform policy")
        if not isinstance(uniform_m, (int, float)) or not 0 < uniform_m <= fed.n_clients:
            raise ConfigError("key 'uniform_m' must be in (0, n_clients]")

    eval_every = doc.get("eval_every", 1)
    if not isinstance(eval_every, int) or eval_every < 1:
        raise ConfigError("key 'eval_every' must be a positive integer")
    window = doc.get("moving_average_window", 500)
    if not isinstance(window, int) or window < 1:
        raise ConfigError("key 'moving_average_window' must be a positive integer")

    return RunConfig(
        seed=seed,
        policy=policy,
        fed=fed,
        channel=channel,
        lyapunov=lyapunov,
        workload=wl,
        uniform_m=float(uniform_m) if uniform_m is not None else None,
        eval_every=eval_every,
        moving_average_window=window,
        raw=doc,
    )


def parse_config(path: str) -> RunConfig:
    """Load and validate a JSON run configuration."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    return parse_config_dict(doc)


def build_simulation(cfg: RunConfig) -> Simulation:
    """Materialize data, objectives, and initial parameters for a run."""
    wl = cfg.workload
    n = cfg.fed.n_clients
    data_rng = seeding.substream(cfg.seed, seeding.DATA)
    init_rng = seeding.substream(cfg.seed, seeding.INIT)
    accuracy_fn = None

    if wl["kind"] == "quadratic":
        dim = int(wl.get("dim", 10))
        per_client = int(wl.get("samples_per_client", 20))
        spread = 1.0 + 4.0 * float(wl.get("heterogeneity", 0.0))
        objectives = []
        for _ in range(n):
            center = spread * data_rng.standard_normal(dim)
            anchors = center + data_rng.standard_normal((per_client, dim))
            objectives.append(QuadraticObjective(anchors))
        x0 = np.zeros(dim)
    else:
        part = generate_synthetic(
            n_samples=int(wl.get("n_samples", 2000)),
            dim=int(wl.get("dim", 10)),
            n_classes=int(wl.get("n_classes", 5)),
            heterogeneity=float(wl.get("heterogeneity", 0.0)),
            n_clients=n,
            seed=data_rng,
        )
        n_classes = int(wl.get("n_classes", 5))
        if wl["kind"] == "logistic":
            objectives = [
                LogisticObjective(X, y, n_classes, l2=float(wl.get("l2", 0.0)))
                for X, y in part.clients
            ]
            x0 = np.zeros(objectives[0].dim)
        else:
            hidden = int(wl.get("hidden", 8))
            objectives = [TwoLayerNet(X, y, n_classes, hidden=hidden) for X, y in part.clients]
            x0 = objectives[0].init_params(init_rng)
        model = objectives[0]
        test_x, test_y = part.test_features, part.test_labels
        accuracy_fn = lambda x: float(np.mean(model.predict(x, test_x) == test_y))

    return Simulation(
        fed=cfg.fed,
        channel=cfg.channel,
        objectives=objectives,
        x0=x0,
        policy=cfg.policy,
        lyapunov=cfg.lyapunov,
        uniform_m=cfg.uniform_m,
        eval_every=cfg.eval_every,
        accuracy_fn=accuracy_fn,
    )
