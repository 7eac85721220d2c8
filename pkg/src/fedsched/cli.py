"""Command-line entry points: run, sweep, estimate-m.

`run` executes one experiment and writes a metrics CSV, a manifest, and a
byte-identical snapshot of the input config. `sweep` repeats a run over a
list of values for one (dotted) config key. `estimate-m` Monte-Carlo
estimates the mean number of devices the scheduler selects per round, for
sizing the matched uniform baseline. Output bytes are fully determined by
(config, seed); only manifest timestamps vary.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import dataclass

from . import seeding
from .config import ConfigError, parse_config, parse_config_dict, build_simulation
from .scheduler import estimate_mean_selected
from .simulator import run as run_rounds

log = logging.getLogger("fedsched")

_CSV_COLUMNS = [
    "t",
    "train_loss",
    "test_accuracy",
    "round_comm_time_s",
    "cumulative_comm_time_s",
    "selected_count",
    "sum_inv_q",
    "forced_selection_flag",
]


@dataclass(frozen=True)
class ExperimentManifest:
    run_id: str
    config_path: str
    seed: int
    started_at: str
    finished_at: str
    metrics_csv: str
    config_snapshot: str
    code_version: str


def export_csv(records, path: str) -> None:
    """Write one row per round; floats keep full precision (repr)."""
    if not records:
        raise ValueError("no records to export")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.t,
                    repr(r.train_loss),
                    repr(r.test_accuracy),
                    repr(r.round_comm_time_s),
                    repr(r.cumulative_comm_time_s),
                    r.selected_count,
                    repr(r.sum_inv_q),
                    r.forced_selection,
                ]
            )


def _code_version() -> str:
    from . import __version__

    return __version__


def run_experiment(config_path: str, out_dir: str, seed_override: int | None = None) -> ExperimentManifest:
    """Run one experiment and persist metrics + manifest + config snapshot."""
    with open(config_path, "rb") as fh:
        config_bytes = fh.read()
    doc = json.loads(config_bytes)
    if seed_override is not None:
        doc["seed"] = seed_override
    cfg = parse_config_dict(doc)

    os.makedirs(out_dir, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise OSError(f"output directory not writable: {out_dir}")

    digest = hashlib.sha256(config_bytes + str(cfg.seed).encode()).hexdigest()[:10]
    run_id = f"run-{digest}-s{cfg.seed}"
    suffix = 1
    run_dir = os.path.join(out_dir, run_id)
    while os.path.exists(run_dir):
        suffix += 1
        run_dir = os.path.join(out_dir, f"{run_id}-{suffix}")
    os.makedirs(run_dir)

    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    log.info("run %s starting (policy=%s, rounds=%d)", run_id, cfg.policy, cfg.fed.rounds)
    sim = build_simulation(cfg)
    records = run_rounds(sim)
    finished = time.strftime("%Y-%m-%dT%H:%M:%S")

    metrics_path = os.path.join(run_dir, "metrics.csv")
    export_csv(records, metrics_path)
    snapshot_path = os.path.join(run_dir, "config.json")
    with open(snapshot_path, "wb") as fh:
        fh.write(config_bytes)

    manifest = ExperimentManifest(
        run_id=os.path.basename(run_dir),
        config_path=os.path.abspath(config_path),
        seed=cfg.seed,
        started_at=started,
        finished_at=finished,
        metrics_csv=metrics_path,
        config_snapshot=snapshot_path,
        code_version=_code_version(),
    )
    with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
        json.dump(manifest.__dict__, fh, indent=2)
        fh.write("\n")
    log.info("run %s finished: %s", manifest.run_id, metrics_path)
    return manifest


def _set_dotted(doc: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def cmd_run(args) -> int:
    manifest = run_experiment(args.config, args.out, args.seed)
    print(manifest.metrics_csv)
    return 0


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        base = json.load(fh)
    values = [_parse_value(v) for v in args.values.split(",")]
    os.makedirs(args.out, exist_ok=True)
    for value in values:
        doc = copy.deepcopy(base)
        _set_dotted(doc, args.param, value)
        tag = str(value).replace("/", "_")
        variant_path = os.path.join(args.out, f"config_{args.param}_{tag}.json")
        with open(variant_path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        manifest = run_experiment(variant_path, args.out, args.seed)
        print(f"{args.param}={value}: {manifest.metrics_csv}")
    return 0


def cmd_estimate_m(args) -> int:
    cfg = parse_config(args.config)
    rng = seeding.substream(cfg.seed, seeding.SELECTION)
    m = estimate_mean_selected(cfg.lyapunov, args.rounds, rng)
    print(repr(m))
    return 0


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("FEDSCHED_LOG", "WARNING").upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    parser = argparse.ArgumentParser(prog="fedsched")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run an experiment per parameter value")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True, help="dotted config key, e.g. lyapunov.v_weight")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_est = sub.add_parser("estimate-m", help="Monte-Carlo mean selected devices per round")
    p_est.add_argument("--config", required=True)
    p_est.add_argument("--rounds", type=int, default=1000)
    p_est.set_defaults(func=cmd_estimate_m)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
