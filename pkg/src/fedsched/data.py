"""Synthetic dataset generation and client partitioning.

Clients receive disjoint slices of a labeled dataset. The heterogeneity
knob interpolates per-client label proportions between the global uniform
mix (0.0) and a single dominant class per client (1.0). A 10% holdout is
reserved for test metrics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DatasetPartition:
    """Per-client (features, labels) plus a shared test split."""

    clients: list[tuple[np.ndarray, np.ndarray]]
    test_features: np.ndarray
    test_labels: np.ndarray
    mode: str

    @property
    def n_clients(self) -> int:
        return len(self.clients)

    def client_sizes(self) -> list[int]:
        return [c[1].shape[0] for c in self.clients]


def _class_means(n_classes: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    means = rng.standard_normal((n_classes, dim))
    norms = np.linalg.norm(means, axis=1, keepdims=True)
    return 3.0 * means / np.maximum(norms, 1e-12)


def generate_synthetic(
    n_samples: int,
    dim: int,
    n_classes: int,
    heterogeneity: float,
    n_clients: int,
    seed: int | np.random.Generator,
    test_fraction: float = 0.1,
) -> DatasetPartition:
    """Gaussian-blob classification data split across clients.

    heterogeneity=0 gives every client the uniform label mix;
    heterogeneity=1 concentrates each client on one dominant class.
    """
    if not 0.0 <= heterogeneity <= 1.0:
        raise ValueError("heterogeneity must be in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n_test = int(round(test_fraction * n_samples))
    n_train = n_samples - n_test
    if n_train < n_clients:
        raise ValueError(f"need at least {n_clients} training samples, got {n_train}")

    means = _class_means(n_classes, dim, rng)

    def make(count: int, labels: np.ndarray) -> np.ndarray:
        return means[labels] + rng.standard_normal((count, dim))

    test_labels = rng.integers(0, n_classes, size=n_test)
    test_features = make(n_test, test_labels)

    # Balanced global pool of training labels.
    pool_labels = np.arange(n_train) % n_classes
    rng.shuffle(pool_labels)
    pool_features = make(n_train, pool_labels)
    remaining = [list(np.flatnonzero(pool_labels == c)) for c in range(n_classes)]

    base = n_train // n_clients
    sizes = [base + (1 if i < n_train % n_clients else 0) for i in range(n_clients)]
    uniform = np.full(n_classes, 1.0 / n_classes)
    clients: list[tuple[np.ndarray, np.ndarray]] = []
    taken: list[list[int]] = [[] for _ in range(n_clients)]
    for i in range(n_clients):
        dominant = np.zeros(n_classes)
        dominant[i % n_classes] = 1.0
        props = (1.0 - heterogeneity) * uniform + heterogeneity * dominant
        want = np.floor(props * sizes[i]).astype(int)
        # Distribute rounding leftovers to the largest-proportion classes.
        for c in np.argsort(-props):
            if want.sum() >= sizes[i]:
                break
            want[c] += 1
        for c in range(n_classes):
            grab = min(want[c], len(remaining[c]))
            taken[i].extend(remaining[c][:grab])
            del remaining[c][:grab]
    # Backfill clients whose preferred classes ran dry.
    leftovers = [j for pool in remaining for j in pool]
    for i in range(n_clients):
        short = sizes[i] - len(taken[i])
        if short > 0:
            taken[i].extend(leftovers[:short])
            del leftovers[:short]
    for i in range(n_clients):
        idx = np.array(sorted(taken[i]), dtype=int)
        clients.append((pool_features[idx], pool_labels[idx]))

    mode = "iid" if heterogeneity == 0.0 else "label_skew"
    return DatasetPartition(
        clients=clients, test_features=test_features, test_labels=test_labels, mode=mode
    )


class DatasetError(ValueError):
    """Malformed or unusable input file."""


def load_csv_dataset(path: str, schema: dict) -> DatasetPartition:
    """Partition a labeled CSV across clients.

    Expected file layout: header row with feature columns, a `label`
    column, and (for by-source mode) a `source` column. schema keys:
    mode ("iid" | "by_label_shard" | "by_source"), n_clients (iid/shard),
    label_column, source_column, test_fraction, seed.
    """
    mode = schema.get("mode", "iid")
    if mode not in ("iid", "by_label_shard", "by_source"):
        raise DatasetError(f"unknown partition mode {mode!r}")
    label_col = schema.get("label_column", "label")
    source_col = schema.get("source_column", "source")
    test_fraction = schema.get("test_fraction", 0.0)
    rng = np.random.default_rng(schema.get("seed", 0))

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DatasetError(f"{path}: empty file")
        if label_col not in reader.fieldnames:
            raise DatasetError(f"{path}: missing {label_col!r} column")
        feat_cols = [c for c in reader.fieldnames if c not in (label_col, source_col)]
        rows, labels, sources = [], [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append([float(row[c]) for c in feat_cols])
                labels.append(int(row[label_col]))
            except (TypeError, ValueError) as exc:
                raise DatasetError(f"{path}: malformed row at line {lineno}: {exc}") from None
            sources.append(row.get(source_col))
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    features = np.array(rows, dtype=float)
    labels_arr = np.array(labels, dtype=int)
    n = features.shape[0]

    n_test = int(round(test_fraction * n))
    perm = rng.permutation(n)
    test_idx, train_idx = perm[:n_test], perm[n_test:]

    def split(indices: list[np.ndarray]) -> list[tuple[np.ndarray, np.ndarray]]:
        out = []
        for idx in indices:
            if idx.shape[0] == 0:
                raise DatasetError("partition leaves a client with no samples")
            out.append((features[idx], labels_arr[idx]))
        return out

    if mode == "by_source":
        if any(s is None for s in sources):
            raise DatasetError(f"{path}: by-source mode needs a {source_col!r} column")
        train_sources = [sources[i] for i in train_idx]
        uniq = sorted(set(train_sources))
        groups = [train_idx[[j for j, s in enumerate(train_sources) if s == u]] for u in uniq]
    else:
        n_clients = schema.get("n_clients")
        if not n_clients or n_clients < 1:
            raise DatasetError("schema needs a positive n_clients for this mode")
        if train_idx.shape[0] < n_clients:
            raise DatasetError("fewer training rows than clients")
        if mode == "by_label_shard":
            train_idx = train_idx[np.argsort(labels_arr[train_idx], kind="stable")]
        groups = [np.sort(g) for g in np.array_split(train_idx, n_clients)]

    return DatasetPartition(
        clients=split(groups),
        test_features=features[test_idx],
        test_labels=labels_arr[test_idx],
        mode=mode,
    )
