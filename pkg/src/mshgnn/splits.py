"""Label-stratified fold assignment and train/test splitting."""

from __future__ import annotations

import numpy as np

from .rng import make_rng


def stratified_kfold(labels, k: int = 10, seed: int = 0):
    """Deal each class's shuffled indices round-robin into k folds.

    Returns a list of (train_indices, test_indices) pairs. Every index lands
    in exactly one test fold, and per-class test counts differ by at most one
    across folds.
    """
    y = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > y.size:
        raise ValueError(f"k={k} exceeds number of graphs ({y.size})")
    rng = make_rng(seed, stream=101)
    fold_of = np.empty(y.size, dtype=np.int64)
    cursor = 0
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(members.size)]
        for i, idx in enumerate(members):
            fold_of[idx] = (cursor + i) % k
        cursor += members.size  # rotate start so fold sizes stay balanced
    folds = []
    everything = np.arange(y.size)
    for f in range(k):
        test = everything[fold_of == f]
        train = everything[fold_of != f]
        folds.append((train, test))
    return folds


def stratified_split(labels, test_fraction: float, seed: int = 0):
    """Single stratified split; returns (train_indices, test_indices)."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    y = np.asarray(labels, dtype=np.int64)
    rng = make_rng(seed, stream=102)
    train, test = [], []
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(members.size)]
        n_test = max(1, int(round(members.size * test_fraction)))
        test.append(members[:n_test])
        train.append(members[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))
