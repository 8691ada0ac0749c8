"""Task implementations behind the CLI subcommands.

Each run function takes a RunConfig, writes its outputs under cfg.out, and
returns the report payload. Wall-clock measurements never enter
report.json; they go to the timing.json sidecar so reports stay
byte-reproducible.
"""

from __future__ import annotations

import json
import os
import time

import numpy as np
from threadpoolctl import threadpool_limits

from . import tensor as T
from .baselines import match_param_budget
from .config import RunConfig
from .expressiveness import run_suite
from .graphs import GraphDataError, batch, degree_one_hot
from .models import MODEL_REGISTRY, MshGnnClassifier
from .optim import adam_step
from .reports import fold_summary, write_csv, write_json, write_report, write_timing
from .rng import make_rng
from .splits import stratified_kfold, stratified_split
from .synthetic import SyntheticSpec, generate_dataset, make_ring
from .tensor import Tape
from .tu_io import load_tu_dataset


def build_estimator(cfg: RunConfig, model_name: str, num_classes: int, seed: int,
                    hidden: int | None = None, epochs: int | None = None,
                    frequency_mode: str | None = None, pooling: str | None = None):
    common = dict(
        layers=cfg.layers,
        hidden=cfg.hidden if hidden is None else hidden,
        head=cfg.head,
        lr=cfg.lr,
        dropout=cfg.dropout,
        epochs=cfg.epochs if epochs is None else epochs,
        batch_size=cfg.batch_size,
        patience=cfg.patience,
        seed=seed,
        num_classes=num_classes,
    )
    if model_name == "msh":
        return MshGnnClassifier(
            projection_dim=cfg.projection_dim,
            frequency_mode=cfg.frequency_mode if frequency_mode is None else frequency_mode,
            num_frequencies=cfg.num_frequencies,
            frequencies=cfg.frequency_list(),
            pooling=cfg.pooling if pooling is None else pooling,
            sigma=cfg.sigma,
            **common,
        )
    return MODEL_REGISTRY[model_name](**common)


def train_eval(estimator, graphs, labels, train_idx, test_idx):
    """Fit on the train slice, score the test slice, report both curves.

    Returns (report_dict, fitted_estimator, wall_seconds).
    """
    start = time.perf_counter()
    train_graphs = [graphs[i] for i in train_idx]
    estimator.fit(train_graphs, labels[train_idx])
    test_graphs = [graphs[i] for i in test_idx]
    accuracy = estimator.score(test_graphs, labels[test_idx])
    seconds = time.perf_counter() - start
    report = {
        "parameter_count": estimator.param_count(),
        "train_losses": list(estimator.train_losses_),
        "train_accuracies": list(estimator.train_accuracies_),
        "test_accuracy": accuracy,
        "num_train": int(len(train_idx)),
        "num_test": int(len(test_idx)),
    }
    return report, estimator, seconds


def _synthetic_dataset(cfg: RunConfig):
    spec = SyntheticSpec(
        n_min=cfg.n_min, n_max=cfg.n_max, graphs_per_class=cfg.graphs_per_class,
        rewire_fraction=cfg.rewire_fraction, num_modes=cfg.num_modes, seed=cfg.seed)
    graphs = generate_dataset(spec)
    labels = np.array([g.graph_label for g in graphs], dtype=np.int64)
    return spec, graphs, labels


def _budget_width(cfg: RunConfig, model_name: str, num_classes: int,
                  feature_dim: int, target: int):
    def count_for_width(width):
        probe = build_estimator(cfg, model_name, num_classes, seed=0, hidden=width, epochs=0)
        probe.init_params(feature_dim, num_classes)
        return probe.param_count()

    return match_param_budget(count_for_width, target, cfg.budget_tolerance)


def run_synthetic(cfg: RunConfig) -> dict:
    """Train all three models with matched parameter budgets on one dataset."""
    spec, graphs, labels = _synthetic_dataset(cfg)
    train_idx, test_idx = stratified_split(labels, cfg.test_fraction, cfg.seed)
    num_classes = spec.num_classes
    feature_dim = graphs[0].feature_dim()

    budgets = {"msh": cfg.budget_msh, "gcn": cfg.budget_gcn, "gat": cfg.budget_gat}
    models_payload, timing = {}, {}
    for name, target in budgets.items():
        width, count = _budget_width(cfg, name, num_classes, feature_dim, target)
        estimator = build_estimator(cfg, name, num_classes, cfg.seed, hidden=width)
        report, fitted, train_seconds = train_eval(estimator, graphs, labels,
                                                   train_idx, test_idx)
        infer_start = time.perf_counter()
        fitted.predict([graphs[i] for i in test_idx])
        infer_seconds = time.perf_counter() - infer_start
        report.update({
            "model": name,
            "seed": cfg.seed,
            "hidden_width": width,
            "budget_target": target,
            "budget_parameter_count": count,
            "test_accuracy_mean": report["test_accuracy"],
            "test_accuracy_std": 0.0,
        })
        models_payload[name] = report
        timing[name] = {"train_seconds": train_seconds, "inference_seconds": infer_seconds}
        os.makedirs(cfg.out, exist_ok=True)
        fitted.store_.save(os.path.join(cfg.out, f"model_{name}.npz"))

    payload = {
        "task": "synthetic",
        "config": cfg.echo(),
        "seed": cfg.seed,
        "num_graphs": len(graphs),
        "num_classes": num_classes,
        "models": models_payload,
    }
    write_report(cfg.out, payload)
    write_timing(cfg.out, {"task": "synthetic", "models": timing})
    return payload


def run_tu_cv(cfg: RunConfig) -> dict:
    """Stratified k-fold cross-validation on a TU-format dataset."""
    if not cfg.data or not cfg.dataset_name:
        raise GraphDataError("tu task requires --data DIR and --dataset-name NAME")
    graphs = load_tu_dataset(cfg.data, cfg.dataset_name)
    labels = np.array([g.graph_label for g in graphs], dtype=np.int64)
    num_classes = int(labels.max()) + 1
    majority = float(np.bincount(labels).max() / labels.size)

    folds = stratified_kfold(labels, cfg.folds, cfg.seed)
    fold_reports, timing = [], []
    for fold_index, (train_idx, test_idx) in enumerate(folds):
        estimator = build_estimator(cfg, cfg.model, num_classes, cfg.seed + fold_index)
        report, _, seconds = train_eval(estimator, graphs, labels, train_idx, test_idx)
        report["fold"] = fold_index
        fold_reports.append(report)
        timing.append({"fold": fold_index, "train_seconds": seconds})

    payload = {
        "task": "tu",
        "config": cfg.echo(),
        "seed": cfg.seed,
        "model": cfg.model,
        "dataset": cfg.dataset_name,
        "num_graphs": len(graphs),
        "num_classes": num_classes,
        "majority_class_accuracy": majority,
        "parameter_count": fold_reports[0]["parameter_count"],
        **fold_summary(fold_reports),
    }
    write_report(cfg.out, payload)
    write_timing(cfg.out, {"task": "tu", "folds": timing})
    return payload


def run_ablation(cfg: RunConfig) -> dict:
    """Cross product of frequency modes and pooling modes on one dataset."""
    spec, graphs, labels = _synthetic_dataset(cfg)
    train_idx, test_idx = stratified_split(labels, cfg.test_fraction, cfg.seed)
    freq_modes, pool_modes = cfg.ablation_axes()

    rows, row_dicts, timing = [], [], {}
    for fmode in freq_modes:
        for pool in pool_modes:
            estimator = build_estimator(cfg, "msh", spec.num_classes, cfg.seed,
                                        frequency_mode=fmode, pooling=pool)
            report, _, seconds = train_eval(estimator, graphs, labels, train_idx, test_idx)
            echo = dict(cfg.echo(), frequency_mode=fmode, pooling=pool)
            row = {
                "frequency_mode": fmode,
                "pooling": pool,
                "test_accuracy": report["test_accuracy"],
                "parameter_count": report["parameter_count"],
                "config": json.dumps(echo, sort_keys=True),
            }
            rows.append([row["frequency_mode"], row["pooling"], row["test_accuracy"],
                         row["parameter_count"], row["config"]])
            row_dicts.append(row)
            timing[f"{fmode}/{pool}"] = seconds

    write_csv(os.path.join(cfg.out, "ablation.csv"),
              ["frequency_mode", "pooling", "test_accuracy", "parameter_count", "config"],
              rows)
    payload = {
        "task": "ablate",
        "config": cfg.echo(),
        "seed": cfg.seed,
        "cells": row_dicts,
    }
    write_report(cfg.out, payload)
    write_timing(cfg.out, {"task": "ablate", "cells": timing})
    return payload


def scaling_probe(cfg: RunConfig, sizes=None, projection_dim=None, num_frequencies=None):
    """Median per-epoch seconds of forward+backward+update on rings.

    Rings are featurized with degree one-hots, so the probe isolates the
    message passing cost from eigendecomposition entirely. Sizes are timed
    interleaved (one epoch of every size per round) under a single BLAS
    thread, so machine-state drift and pool effects hit all sizes alike.
    """
    sizes = sizes if sizes is not None else cfg.scaling_size_list()
    setups = []
    for n in sizes:
        ring = degree_one_hot(make_ring(n), 2)
        estimator = MshGnnClassifier(
            layers=cfg.layers, hidden=cfg.hidden, head=cfg.head,
            projection_dim=cfg.projection_dim if projection_dim is None else projection_dim,
            frequency_mode=cfg.frequency_mode,
            num_frequencies=cfg.num_frequencies if num_frequencies is None else num_frequencies,
            pooling=cfg.pooling, sigma=cfg.sigma, dropout=cfg.dropout,
            seed=cfg.seed, num_classes=2)
        estimator.init_params(ring.feature_dim(), 2)
        setups.append({
            "num_nodes": n,
            "num_edges": ring.num_edges,
            "chunk": batch([ring]),
            "estimator": estimator,
            "rng": make_rng(cfg.seed, stream=9),
            "times": [],
        })

    targets = np.array([0], dtype=np.int64)
    with threadpool_limits(limits=1):
        for epoch in range(cfg.scaling_warmup + cfg.scaling_epochs):
            for setup in setups:
                estimator = setup["estimator"]
                # timed region is forward+backward; the optimizer update is
                # size-independent and runs outside the clock
                start = time.perf_counter()
                with Tape() as tape:
                    logits = estimator._logits(setup["chunk"], training=True,
                                               rng=setup["rng"])
                    loss = T.cross_entropy(logits, targets)
                    T.backward(loss, tape)
                elapsed = time.perf_counter() - start
                estimator.store_.fill_missing_grads()
                adam_step(estimator.store_, lr=cfg.lr)
                if epoch >= cfg.scaling_warmup:
                    setup["times"].append(elapsed)

    measurements = [{
        "num_nodes": setup["num_nodes"],
        "num_edges": setup["num_edges"],
        "seconds_per_epoch": float(np.median(setup["times"])),
    } for setup in setups]
    # growth factor per doubling: median over rounds of the within-round
    # ratio, so slow drift of the machine cancels out of the estimate.
    # Rounds inflated by external preemption (total time far above the
    # median round) are discarded before taking that median.
    totals = np.sum([setup["times"] for setup in setups], axis=0)
    keep = totals <= 1.35 * np.median(totals)
    if not keep.any():
        keep[:] = True
    ratios = []
    for i in range(1, len(setups)):
        per_round = (np.array(setups[i]["times"]) / np.array(setups[i - 1]["times"]))[keep]
        ratios.append(float(np.median(per_round)))
    return measurements, ratios


def run_scaling(cfg: RunConfig) -> dict:
    measurements, ratios = scaling_probe(cfg)
    payload = {
        "task": "scaling",
        "config": cfg.echo(),
        "seed": cfg.seed,
        "sizes": [m["num_nodes"] for m in measurements],
        "edge_counts": [m["num_edges"] for m in measurements],
    }
    write_report(cfg.out, payload)
    write_timing(cfg.out, {"task": "scaling", "measurements": measurements,
                           "doubling_ratios": ratios})
    return payload


def run_embed_dump(cfg: RunConfig) -> dict:
    """Train on the full dataset, then dump one embedding row per graph."""
    if cfg.data and cfg.dataset_name:
        graphs = load_tu_dataset(cfg.data, cfg.dataset_name)
    else:
        _, graphs, _ = _synthetic_dataset(cfg)
    labels = np.array([g.graph_label for g in graphs], dtype=np.int64)
    num_classes = int(labels.max()) + 1

    start = time.perf_counter()
    estimator = build_estimator(cfg, cfg.model, num_classes, cfg.seed)
    estimator.fit(graphs, labels)
    embeddings = estimator.transform(graphs)
    seconds = time.perf_counter() - start
    os.makedirs(cfg.out, exist_ok=True)
    estimator.store_.save(os.path.join(cfg.out, f"model_{cfg.model}.npz"))

    width = embeddings.shape[1]
    header = ["graph_id", "label"] + [f"e{i}" for i in range(width)]
    rows = [[gid, int(labels[gid])] + [f"{value:.17g}" for value in embeddings[gid]]
            for gid in range(len(graphs))]
    write_csv(os.path.join(cfg.out, "embeddings.csv"), header, rows)

    payload = {
        "task": "embed-dump",
        "config": cfg.echo(),
        "seed": cfg.seed,
        "model": cfg.model,
        "num_graphs": len(graphs),
        "embedding_dim": int(width),
        "parameter_count": estimator.param_count(),
    }
    write_report(cfg.out, payload)
    write_timing(cfg.out, {"task": "embed-dump", "train_seconds": seconds})
    return payload


def run_expressiveness(cfg: RunConfig) -> dict:
    suite = run_suite(num_seeds=20, kernel_trials=1000, seed=cfg.seed)
    payload = {
        "task": "expressiveness",
        "config": cfg.echo(),
        "seed": cfg.seed,
        "suite": suite,
    }
    write_json(os.path.join(cfg.out, "expressiveness.json"), suite)
    write_report(cfg.out, payload)
    return payload


TASKS = {
    "synthetic": run_synthetic,
    "tu": run_tu_cv,
    "ablate": run_ablation,
    "expressiveness": run_expressiveness,
    "scaling": run_scaling,
    "embed-dump": run_embed_dump,
}
