"""Stable JSON/CSV writers for run outputs.

report.json must be byte-identical across repeated runs with the same
config and seed, so everything volatile (wall-clock measurements) goes to
the timing.json sidecar instead.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(_jsonable(payload), sort_keys=True, indent=2))
        handle.write("\n")


def write_report(out_dir: str, payload: dict) -> str:
    path = os.path.join(out_dir, "report.json")
    write_json(path, payload)
    return path


def write_timing(out_dir: str, payload: dict) -> str:
    path = os.path.join(out_dir, "timing.json")
    write_json(path, payload)
    return path


def write_csv(path: str, header, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def fold_summary(fold_results) -> dict:
    """Aggregate per-fold accuracies; mean/std stay recomputable from parts."""
    accs = [fr["test_accuracy"] for fr in fold_results]
    return {
        "folds": fold_results,
        "test_accuracy_mean": float(np.mean(accs)),
        "test_accuracy_std": float(np.std(accs)),
    }
