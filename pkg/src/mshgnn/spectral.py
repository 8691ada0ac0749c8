"""Unnormalized graph Laplacian and a cyclic Jacobi eigensolver.

The solver uses plane rotations in a fixed (p, q) sweep order with a
deterministic sign convention, so spectra and eigenvector bases are
reproducible bit for bit on a given platform. Cycle and path graphs have
closed-form spectra, which the test suite uses as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, GraphDataError


class ConvergenceError(RuntimeError):
    """The rotation sweep budget ran out before the off-diagonal vanished."""


MAX_NODES = 512


def laplacian(graph: Graph) -> np.ndarray:
    """L = D - A for a symmetric directed edge set (A binary)."""
    n = graph.num_nodes
    adjacency = np.zeros((n, n))
    adjacency[graph.src, graph.dst] = 1.0
    if not np.array_equal(adjacency, adjacency.T):
        raise GraphDataError("laplacian requires a symmetric directed edge set")
    return np.diag(adjacency.sum(axis=1)) - adjacency


@dataclass
class EigenResult:
    values: np.ndarray   # ascending
    vectors: np.ndarray  # orthonormal columns, column j pairs with values[j]


def eigendecompose(matrix: np.ndarray, max_sweeps: int = 50) -> EigenResult:
    """Full symmetric eigendecomposition by cyclic Jacobi rotations."""
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if n > MAX_NODES:
        raise ValueError(f"matrix extent {n} exceeds the supported maximum {MAX_NODES}")
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("matrix must be symmetric")

    vectors = np.eye(n)
    scale = max(1.0, np.abs(a).max())
    for sweep in range(max_sweeps + 1):
        off = np.abs(np.triu(a, k=1)).max() if n > 1 else 0.0
        if off <= 1e-13 * scale:
            break
        if sweep == max_sweeps:
            raise ConvergenceError(f"no convergence within {max_sweeps} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-15 * scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:  # rotation angle underflows; treat as diagonal
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 \
                        else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vec_p, vec_q = vectors[:, p].copy(), vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    for j in range(n):
        column = vectors[:, j]
        lead = np.flatnonzero(np.abs(column) > 1e-9)
        if lead.size and column[lead[0]] < 0:
            vectors[:, j] = -column
    return EigenResult(values=values, vectors=vectors)


def cycle_spectrum(n: int) -> np.ndarray:
    """Closed-form Laplacian eigenvalues of the n-cycle, sorted ascending."""
    return np.sort(2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(n) / n))


def path_spectrum(n: int) -> np.ndarray:
    """Closed-form Laplacian eigenvalues of the n-path, sorted ascending."""
    return np.sort(2.0 - 2.0 * np.cos(np.pi * np.arange(n) / n))
