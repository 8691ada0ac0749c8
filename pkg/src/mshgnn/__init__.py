"""Multi-scale harmonic message passing on graphs.

A self-contained stack: float64 tensors with tape-based reverse-mode
differentiation, graph containers and TU-format IO, the harmonic
message passing layer with frequency-aware readout, GCN/GAT baselines,
a spectral synthetic benchmark, an expressiveness test harness, and a
training CLI.
"""

from .graphs import Graph, GraphBatch, GraphDataError, batch, degree_one_hot, \
    from_undirected_edges, permute_nodes
from .layers import HarmonicSpec, MshLayerParams
from .models import GatClassifier, GcnClassifier, MshGnnClassifier, TrainingDiverged
from .optim import ParamStore, adam_step, glorot_init
from .splits import stratified_kfold, stratified_split
from .synthetic import SyntheticSpec, generate_dataset
from .tensor import Tape, Tensor, backward
from .tu_io import load_tu_dataset, write_tu_dataset

__version__ = "0.1.0"

__all__ = [
    "Graph", "GraphBatch", "GraphDataError", "batch", "degree_one_hot",
    "from_undirected_edges", "permute_nodes", "HarmonicSpec", "MshLayerParams",
    "GatClassifier", "GcnClassifier", "MshGnnClassifier", "TrainingDiverged",
    "ParamStore", "adam_step", "glorot_init", "stratified_kfold", "stratified_split",
    "SyntheticSpec", "generate_dataset", "Tape", "Tensor", "backward",
    "load_tu_dataset", "write_tu_dataset", "__version__",
]
