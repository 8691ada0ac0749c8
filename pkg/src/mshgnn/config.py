"""Run configuration: defaults, config-file parsing, CLI merging.

Config files are flat ``key = value`` text with ``#`` comments. Every key
is mirrored as a CLI flag; values given on the command line win over the
file, which wins over the defaults below. Unknown keys are rejected, never
ignored.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


class UsageError(ValueError):
    """Bad flags, bad config keys, or bad value types."""


@dataclass
class RunConfig:
    task: str = ""
    model: str = "msh"
    layers: int = 3
    hidden: int = 64
    head: int = 16
    projection_dim: int = 16
    frequency_mode: str = "exponential"
    num_frequencies: int = 3
    frequencies: str = ""          # optional comma floats, overrides the schedule
    pooling: str = "attention"
    sigma: str = "softmax"
    lr: float = 0.001
    dropout: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    patience: int = 0
    seed: int = 0
    out: str = "runs"
    data: str = ""                 # TU dataset directory
    dataset_name: str = ""
    folds: int = 10
    graphs_per_class: int = 100
    n_min: int = 20
    n_max: int = 50
    rewire_fraction: float = 0.2
    num_modes: int = 10
    test_fraction: float = 0.2
    budget_msh: int = 7300
    budget_gcn: int = 6200
    budget_gat: int = 6500
    budget_tolerance: float = 0.15
    ablate_frequency_modes: str = "none,exponential"
    ablate_pooling_modes: str = "mean,attention"
    scaling_sizes: str = "128,256,512,1024"
    scaling_warmup: int = 2
    scaling_epochs: int = 5

    def frequency_list(self):
        if not self.frequencies:
            return None
        return [float(tok) for tok in self.frequencies.split(",") if tok.strip()]

    def scaling_size_list(self):
        return [int(tok) for tok in self.scaling_sizes.split(",") if tok.strip()]

    def ablation_axes(self):
        freq = [tok.strip() for tok in self.ablate_frequency_modes.split(",") if tok.strip()]
        pool = [tok.strip() for tok in self.ablate_pooling_modes.split(",") if tok.strip()]
        return freq, pool

    def echo(self) -> dict:
        """Config as written to reports; the output directory is location,
        not run identity, so it is excluded to keep reports byte-stable."""
        values = asdict(self)
        values.pop("out")
        return values


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return str(raw)
    except ValueError as exc:
        raise UsageError(f"config key '{key}' expects {kind}, got '{raw}'") from exc


def parse_config_file(path: str) -> dict:
    """Read ``key = value`` lines; '#' starts a comment; unknown keys fail."""
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle.read().splitlines(), start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise UsageError(f"{path}:{lineno}: expected 'key = value', got '{text}'")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in _FIELD_TYPES:
                raise UsageError(f"{path}:{lineno}: unknown config key '{key}'")
            values[key] = _coerce(key, raw)
    return values


def build_config(task: str, file_values: dict | None = None,
                 cli_values: dict | None = None) -> RunConfig:
    """Defaults, overlaid by file values, overlaid by explicit CLI values."""
    merged: dict[str, object] = {}
    for source in (file_values or {}), (cli_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _FIELD_TYPES:
                raise UsageError(f"unknown config key '{key}'")
            merged[key] = value
    merged["task"] = task
    cfg = RunConfig(**merged)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    from .layers import FREQUENCY_MODES
    from .models import MODEL_REGISTRY
    from .readout import POOLING_KINDS, SIGMA_MODES

    if cfg.model not in MODEL_REGISTRY:
        raise UsageError(f"unknown model '{cfg.model}' (choose from {sorted(MODEL_REGISTRY)})")
    if cfg.frequency_mode not in FREQUENCY_MODES:
        raise UsageError(f"unknown frequency mode '{cfg.frequency_mode}'")
    if cfg.pooling not in POOLING_KINDS:
        raise UsageError(f"unknown pooling '{cfg.pooling}'")
    if cfg.sigma not in SIGMA_MODES:
        raise UsageError(f"unknown sigma mode '{cfg.sigma}'")
    if not 0.0 <= cfg.dropout < 1.0:
        raise UsageError(f"dropout must be in [0, 1), got {cfg.dropout}")
    if cfg.epochs < 0 or cfg.layers < 1 or cfg.batch_size < 1 or cfg.folds < 2:
        raise UsageError("epochs >= 0, layers >= 1, batch_size >= 1, folds >= 2 required")
    if not 0.0 < cfg.test_fraction < 1.0:
        raise UsageError(f"test_fraction must be in (0, 1), got {cfg.test_fraction}")
