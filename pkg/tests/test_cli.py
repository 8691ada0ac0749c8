import json
import os

import numpy as np
import pytest

from mshgnn.cli import main
from mshgnn.config import build_config
from mshgnn.runner import scaling_probe
from mshgnn.synthetic import SyntheticSpec, generate_dataset
from mshgnn.tu_io import write_tu_dataset

TINY = ["--graphs-per-class", "2", "--epochs", "2", "--n-min", "12", "--n-max", "14",
        "--hidden", "6", "--head", "4", "--projection-dim", "3", "--batch-size", "16",
        "--num-frequencies", "2"]


def read_json(path):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def read_bytes(path):
    with open(path, "rb") as handle:
        return handle.read()


class TestExitCodes:
    def test_usage_error_unknown_flag(self, capsys):
        assert main(["synthetic", "--no-such-flag", "1"]) == 1

    def test_usage_error_unknown_task(self):
        assert main(["fly"]) == 1

    def test_usage_error_bad_config_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("bogus = 1\n")
        assert main(["synthetic", "--config", str(cfg)]) == 1

    def test_usage_error_missing_config_file(self, tmp_path):
        assert main(["synthetic", "--config", str(tmp_path / "none.cfg")]) == 1

    def test_data_error_missing_tu_dataset(self, tmp_path):
        code = main(["tu", "--data", str(tmp_path), "--dataset-name", "NOPE",
                     "--out", str(tmp_path / "out")])
        assert code == 2

    def test_success_on_tiny_synthetic(self, tmp_path):
        code = main(["synthetic", *TINY, "--out", str(tmp_path / "out"), "--seed", "3"])
        assert code == 0
        assert os.path.isfile(tmp_path / "out" / "report.json")
        assert os.path.isfile(tmp_path / "out" / "timing.json")

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_numeric_failure_exit_code(self, tmp_path):
        code = main(["embed-dump", *TINY, "--lr", "1e30", "--epochs", "40",
                     "--out", str(tmp_path / "out")])
        assert code == 3


class TestReports:
    def test_synthetic_report_shape(self, tmp_path):
        out = str(tmp_path / "out")
        assert main(["synthetic", *TINY, "--out", out]) == 0
        report = read_json(os.path.join(out, "report.json"))
        assert report["task"] == "synthetic"
        assert set(report["models"]) == {"msh", "gcn", "gat"}
        for model_report in report["models"].values():
            assert 0.0 <= model_report["test_accuracy"] <= 1.0
            assert len(model_report["train_losses"]) == 2
            assert model_report["parameter_count"] > 0
        # wall time never enters report.json
        assert "seconds" not in json.dumps(report)

    def test_budget_within_tolerance(self, tmp_path):
        out = str(tmp_path / "out")
        assert main(["synthetic", *TINY, "--out", out]) == 0
        report = read_json(os.path.join(out, "report.json"))
        for name, target in (("msh", 7300), ("gcn", 6200), ("gat", 6500)):
            got = report["models"][name]["budget_parameter_count"]
            assert abs(got - target) <= 0.15 * target

    def test_cv_mean_std_recomputable(self, tmp_path):
        graphs = generate_dataset(SyntheticSpec(n_min=12, n_max=13, graphs_per_class=2, seed=0))
        data_dir = str(tmp_path / "tu")
        write_tu_dataset(graphs, data_dir, "SYN")
        out = str(tmp_path / "out")
        code = main(["tu", "--data", data_dir, "--dataset-name", "SYN", "--folds", "2",
                     "--epochs", "2", "--hidden", "6", "--head", "4",
                     "--projection-dim", "3", "--out", out])
        assert code == 0
        report = read_json(os.path.join(out, "report.json"))
        accs = [fold["test_accuracy"] for fold in report["folds"]]
        assert abs(report["test_accuracy_mean"] - np.mean(accs)) < 1e-12
        assert abs(report["test_accuracy_std"] - np.std(accs)) < 1e-12
        assert report["majority_class_accuracy"] >= 1.0 / 30


class TestDeterminism:
    def test_synthetic_report_byte_identical(self, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["synthetic", *TINY, "--seed", "11", "--out", out1]) == 0
        assert main(["synthetic", *TINY, "--seed", "11", "--out", out2]) == 0
        assert read_bytes(os.path.join(out1, "report.json")) == \
            read_bytes(os.path.join(out2, "report.json"))

    def test_embed_dump_byte_identical(self, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        args = ["embed-dump", *TINY, "--seed", "5"]
        assert main([*args, "--out", out1]) == 0
        assert main([*args, "--out", out2]) == 0
        assert read_bytes(os.path.join(out1, "embeddings.csv")) == \
            read_bytes(os.path.join(out2, "embeddings.csv"))
        assert read_bytes(os.path.join(out1, "report.json")) == \
            read_bytes(os.path.join(out2, "report.json"))


class TestEmbedDump:
    def test_csv_format(self, tmp_path):
        out = str(tmp_path / "out")
        assert main(["embed-dump", *TINY, "--out", out]) == 0
        with open(os.path.join(out, "embeddings.csv"), "r", encoding="utf-8") as handle:
            lines = handle.read().strip().splitlines()
        assert lines[0] == "graph_id,label," + ",".join(f"e{i}" for i in range(6))
        assert len(lines) == 1 + 60  # 30 classes x 2 graphs
        first = lines[1].split(",")
        assert first[0] == "0"
        assert 0 <= int(first[1]) < 30


class TestAblation:
    def test_two_by_two_grid(self, tmp_path):
        out = str(tmp_path / "out")
        code = main(["ablate", *TINY, "--out", out,
                     "--ablate-frequency-modes", "none,exponential",
                     "--ablate-pooling-modes", "mean,attention"])
        assert code == 0
        with open(os.path.join(out, "ablation.csv"), "r", encoding="utf-8") as handle:
            lines = handle.read().strip().splitlines()
        assert lines[0].startswith("frequency_mode,pooling,test_accuracy")
        assert len(lines) == 5  # header + 4 cells
        report = read_json(os.path.join(out, "report.json"))
        assert len(report["cells"]) == 4
        for cell in report["cells"]:
            echo = json.loads(cell["config"])
            assert echo["frequency_mode"] == cell["frequency_mode"]
            assert echo["pooling"] == cell["pooling"]


class TestScalingProbe:
    def test_times_increase_with_frequencies_and_projection(self):
        cfg = build_config("scaling", cli_values={
            "scaling_sizes": "256", "scaling_epochs": 3, "scaling_warmup": 1,
            "hidden": 16, "head": 8})
        small_k, _ = scaling_probe(cfg, num_frequencies=2)
        large_k, _ = scaling_probe(cfg, num_frequencies=12)
        assert large_k[0]["seconds_per_epoch"] > small_k[0]["seconds_per_epoch"]
        small_f, _ = scaling_probe(cfg, projection_dim=4)
        large_f, _ = scaling_probe(cfg, projection_dim=48)
        assert large_f[0]["seconds_per_epoch"] > small_f[0]["seconds_per_epoch"]

    def test_report_carries_sizes_not_seconds(self, tmp_path):
        out = str(tmp_path / "out")
        code = main(["scaling", "--scaling-sizes", "64,128", "--scaling-epochs", "2",
                     "--scaling-warmup", "1", "--hidden", "8", "--head", "4",
                     "--projection-dim", "4", "--out", out])
        assert code == 0
        report = read_json(os.path.join(out, "report.json"))
        assert report["sizes"] == [64, 128]
        assert report["edge_counts"] == [128, 256]
        assert "seconds" not in json.dumps(report)
        timing = read_json(os.path.join(out, "timing.json"))
        assert len(timing["measurements"]) == 2
        assert len(timing["doubling_ratios"]) == 1


class TestExpressivenessCommand:
    def test_writes_both_outputs(self, tmp_path):
        out = str(tmp_path / "out")
        assert main(["expressiveness", "--out", out]) == 0
        suite = read_json(os.path.join(out, "expressiveness.json"))
        assert suite["wl_pair_equivalent"] is True
        assert suite["upper_bound_holds"] is True
        assert suite["star_pair_msh_separates"] is True
        assert suite["star_pair_gat_collapses"] is True
        assert all(v < 1e-9 for v in suite["kernel_identity_max_error"].values())
        report = read_json(os.path.join(out, "report.json"))
        assert report["task"] == "expressiveness"
