import json
import subprocess
import sys

import numpy as np
import pytest

from vlscene.cli import main
from vlscene.vleb import read_bundle


@pytest.fixture()
def dataset_dir(tmp_path):
    out = tmp_path / "ds"
    code = main([
        "gen-scenes", "--classes", "6", "--dim", "16", "--scenes", "24",
        "--objects", "5", "--clutter", "0.4", "--noise", "0.2",
        "--novel-fraction", "0.15", "--seed", "11", "--out", str(out),
    ])
    assert code == 0
    return out


class TestGenScenes:
    def test_writes_directory(self, dataset_dir):
        assert (dataset_dir / "manifest.json").exists()
        assert (dataset_dir / "prototypes.vleb").exists()
        assert (dataset_dir / "prompts.vleb").exists()
        assert len(list((dataset_dir / "scenes").glob("*.vleb"))) == 24

    def test_manifest_contents(self, dataset_dir):
        manifest = json.loads((dataset_dir / "manifest.json").read_text())
        assert manifest["config"]["classes"] == 6
        assert len(manifest["scenes"]) == 24

    def test_invalid_config_is_data_error(self, tmp_path):
        code = main(["gen-scenes", "--classes", "1", "--out", str(tmp_path / "x")])
        assert code == 2


class TestReason:
    def test_reason_scene_file(self, dataset_dir, tmp_path, capsys):
        manifest = json.loads((dataset_dir / "manifest.json").read_text())
        scene_file = dataset_dir / manifest["scenes"][0]["file"]
        out = tmp_path / "result.json"
        code = main([
            "reason", "--scene", str(scene_file),
            "--prompts", str(dataset_dir / "prompts.vleb"), "--out", str(out),
        ])
        assert code == 0
        result = json.loads(out.read_text())
        assert result["predicted_label"] in manifest["classes"]
        assert abs(sum(result["probs"]) - 1.0) < 1e-6
        assert result["scene_id"] == manifest["scenes"][0]["scene_id"]

    def test_reason_prompt_match_predicts_that_label(self, tmp_path):
        # scene whose global embedding equals one prompt
        from vlscene.vleb import write_bundle

        rng = np.random.default_rng(0)
        pooled = rng.standard_normal((3, 8))
        pooled /= np.linalg.norm(pooled, axis=1, keepdims=True)
        write_bundle(pooled, {"kind": "text", "labels": ["red", "green", "blue"]},
                     tmp_path / "prompts.vleb")
        rows = np.vstack([rng.standard_normal((2, 8)), pooled[1].reshape(1, -1)])
        write_bundle(rows, {"kind": "object", "extra": {"scene_id": "probe", "global_row": 2}},
                     tmp_path / "scene.vleb")
        out = tmp_path / "r.json"
        code = main(["reason", "--scene", str(tmp_path / "scene.vleb"),
                     "--prompts", str(tmp_path / "prompts.vleb"), "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["predicted_label"] == "green"

    def test_run_config_respected(self, dataset_dir, tmp_path):
        manifest = json.loads((dataset_dir / "manifest.json").read_text())
        scene_file = dataset_dir / manifest["scenes"][0]["file"]
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps({"tau": 0.5, "context": "off", "k": 2}))
        out = tmp_path / "result.json"
        code = main(["reason", "--scene", str(scene_file),
                     "--prompts", str(dataset_dir / "prompts.vleb"),
                     "--config", str(cfg_path), "--out", str(out)])
        assert code == 0
        result = json.loads(out.read_text())
        assert result["tau"] == 0.5
        assert result["context_enabled"] is False
        assert result["k"] == 2

    def test_unknown_config_key_rejected(self, dataset_dir, tmp_path):
        manifest = json.loads((dataset_dir / "manifest.json").read_text())
        scene_file = dataset_dir / manifest["scenes"][0]["file"]
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps({"temperature": 0.5}))
        code = main(["reason", "--scene", str(scene_file),
                     "--prompts", str(dataset_dir / "prompts.vleb"),
                     "--config", str(cfg_path), "--out", str(tmp_path / "r.json")])
        assert code == 2


class TestEvaluate:
    def test_basic_report(self, dataset_dir, tmp_path):
        out = tmp_path / "report.json"
        code = main(["evaluate", "--dataset", str(dataset_dir), "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["n_records"] == 24
        assert report["gen_gain_points"] is None

    def test_ablate_context_fills_gain(self, dataset_dir, tmp_path):
        out = tmp_path / "report.json"
        code = main(["evaluate", "--dataset", str(dataset_dir),
                     "--ablate", "context", "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["gen_gain_points"] is not None
        assert np.isfinite(report["gen_gain_points"])

    def test_noise_zero_dataset_perfect(self, tmp_path):
        ds_dir = tmp_path / "clean"
        assert main(["gen-scenes", "--scenes", "16", "--noise", "0.0",
                     "--seed", "3", "--out", str(ds_dir)]) == 0
        out = tmp_path / "report.json"
        assert main(["evaluate", "--dataset", str(ds_dir), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["top1"] == 1.0

    def test_reproducible_modulo_timing(self, dataset_dir, tmp_path):
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        main(["evaluate", "--dataset", str(dataset_dir), "--out", str(out_a)])
        main(["evaluate", "--dataset", str(dataset_dir), "--out", str(out_b)])
        a = json.loads(out_a.read_text())
        b = json.loads(out_b.read_text())
        a.pop("ms_per_sample"), b.pop("ms_per_sample")
        assert a == b

    def test_missing_dataset_is_data_error(self, tmp_path):
        code = main(["evaluate", "--dataset", str(tmp_path / "nope"),
                     "--out", str(tmp_path / "r.json")])
        assert code == 2


class TestTrainToy:
    def test_writes_params_and_trace(self, dataset_dir, tmp_path):
        params_out = tmp_path / "params.vleb"
        trace_out = tmp_path / "trace.csv"
        code = main(["train-toy", "--dataset", str(dataset_dir), "--steps", "40",
                     "--lr", "0.05", "--tau", "0.07", "--seed", "1",
                     "--out", str(params_out), "--trace", str(trace_out)])
        assert code == 0
        rows, meta = read_bundle(params_out)
        sections = dict((name, n) for name, n in meta["extra"]["sections"])
        assert rows.shape[0] == sections["w_vision"] + sections["token_table"] + sections["w_text"]
        lines = trace_out.read_text().strip().splitlines()
        assert lines[0] == "step,loss"
        assert len(lines) == 41
        losses = [float(line.split(",")[1]) for line in lines[1:]]
        assert all(np.isfinite(l) for l in losses)


class TestReport:
    def test_md_table(self, dataset_dir, tmp_path, capsys):
        out = tmp_path / "report.json"
        main(["evaluate", "--dataset", str(dataset_dir), "--out", str(out)])
        capsys.readouterr()
        assert main(["report", "--in", str(out), "--format", "md"]) == 0
        table = capsys.readouterr().out
        for field in ("top1_accuracy", "top5_accuracy", "mean_average_precision",
                      "recall_at_10", "mean_ambiguity", "failure_rate_novel",
                      "ms_per_sample", "gen_gain_points"):
            assert table.count(f" {field} ") == 1

    def test_csv_format(self, dataset_dir, tmp_path, capsys):
        out = tmp_path / "report.json"
        main(["evaluate", "--dataset", str(dataset_dir), "--out", str(out)])
        capsys.readouterr()
        assert main(["report", "--in", str(out), "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "parameter,value"
        assert any(line.startswith("top1_accuracy,") for line in lines)


class TestExitCodes:
    def test_usage_error_is_one(self):
        assert main(["bogus-subcommand"]) == 1
        assert main(["evaluate"]) == 1  # missing required args

    def test_data_error_is_two(self, tmp_path):
        bad = tmp_path / "bad.vleb"
        bad.write_bytes(b"XXXX not a bundle")
        code = main(["reason", "--scene", str(bad), "--prompts", str(bad),
                     "--out", str(tmp_path / "r.json")])
        assert code == 2

    def test_subprocess_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "vlscene.cli", "gen-scenes", "--scenes", "4",
             "--out", str(tmp_path / "ds")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "wrote 4 scenes" in proc.stdout
