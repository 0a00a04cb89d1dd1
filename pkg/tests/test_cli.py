"""End-to-end tests drive the command-line pipeline through main()."""

import json
import subprocess
import sys
from dataclasses import replace

import pytest

from propopt.cli import main
from propopt.config import ToolkitConfig, config_hash, save_config
from propopt.data import load, save
from propopt.ga import load_trace
from propopt.space import DesignSpaceConfig

SEED = 2024
COUNT = 120
REQ_ARG = "100000,10,1200"


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run gen-data -> train once and hand the artifact paths around."""
    root = tmp_path_factory.mktemp("cli")
    ds = root / "corpus.csv"
    forest = root / "forest.json"
    tree = root / "tree.json"
    report = root / "train_report.json"
    rc = main(["gen-data", "--count", str(COUNT), "--seed", str(SEED),
               "--out", str(ds)])
    assert rc == 0
    rc = main(["train", "-d", str(ds), "--trees", "5", "--test-frac", "0.1",
               "--seed", "3", "--out-forest", str(forest),
               "--out-tree", str(tree), "--report", str(report)])
    assert rc == 0
    return {"root": root, "ds": ds, "forest": forest, "tree": tree,
            "report": report}


class TestGenData:
    def test_writes_dataset_and_manifest(self, pipeline):
        ds = load(pipeline["ds"])
        assert len(ds.records) == COUNT
        manifest = json.loads(
            (pipeline["root"] / "corpus.csv.manifest.json").read_text())
        assert manifest["command"] == "gen-data"
        assert manifest["seeds"] == {"space_rng_seed": SEED}
        assert manifest["wall_time_s"] > 0
        expected_cfg = replace(ToolkitConfig(),
                               space=DesignSpaceConfig(rng_seed=SEED))
        assert manifest["config_hash"] == config_hash(expected_cfg)

    def test_rerun_is_byte_identical(self, pipeline, tmp_path):
        again = tmp_path / "again.csv"
        rc = main(["gen-data", "--count", str(COUNT), "--seed", str(SEED),
                   "--out", str(again)])
        assert rc == 0
        assert again.read_bytes() == pipeline["ds"].read_bytes()

    def test_unreachable_floor_exits_1(self, tmp_path, capsys):
        rc = main(["gen-data", "--count", "5", "--floor", "0.99",
                   "--seed", "0", "--out", str(tmp_path / "none.csv")])
        assert rc == 1
        assert "attempt budget exhausted" in capsys.readouterr().err

    def test_bad_config_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[rocketry]\nfuel = lots\n", encoding="utf-8")
        rc = main(["gen-data", "-c", str(bad), "--count", "5",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2
        assert "unknown sections" in capsys.readouterr().err

    def test_config_file_seed_used_when_no_flag(self, tmp_path):
        cfg_path = tmp_path / "seeded.ini"
        save_config(replace(ToolkitConfig(),
                            space=DesignSpaceConfig(rng_seed=SEED)), cfg_path)
        out = tmp_path / "from_config.csv"
        rc = main(["gen-data", "-c", str(cfg_path), "--count", "30",
                   "--out", str(out)])
        assert rc == 0
        direct = tmp_path / "from_flag.csv"
        rc = main(["gen-data", "--count", "30", "--seed", str(SEED),
                   "--out", str(direct)])
        assert rc == 0
        assert out.read_bytes() == direct.read_bytes()


class TestTrain:
    def test_report_contents(self, pipeline):
        report = json.loads(pipeline["report"].read_text())
        assert report["forest"]["tree_count"] == 5
        assert report["forest"]["test_count"] == COUNT // 10
        assert 0.0 <= report["forest"]["accuracy"] <= 1.0
        # the full-corpus tree memorizes its training records
        assert report["tree"]["max_abs_training_residual"] <= 1e-12
        assert report["tree"]["leaf_count"] >= 1

    def test_models_reload(self, pipeline):
        from propopt.surrogate import RandomForest, RegressionTree, load_model
        assert isinstance(load_model(pipeline["forest"]), RandomForest)
        assert isinstance(load_model(pipeline["tree"]), RegressionTree)

    def test_manifest_written(self, pipeline):
        manifest = json.loads(
            (pipeline["root"] / "forest.json.manifest.json").read_text())
        assert manifest["command"] == "train"
        assert manifest["inputs"]["dataset"] == str(pipeline["ds"])

    def test_tiny_dataset_exits_1(self, pipeline, tmp_path, capsys):
        full = load(pipeline["ds"])
        tiny = tmp_path / "one.csv"
        save(replace(full, records=full.records[:1]), tiny)
        rc = main(["train", "-d", str(tiny),
                   "--out-forest", str(tmp_path / "f.json"),
                   "--out-tree", str(tmp_path / "t.json")])
        assert rc == 1
        assert "too small" in capsys.readouterr().err


class TestOptimize:
    def test_ga_run(self, pipeline, tmp_path, capsys):
        trace_path = tmp_path / "ga.csv"
        rc = main(["optimize", "--method", "ga", "--requirement", REQ_ARG,
                   "--budget", "60", "--seed", "7",
                   "--trace-out", str(trace_path)])
        assert rc == 0
        assert "optimize[GA]" in capsys.readouterr().out
        trace = load_trace(trace_path)
        assert trace.method_tag == "GA"
        assert len(trace.entries) == 60
        summary = json.loads(
            (tmp_path / "ga.summary.json").read_text())
        assert summary["method"] == "GA"
        assert summary["evaluations"] == 60
        assert summary["best_eta"] == trace.entries[-1][2]
        assert summary["best_geometry"]["diameter"] > 0

    def test_sao_run(self, pipeline, tmp_path):
        trace_path = tmp_path / "sao.csv"
        rc = main(["optimize", "--method", "sao", "--requirement", REQ_ARG,
                   "--budget", "60", "--seed", "7",
                   "--forest", str(pipeline["forest"]),
                   "--tree", str(pipeline["tree"]),
                   "--data", str(pipeline["ds"]),
                   "--trace-out", str(trace_path)])
        assert rc == 0
        trace = load_trace(trace_path)
        assert trace.method_tag == "SAO"
        assert len(trace.entries) == 60

    def test_sao_without_models_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["optimize", "--method", "sao", "--requirement", REQ_ARG,
                  "--trace-out", str(tmp_path / "x.csv")])
        assert excinfo.value.code == 2
        assert "--forest" in capsys.readouterr().err

    def test_malformed_requirement_exits_2(self, tmp_path, capsys):
        rc = main(["optimize", "--method", "ga", "--requirement", "10,5",
                   "--trace-out", str(tmp_path / "x.csv")])
        assert rc == 2
        assert "thrust,speed,rpm" in capsys.readouterr().err

    def test_swapped_model_files_exit_2(self, pipeline, tmp_path, capsys):
        rc = main(["optimize", "--method", "sao", "--requirement", REQ_ARG,
                   "--budget", "40",
                   "--forest", str(pipeline["tree"]),
                   "--tree", str(pipeline["forest"]),
                   "--data", str(pipeline["ds"]),
                   "--trace-out", str(tmp_path / "x.csv")])
        assert rc == 2
        assert "not a forest" in capsys.readouterr().err


class TestCompare:
    def test_sampled_requirements(self, pipeline, tmp_path, capsys):
        out_dir = tmp_path / "cmp"
        rc = main(["compare", "--sample", "2", "--repeats", "2",
                   "--budget", "40", "--seed", "9",
                   "--forest", str(pipeline["forest"]),
                   "--tree", str(pipeline["tree"]),
                   "-d", str(pipeline["ds"]),
                   "--out-dir", str(out_dir)])
        assert rc == 0
        assert "win rate" in capsys.readouterr().out
        lines = (out_dir / "summary.csv").read_text().strip().splitlines()
        assert lines[0] == "thrust_n,speed_mps,rpm,repeat,ga_best,sao_best,winner"
        assert len(lines) == 1 + 4
        for r_index in range(2):
            for repeat in range(2):
                assert (out_dir / f"req{r_index}_rep{repeat}_ga.csv").exists()
                assert (out_dir / f"req{r_index}_rep{repeat}_sao.csv").exists()
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["command"] == "compare"
        assert manifest["seeds"]["derived_seeds"] == [9, 10, 9, 10]

    def test_requirements_file(self, pipeline, tmp_path):
        req_file = tmp_path / "reqs.txt"
        req_file.write_text("# one per line\n100000,10,1200\n",
                            encoding="utf-8")
        out_dir = tmp_path / "cmp"
        rc = main(["compare", "--requirements-file", str(req_file),
                   "--budget", "40", "--seed", "1",
                   "--forest", str(pipeline["forest"]),
                   "--tree", str(pipeline["tree"]),
                   "-d", str(pipeline["ds"]),
                   "--out-dir", str(out_dir)])
        assert rc == 0
        lines = (out_dir / "summary.csv").read_text().strip().splitlines()
        assert len(lines) == 2
        assert lines[1].endswith(("GA", "SAO"))

    def test_empty_requirements_file_exits_2(self, pipeline, tmp_path, capsys):
        req_file = tmp_path / "empty.txt"
        req_file.write_text("# nothing here\n", encoding="utf-8")
        rc = main(["compare", "--requirements-file", str(req_file),
                   "--forest", str(pipeline["forest"]),
                   "--tree", str(pipeline["tree"]),
                   "-d", str(pipeline["ds"]),
                   "--out-dir", str(tmp_path / "cmp")])
        assert rc == 2
        assert "no requirements" in capsys.readouterr().err


class TestParser:
    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["polish"])
        assert excinfo.value.code == 2

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert "propopt" in capsys.readouterr().out

    def test_console_script_installed(self):
        proc = subprocess.run([sys.executable, "-m", "propopt.cli",
                               "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "propopt" in proc.stdout
