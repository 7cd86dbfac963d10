import numpy as np
import pytest

from drafttube import cli
from drafttube.cli import (
    DataError,
    UsageError,
    config_hash,
    load_config,
    main,
    read_lineage,
)

pytestmark = pytest.mark.usefixtures("workdir")

SMALL_CFG = """\
# pipeline smoke configuration
scenario = II.a
seed = 3
samples = 80
generations = 6
pop_size = 16
lof_k = 10
"""


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(cli.SEED_ENV_VAR, raising=False)
    (tmp_path / "run.cfg").write_text(SMALL_CFG)
    return tmp_path


class TestConfig:
    def test_file_parsing_with_comments(self):
        cfg = load_config("run.cfg")
        assert cfg["scenario"] == "II.a"
        assert cfg["samples"] == 80

    def test_unknown_key_rejected(self, tmp_path):
        (tmp_path / "bad.cfg").write_text("granularity = 3\n")
        with pytest.raises(UsageError):
            load_config("bad.cfg")

    def test_bad_value_rejected(self, tmp_path):
        (tmp_path / "bad.cfg").write_text("samples = many\n")
        with pytest.raises(UsageError):
            load_config("bad.cfg")

    def test_hash_stable_and_sensitive(self):
        base = {k: d for k, (_, d) in cli.CONFIG_KEYS.items()}
        other = dict(base, seed=99)
        assert config_hash(base) == config_hash(dict(base))
        assert config_hash(base) != config_hash(other)

    def test_hash_ignores_worker_count(self):
        base = {k: d for k, (_, d) in cli.CONFIG_KEYS.items()}
        assert config_hash(base) == config_hash(dict(base, workers=8))

    def test_seed_from_environment(self, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "41")
        assert main(["sample", "--samples", "30", "--out", "s.csv"]) == 0
        assert read_lineage("s.csv")["seed"] == "41"

    def test_flag_overrides_environment(self, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "41")
        assert main(["sample", "--samples", "30", "--seed", "5",
                     "--out", "s.csv"]) == 0
        assert read_lineage("s.csv")["seed"] == "5"


class TestExitCodes:
    def test_usage_error_is_2(self):
        assert main(["sample", "--config", "missing.cfg"]) == 2

    def test_missing_artifact_is_3(self):
        assert main(["train", "--in", "missing.csv"]) == 3

    def test_scenario_mismatch_is_3(self):
        assert main(["sample", "--config", "run.cfg"]) == 0
        assert main(["evaluate", "--config", "run.cfg",
                     "--scenario", "I.a"]) == 3

    def test_diverging_gci_is_3(self):
        assert main(["gci", "0.5", "1.0", "1.5"]) == 3


class TestLineage:
    def test_every_stage_stamps_its_artifact(self):
        assert main(["sample", "--config", "run.cfg"]) == 0
        lin = read_lineage("samples.csv")
        assert lin["stage"] == "sample"
        assert lin["scenario"] == "II.a"
        assert lin["seed"] == "3"
        assert len(lin["config"]) == 12

    def test_artifact_without_lineage_is_rejected(self, tmp_path):
        (tmp_path / "naked.csv").write_text("x1\n0.0\n")
        with pytest.raises(DataError):
            read_lineage("naked.csv")

    def test_report_refuses_mixed_lineage(self):
        assert main(["sample", "--config", "run.cfg"]) == 0
        assert main(["evaluate", "--config", "run.cfg"]) == 0
        # Forge a second front from a different seed.
        assert main(["sample", "--config", "run.cfg", "--seed", "9",
                     "--out", "other.csv"]) == 0
        assert main(["report", "dataset.csv", "other.csv",
                     "--out", "r.svg"]) == 3


class TestPipeline:
    def test_full_small_run(self):
        for argv in (["sample", "--config", "run.cfg"],
                     ["evaluate", "--config", "run.cfg"],
                     ["train", "--config", "run.cfg"],
                     ["optimize", "--config", "run.cfg"],
                     ["decide", "--config", "run.cfg"],
                     ["report", "front.csv", "--config", "run.cfg",
                      "--decision", "decision.csv"]):
            assert main(argv) == 0, argv
        lin = read_lineage("decision.csv")
        assert lin["stage"] == "decide"
        with open("decision.csv") as fh:
            fh.readline()
            header = fh.readline().strip().split(",")
            first = fh.readline().strip().split(",")
        assert header[:3] == ["rank", "alternative", "closeness"]
        assert header[-2:] == ["cp", "cd"]
        assert first[0] == "1"
        assert 0.0 <= float(first[2]) <= 1.0
        svg = open("report.svg").read()
        assert svg.startswith("<!-- drafttube stage=report")
        assert "<svg" in svg

    def test_single_objective_run_writes_trace(self):
        assert main(["sample", "--config", "run.cfg"]) == 0
        assert main(["evaluate", "--config", "run.cfg"]) == 0
        assert main(["train", "--config", "run.cfg"]) == 0
        assert main(["optimize", "--config", "run.cfg",
                     "--optimizer", "pso", "--generations", "5"]) == 0
        X = np.genfromtxt("front.csv", delimiter=",", skip_header=2)
        assert X.shape == (20,)  # one best design row: 18 vars + cp + cd
        trace = np.genfromtxt("front_trace.csv", delimiter=",", skip_header=2)
        assert trace.shape[1] == 2
        assert np.all(np.diff(trace[:, 1]) >= 0.0)  # maximizing recovery
        assert main(["report", "front_trace.csv", "--kind", "trace",
                     "--config", "run.cfg", "--out", "trace.svg"]) == 0

    def test_external_results_bypass_the_oracle(self):
        assert main(["sample", "--config", "run.cfg"]) == 0
        assert main(["evaluate", "--config", "run.cfg"]) == 0
        # Strip lineage to simulate an externally produced results file.
        with open("dataset.csv") as fh:
            lines = fh.readlines()
        with open("external.csv", "w") as fh:
            fh.writelines(lines[1:])
        assert main(["evaluate", "--config", "run.cfg",
                     "--external", "external.csv", "--out", "ext.csv"]) == 0
        a = open("dataset.csv").readlines()[1:]
        b = open("ext.csv").readlines()[1:]
        assert a == b

    def test_external_results_must_respect_bounds(self):
        header = ",".join(f"x{j}" for j in range(1, 19)) + ",cp,cd\n"
        row = ",".join(["0.4"] * 18) + ",0.8,0.1\n"
        open("loose.csv", "w").write(header + row)
        assert main(["evaluate", "--config", "run.cfg",
                     "--external", "loose.csv", "--out", "x.csv"]) == 3

    def test_gci_table_output(self, capsys):
        assert main(["gci", "1.575", "0.563", "1.5", "--out", "gci.csv"]) == 0
        out = capsys.readouterr().out
        assert "GCI_cm_pct" in out
        rows = dict(line.split(",") for line in
                    open("gci.csv").read().splitlines()[2:])
        assert float(rows["p"]) == pytest.approx(2.553, rel=0.01)


class TestDeterminism:
    def test_stage_reruns_are_byte_identical(self):
        blobs = []
        for _ in range(2):
            assert main(["sample", "--config", "run.cfg"]) == 0
            assert main(["evaluate", "--config", "run.cfg"]) == 0
            blobs.append((open("samples.csv", "rb").read(),
                          open("dataset.csv", "rb").read()))
        assert blobs[0] == blobs[1]

    def test_parallel_evaluation_matches_serial(self):
        assert main(["sample", "--config", "run.cfg"]) == 0
        assert main(["evaluate", "--config", "run.cfg",
                     "--out", "serial.csv"]) == 0
        assert main(["evaluate", "--config", "run.cfg", "--workers", "3",
                     "--out", "parallel.csv"]) == 0
        assert open("serial.csv", "rb").read() == \
            open("parallel.csv", "rb").read()
