import numpy as np
import pytest

from udtw.cli import main
from udtw.data_io import write_csv_sequence
from udtw.types import Sequence


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_seq(path, values):
    write_csv_sequence(Sequence(np.asarray(values, dtype=float)), path)


class TestDist:
    def test_identical_files_zero_dist_small_gamma(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        write_seq(a, np.full(5, 2.0))
        code, out, _ = run(["dist", str(a), str(a), "--gamma", "1"], capsys)
        assert code == 0
        metrics = dict(line.split(",") for line in out.strip().splitlines())
        assert float(metrics["dist"]) == pytest.approx(0.0, abs=1e-12)
        assert float(metrics["omega"]) == pytest.approx(0.0, abs=1e-12)

    def test_worked_cost_matrix(self, tmp_path, capsys):
        cm = tmp_path / "c.csv"
        cm.write_text("1,2\n3,1\n")
        code, out, _ = run(["dist", "--cost-matrix", str(cm), "--gamma", "1"], capsys)
        assert code == 0
        metrics = dict(line.split(",") for line in out.strip().splitlines())
        w = np.array([2.0, 4.0, 5.0])
        pr = np.exp(-w) / np.exp(-w).sum()
        assert float(metrics["dist"]) == pytest.approx(float(w @ pr), abs=1e-6)

    def test_gamma_zero_usage_error(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        write_seq(a, [1.0, 2.0])
        code, _, err = run(["dist", str(a), str(a), "--gamma", "0"], capsys)
        assert code == 2
        assert "gamma" in err

    def test_missing_input_usage_error(self, capsys):
        code, _, err = run(["dist", "--gamma", "1"], capsys)
        assert code == 2

    def test_coupling_output(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        write_seq(a, [0.0, 1.0])
        write_seq(b, [0.0, 1.0, 2.0])
        coupling = tmp_path / "coupling.csv"
        code, _, _ = run(
            ["dist", str(a), str(b), "--coupling-out", str(coupling)], capsys
        )
        assert code == 0
        text = coupling.read_text()
        assert text.startswith("# udtw ")
        assert "command: dist" in text


class TestSynthAndSelftest:
    def test_synth_cbf_writes_files(self, tmp_path, capsys):
        code, out, _ = run(
            [
                "synth",
                "cbf",
                "--train-per-class", "2",
                "--test-per-class", "3",
                "--length", "32",
                "--output-dir", str(tmp_path),
                "--seed", "0",
            ],
            capsys,
        )
        assert code == 0
        from udtw.data_io import read_ucr_tsv

        assert len(read_ucr_tsv(tmp_path / "train.tsv").items) == 6
        assert len(read_ucr_tsv(tmp_path / "test.tsv").items) == 9

    def test_selftest_quick(self, capsys):
        code, out, _ = run(
            ["selftest", "--trials", "5", "--mc-trials", "2", "--seed", "0"], capsys
        )
        assert code == 0
        assert out.count("pass") == 4

    def test_selftest_seed_independent(self, capsys):
        code, _, _ = run(
            ["selftest", "--trials", "5", "--mc-trials", "2", "--seed", "99"], capsys
        )
        assert code == 0

    def test_selftest_small_limit_is_quick(self, capsys):
        import time

        start = time.time()
        code, _, _ = run(
            ["selftest", "--oracle-limit", "3", "--trials", "20", "--mc-trials", "2"],
            capsys,
        )
        assert code == 0
        assert time.time() - start < 10.0


class TestKnnCommand:
    def test_small_run(self, tmp_path, capsys):
        run(
            [
                "synth", "cbf",
                "--train-per-class", "2",
                "--test-per-class", "2",
                "--length", "32",
                "--output-dir", str(tmp_path),
            ],
            capsys,
        )
        code, out, _ = run(
            [
                "knn",
                "--train", str(tmp_path / "train.tsv"),
                "--test", str(tmp_path / "test.tsv"),
                "--k", "1",
                "--gamma", "1",
                "--output-dir", str(tmp_path / "res"),
            ],
            capsys,
        )
        assert code == 0
        assert out.startswith("accuracy,")
        pred = (tmp_path / "res" / "predictions.csv").read_text()
        assert pred.startswith("# udtw ")
        assert "# config: seed=" in pred
        assert "index,true,predicted" in pred

    def test_cbf_accuracy_through_cli(self, tmp_path, capsys):
        run(
            [
                "synth", "cbf",
                "--train-per-class", "10",
                "--test-per-class", "10",
                "--length", "128",
                "--seed", "0",
                "--output-dir", str(tmp_path),
            ],
            capsys,
        )
        code, out, _ = run(
            [
                "knn",
                "--train", str(tmp_path / "train.tsv"),
                "--test", str(tmp_path / "test.tsv"),
                "--k", "1",
                "--gamma", "1",
                "--output-dir", str(tmp_path / "res"),
            ],
            capsys,
        )
        assert code == 0
        accuracy = float(out.strip().splitlines()[0].split(",")[1])
        assert accuracy >= 0.90


class TestBarycenterCommand:
    def test_identical_series_trace_hits_zero(self, tmp_path, capsys):
        from udtw.data_io import write_ucr_tsv
        from udtw.types import LabeledSet

        s = Sequence(np.full(12, 3.0))
        write_ucr_tsv(LabeledSet([(s, 0)] * 10), tmp_path / "data.tsv")
        code, out, _ = run(
            [
                "barycenter",
                "--data", str(tmp_path / "data.tsv"),
                "--gamma", "1",
                "--output-dir", str(tmp_path / "res"),
            ],
            capsys,
        )
        assert code == 0
        metrics = dict(line.split(",") for line in out.strip().splitlines())
        assert float(metrics["final_objective"]) <= 1e-10
        trace = (tmp_path / "res" / "trace.csv").read_text()
        assert "iteration,objective" in trace


class TestForecastCommand:
    def test_prediction_shape_contract(self, tmp_path, capsys):
        run(
            [
                "synth", "sine-step",
                "--n", "10",
                "--length", "30",
                "--output-dir", str(tmp_path),
            ],
            capsys,
        )
        code, out, _ = run(
            [
                "forecast",
                "--data", str(tmp_path / "data.tsv"),
                "--epochs", "3",
                "--step", "1e-4",
                "--hidden", "8",
                "--output-dir", str(tmp_path / "res"),
            ],
            capsys,
        )
        assert code == 0
        rows = [
            r
            for r in (tmp_path / "res" / "predictions.csv").read_text().splitlines()
            if not r.startswith("#")
        ]
        assert all(len(r.split(",")) == 12 for r in rows)  # 40% of 30


class TestExitCodes:
    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_file_input_error(self, tmp_path, capsys):
        code, _, err = run(
            ["knn", "--train", str(tmp_path / "nope.tsv"), "--test", str(tmp_path / "nope.tsv")],
            capsys,
        )
        assert code in (1, 2)
        assert err
