"""CLI subcommands, exit codes, and file outputs."""

import numpy as np
import pytest

from vecboost.cli import main
from vecboost.model_io import load_model


def run(argv):
    return main(argv)


@pytest.fixture
def small_csv(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(60, 3))
    y = np.column_stack([x[:, 0] + x[:, 1], x[:, 2]])
    p = tmp_path / "train.csv"
    with open(p, "w") as fh:
        for xr, yr in zip(x, y):
            fh.write(",".join(repr(float(v)) for v in [*xr, *yr]) + "\n")
    return str(p)


class TestTrainCommand:
    def test_minimal_run_writes_model_and_history(self, small_csv, tmp_path, capsys):
        model = str(tmp_path / "m.txt")
        rc = run(["train", "--data", small_csv, "--labels", "2",
                  "--model", model, "--rounds", "3"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "best_round" in out
        ensemble = load_model(model)
        assert len(ensemble.trees) >= 1
        history = open(model + ".history").read().splitlines()
        assert history[0] == "round,train_loss,eval_metric,seconds"
        assert len(history) == 4

    def test_unknown_flag_exits_1(self, small_csv, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["train", "--data", small_csv, "--labels", "2",
                 "--model", str(tmp_path / "m.txt"), "--frobnicate"])
        assert exc.value.code == 1

    def test_sparse_mode_without_topk_exits_1(self, small_csv, tmp_path):
        rc = run(["train", "--data", small_csv, "--labels", "2",
                  "--model", str(tmp_path / "m.txt"), "--mode", "mo_sparse",
                  "--rounds", "1"])
        assert rc == 1

    def test_missing_data_exits_2(self, tmp_path):
        rc = run(["train", "--data", str(tmp_path / "nope.csv"), "--labels", "1",
                  "--model", str(tmp_path / "m.txt")])
        assert rc == 2

    def test_config_file_with_flag_override(self, small_csv, tmp_path):
        cfg = tmp_path / "run.conf"
        cfg.write_text("rounds=2\nlr=0.3\ndepth=3\n")
        model = str(tmp_path / "m.txt")
        rc = run(["train", "--data", small_csv, "--labels", "2",
                  "--model", model, "--config", str(cfg), "--rounds", "4"])
        assert rc == 0
        assert len(load_model(model).trees) == 4  # flag beats file
        assert load_model(model).learning_rate == 0.3  # file value used

    def test_eval_data_drives_history_metric(self, small_csv, tmp_path):
        model = str(tmp_path / "m.txt")
        rc = run(["train", "--data", small_csv, "--labels", "2",
                  "--eval-data", small_csv, "--model", model, "--rounds", "2"])
        assert rc == 0
        rows = open(model + ".history").read().splitlines()[1:]
        metrics = [float(r.split(",")[2]) for r in rows]
        assert all(np.isfinite(m) for m in metrics)

    def test_bad_config_key_exits_1(self, small_csv, tmp_path):
        cfg = tmp_path / "run.conf"
        cfg.write_text("wibble=3\n")
        rc = run(["train", "--data", small_csv, "--labels", "2",
                  "--model", str(tmp_path / "m.txt"), "--config", str(cfg)])
        assert rc == 1


class TestPredictCommand:
    def test_round_trip_matches_in_process(self, small_csv, tmp_path):
        model = str(tmp_path / "m.txt")
        run(["train", "--data", small_csv, "--labels", "2", "--model", model,
             "--rounds", "3"])
        out = str(tmp_path / "pred.csv")
        rc = run(["predict", "--data", small_csv, "--model", model, "--out", out])
        assert rc == 0
        lines = open(out).read().splitlines()
        assert lines[0] == "y0,y1"
        got = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
        from vecboost import load_dataset
        feats = load_dataset(small_csv, "2").features
        expected = load_model(model).predict_raw(feats)
        np.testing.assert_array_equal(got, expected)

    def test_empty_input_gives_header_only(self, small_csv, tmp_path):
        model = str(tmp_path / "m.txt")
        run(["train", "--data", small_csv, "--labels", "2", "--model", model,
             "--rounds", "1"])
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        out = str(tmp_path / "pred.csv")
        assert run(["predict", "--data", str(empty), "--model", model,
                    "--out", out]) == 0
        assert open(out).read() == "y0,y1\n"

    def test_width_mismatch_exits_2(self, small_csv, tmp_path):
        model = str(tmp_path / "m.txt")
        run(["train", "--data", small_csv, "--labels", "2", "--model", model,
             "--rounds", "1"])
        narrow = tmp_path / "narrow.csv"
        narrow.write_text("1.0,2.0\n")
        rc = run(["predict", "--data", str(narrow), "--model", model,
                  "--out", str(tmp_path / "p.csv")])
        assert rc == 2


class TestSynthCommand:
    def test_deterministic_output(self, tmp_path):
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        assert run(["synth", "--kind", "friedman1", "--n", "50", "--seed", "3",
                    "--out", a]) == 0
        assert run(["synth", "--kind", "friedman1", "--n", "50", "--seed", "3",
                    "--out", b]) == 0
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_header_and_shape(self, tmp_path):
        out = str(tmp_path / "rp.csv")
        run(["synth", "--kind", "random_projection", "--n", "10", "--seed", "0",
             "--out", out])
        lines = open(out).read().splitlines()
        assert lines[0].split(",") == [f"x{j}" for j in range(4)] + \
            [f"y{j}" for j in range(8)]
        assert len(lines) == 11

    def test_bad_count_exits_1(self, tmp_path):
        rc = run(["synth", "--kind", "friedman1", "--n", "0",
                  "--out", str(tmp_path / "x.csv")])
        assert rc == 1


class TestBenchCommand:
    def test_two_modes_two_rows(self, small_csv, capsys):
        rc = run(["bench", "--data", small_csv, "--labels", "2",
                  "--modes", "mo_dense,so_baseline", "--repeat", "2",
                  "--rounds", "2", "--depth", "3"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("mode,replication")
        assert len([ln for ln in lines if ln.startswith("mo_dense,")]) == 1
        assert len([ln for ln in lines if ln.startswith("so_baseline,")]) == 1

    def test_sweep_reports_ratio(self, small_csv, capsys):
        rc = run(["bench", "--data", small_csv, "--labels", "2",
                  "--modes", "mo_dense", "--repeat", "2", "--sweep-d", "1,2",
                  "--depth", "3"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "scaling_ratio,mo_dense,x1->x2," in out

    def test_zero_repeat_exits_1(self, small_csv):
        rc = run(["bench", "--data", small_csv, "--labels", "2", "--repeat", "0"])
        assert rc == 1


class TestConfidenceCommand:
    def test_symmetric_half(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("1\n2\n3\n4\n")
        b.write_text("2\n1\n4\n3\n")
        assert run(["confidence", "--a", str(a), "--b", str(b)]) == 0
        assert abs(float(capsys.readouterr().out.strip()) - 0.5) < 1e-9

    def test_zero_variance_exits_3(self, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("1\n1\n1\n")
        b.write_text("0\n0\n0\n")
        assert run(["confidence", "--a", str(a), "--b", str(b)]) == 3

    def test_unequal_trials_exit_2(self, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("1\n2\n")
        b.write_text("0\n")
        assert run(["confidence", "--a", str(a), "--b", str(b)]) == 2
