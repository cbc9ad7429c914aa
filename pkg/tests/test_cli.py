import json

import numpy as np
import pytest

from ewrobust.cli import main
from ewrobust.gadgets import CnfFormula, build_gadget, threshold_classifier
from ewrobust.nn import dump_model, load_model, predict


@pytest.fixture
def threshold_model_file(tmp_path):
    # label 0 iff x0 <= 0.5 (2 inputs)
    path = tmp_path / "model.json"
    path.write_text(dump_model(threshold_classifier(2, 0, 0.5)))
    return str(path)


@pytest.fixture
def center_file(tmp_path):
    path = tmp_path / "center.csv"
    path.write_text("0.0,0.0\n")
    return str(path)


@pytest.fixture
def dataset_files(tmp_path):
    rng = np.random.default_rng(1)
    inputs = rng.uniform(-1.0, 1.0, size=(12, 2))
    labels = (inputs[:, 0] > 0.5).astype(int)  # matches the threshold model
    inp = tmp_path / "inputs.csv"
    lab = tmp_path / "labels.txt"
    np.savetxt(inp, inputs, delimiter=",")
    lab.write_text("".join(f"{l}\n" for l in labels))
    return str(inp), str(lab)


def body_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [line for line in fh if not line.startswith("#")]


class TestDecide:
    def test_sat_and_exit_zero(self, threshold_model_file, center_file, capsys):
        # p_r = (0.5 - (0 - 0.2)) / 0.4 = 1.0 -> SAT
        rc = main(["decide", "--model", threshold_model_file, "--input", center_file,
                   "--radius", "0.2", "--eps", "0.2", "--eps-prime", "0.1",
                   "--alpha", "0.05", "--beta", "0.05", "--seed", "3"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.startswith("SAT ")
        assert "N=" in out and "c=" in out

    def test_unsat(self, threshold_model_file, center_file, capsys):
        # p_r = (0.5 + 2) / 4 = 0.625 < c -> UNSAT at eps=0.2
        rc = main(["decide", "--model", threshold_model_file, "--input", center_file,
                   "--radius", "2.0", "--eps", "0.2", "--seed", "3"])
        assert rc == 0
        assert capsys.readouterr().out.startswith("UNSAT ")

    def test_zero_radius_point_check(self, threshold_model_file, center_file, capsys):
        rc = main(["decide", "--model", threshold_model_file, "--input", center_file,
                   "--radius", "0", "--eps", "0.2"])
        assert rc == 0
        assert "point check" in capsys.readouterr().out

    def test_missing_radius_is_usage_error(self, threshold_model_file, center_file,
                                           capsys):
        rc = main(["decide", "--model", threshold_model_file, "--input", center_file,
                   "--eps", "0.2"])
        assert rc == 2
        assert "usage error" in capsys.readouterr().err

    def test_missing_center_is_usage_error(self, threshold_model_file):
        rc = main(["decide", "--model", threshold_model_file,
                   "--radius", "1", "--eps", "0.2"])
        assert rc == 2

    def test_missing_model_file_is_runtime_error(self, center_file):
        rc = main(["decide", "--model", "/nonexistent.json", "--input", center_file,
                   "--radius", "1", "--eps", "0.2"])
        assert rc == 3

    def test_report_written(self, threshold_model_file, center_file, tmp_path):
        out = tmp_path / "decide.csv"
        rc = main(["decide", "--model", threshold_model_file, "--input", center_file,
                   "--radius", "0.2", "--eps", "0.2", "--eps-prime", "0.1",
                   "--alpha", "0.05", "--beta", "0.05", "--out", str(out)])
        assert rc == 0
        body = body_lines(out)
        assert body[0].startswith("id,gold,omega,decision")
        assert ",SAT," in body[1]
        assert "wall_time_s" not in body[0]  # timings are opt-in

    def test_timings_flag_adds_column(self, threshold_model_file, center_file, tmp_path):
        out = tmp_path / "decide.csv"
        main(["decide", "--model", threshold_model_file, "--input", center_file,
              "--radius", "0.2", "--eps", "0.2", "--eps-prime", "0.1",
              "--alpha", "0.05", "--beta", "0.05", "--timings", "--out", str(out)])
        assert "wall_time_s" in body_lines(out)[0]


class TestEvaluate:
    def test_stub_oracle_converges(self, threshold_model_file, center_file, capsys):
        rc = main(["evaluate", "--model", threshold_model_file, "--input", center_file,
                   "--radius-max", "16", "--precision", "0.01", "--eps", "0.2",
                   "--stub-radius", "5.0"])
        assert rc == 0
        out = capsys.readouterr().out
        r_star = float(out.splitlines()[0].split()[0].split("=")[1])
        assert abs(r_star - 5.0) <= 0.01

    def test_real_bisection_near_closed_form(self, threshold_model_file, center_file,
                                             capsys, tmp_path):
        out = tmp_path / "eval.csv"
        rc = main(["evaluate", "--model", threshold_model_file, "--input", center_file,
                   "--radius-max", "4", "--precision", "0.02", "--eps", "0.2",
                   "--seed", "11", "--out", str(out)])
        assert rc == 0
        r_star = float(capsys.readouterr().out.splitlines()[0].split()[0].split("=")[1])
        # boundary where p_r = c ~ 0.80252: r* = 0.25/(c - 0.5) ~ 0.826
        assert r_star == pytest.approx(0.826, abs=0.08)
        assert body_lines(out)[-1].startswith("r_star,")

    def test_misclassified_center(self, threshold_model_file, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("2.0,0.0\n")  # x0 > 0.5 -> predicted label 1, omega {0}
        rc = main(["evaluate", "--model", threshold_model_file, "--input", str(bad),
                   "--omega", "0", "--radius-max", "4", "--precision", "0.1",
                   "--eps", "0.2"])
        assert rc == 3
        assert "error" in capsys.readouterr().err


class TestCurve:
    def run(self, model, data, out, extra=()):
        inp, lab = data
        return main(["curve", "--model", model, "--dataset", inp, "--labels", lab,
                     "--shape", "2", "--radius", "0.05,0.2,1.0", "--eps", "0.2",
                     "--eps-prime", "0.1", "--alpha", "0.05", "--beta", "0.05",
                     "--seed", "7", "--out", out, *extra])

    def test_body_reproducible_across_worker_counts(self, threshold_model_file,
                                                    dataset_files, tmp_path):
        outs = []
        for workers in ("1", "8"):
            path = tmp_path / f"curve_{workers}.csv"
            rc = self.run(threshold_model_file, dataset_files, str(path),
                          ("--workers", workers))
            assert rc == 0
            outs.append(body_lines(path))
        assert outs[0] == outs[1]
        header = outs[0][0].strip().split(",")
        assert header == ["radius", "n_points", "n_sat", "fraction_sat"]
        assert len(outs[0]) == 4  # header + 3 radii

    def test_fraction_monotone_for_threshold_model(self, threshold_model_file,
                                                   dataset_files, tmp_path):
        path = tmp_path / "curve.csv"
        self.run(threshold_model_file, dataset_files, str(path))
        fracs = [float(line.strip().split(",")[-1]) for line in body_lines(path)[1:]]
        assert fracs == sorted(fracs, reverse=True)

    def test_correct_only_drops_points(self, dataset_files, tmp_path):
        # model predicting label 0 iff x0 <= -2: most points are wrong
        model = tmp_path / "skew.json"
        model.write_text(dump_model(threshold_classifier(2, 0, -2.0)))
        path = tmp_path / "curve.csv"
        rc = self.run(str(model), dataset_files, str(path), ("--correct-only",))
        assert rc == 0
        n_points = int(body_lines(path)[1].strip().split(",")[1])
        assert n_points < 12

    def test_empty_grid_is_usage_error(self, threshold_model_file, dataset_files,
                                       tmp_path):
        inp, lab = dataset_files
        rc = main(["curve", "--model", threshold_model_file, "--dataset", inp,
                   "--labels", lab, "--shape", "2", "--eps", "0.2",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_missing_dataset_is_usage_error(self, threshold_model_file, tmp_path):
        rc = main(["curve", "--model", threshold_model_file, "--radius", "1",
                   "--eps", "0.2", "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestRadii:
    def test_stub_radii_summary(self, tmp_path):
        # constant-label-0 model; stub alternates r* = 3 and 7 -> mean 5, std 2
        model = tmp_path / "model.json"
        doc = {"input_shape": [2], "num_labels": 2,
               "layers": [{"kind": "dense", "weight": [[0, 0], [0, 0]],
                           "bias": [1, 0]}]}
        model.write_text(json.dumps(doc))
        inp = tmp_path / "inputs.csv"
        lab = tmp_path / "labels.txt"
        inp.write_text("".join("0.0,0.0\n" for _ in range(6)))
        lab.write_text("0\n" * 6)
        out = tmp_path / "radii.csv"
        rc = main(["radii", "--model", str(model), "--dataset", str(inp),
                   "--labels", str(lab), "--shape", "2", "--radius-max", "16",
                   "--precision", "1e-9", "--eps", "0.2", "--out", str(out),
                   "--stub-radius", "3,7", "--workers", "2"])
        assert rc == 0
        body = body_lines(out)
        summary = [l for l in body if l.startswith("class_summary")]
        assert len(summary) == 1
        parts = summary[0].strip().split(",")
        assert float(parts[5]) == pytest.approx(5.0, abs=1e-6)
        assert float(parts[6]) == pytest.approx(2.0, abs=1e-6)  # population std

    def test_misclassified_points_flagged(self, threshold_model_file, tmp_path):
        inp = tmp_path / "inputs.csv"
        lab = tmp_path / "labels.txt"
        inp.write_text("0.0,0.0\n2.0,0.0\n")  # second point predicts label 1
        lab.write_text("0\n0\n")
        out = tmp_path / "radii.csv"
        rc = main(["radii", "--model", threshold_model_file, "--dataset", str(inp),
                   "--labels", str(lab), "--shape", "2", "--radius-max", "2",
                   "--precision", "0.5", "--eps", "0.2", "--eps-prime", "0.1",
                   "--alpha", "0.05", "--beta", "0.05", "--out", str(out)])
        assert rc == 0
        points = [l.strip().split(",") for l in body_lines(out)
                  if l.startswith("point")]
        assert points[0][4] == "0" and points[0][3] != ""
        assert points[1][4] == "1" and points[1][3] == ""

    def test_missing_search_params_usage_error(self, threshold_model_file,
                                               dataset_files, tmp_path):
        inp, lab = dataset_files
        rc = main(["radii", "--model", threshold_model_file, "--dataset", inp,
                   "--labels", lab, "--shape", "2", "--eps", "0.2",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestGadget:
    def test_roundtrip(self, tmp_path):
        cnf_path = tmp_path / "f.cnf"
        cnf_path.write_text("p cnf 2 1\n1 2 0\n")
        out = tmp_path / "gadget.json"
        rc = main(["gadget", "--cnf", str(cnf_path), "--out", str(out)])
        assert rc == 0
        model = load_model(out.read_text())
        want = build_gadget(CnfFormula(2, ((1, 2),))).model
        corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        assert np.array_equal(predict(model, corners), predict(want, corners))

    def test_malformed_cnf(self, tmp_path, capsys):
        cnf_path = tmp_path / "bad.cnf"
        cnf_path.write_text("p cnf 2 1\n1 2\n")
        rc = main(["gadget", "--cnf", str(cnf_path)])
        assert rc == 2
        assert "usage error" in capsys.readouterr().err


class TestSample:
    def test_deterministic_dump(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            rc = main(["sample", "--norm", "2", "--radius", "1.5", "--count", "20",
                       "--shape", "3", "--seed", "42", "--out", str(path)])
            assert rc == 0
        assert a.read_text() == b.read_text()
        body = body_lines(a)
        assert body[0].strip() == "index,x0,x1,x2"
        assert len(body) == 21

    def test_start_offset_matches_library(self, tmp_path):
        from ewrobust.sampling import BallSpec, SampleStream, sample_batch
        out = tmp_path / "s.csv"
        main(["sample", "--norm", "inf", "--radius", "2.0", "--count", "5",
              "--start", "100", "--shape", "2", "--seed", "9", "--out", str(out)])
        rows = [l.strip().split(",") for l in body_lines(out)[1:]]
        assert rows[0][0] == "100"
        want = sample_batch(BallSpec(np.zeros(2), 2.0, "inf"), SampleStream(9), 100, 5)
        got = np.array([[float(v) for v in row[1:]] for row in rows])
        assert np.array_equal(got, want)  # repr round-trips exactly

    def test_count_zero_header_only(self, tmp_path):
        out = tmp_path / "s.csv"
        rc = main(["sample", "--norm", "1", "--radius", "1", "--count", "0",
                   "--shape", "4", "--out", str(out)])
        assert rc == 0
        assert body_lines(out) == ["index,x0,x1,x2,x3\n"]

    def test_bad_norm_usage_error(self, tmp_path):
        rc = main(["sample", "--norm", "3", "--radius", "1", "--count", "1",
                   "--shape", "2", "--out", str(tmp_path / "s.csv")])
        assert rc == 2
