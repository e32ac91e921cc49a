import csv
import json

import pytest

from irsdoa.cli import main

SCENE = {
    "n_bs_antennas": 64, "n_res": 16, "n_ses": 4, "n_slots": 16,
    "carrier_freq_ghz": 28.0, "tx_power_dbm": 40.0, "noise_power_dbm": -120.0,
    "bs_irs_distance_m": 30.0, "bs_departure_angle_deg": -60.0,
    "irs_arrival_angle_deg": -60.0,
    "targets": [
        {"angle_deg": -10.0, "distance_m": 5.0, "rcs_dbsm": 10.0},
        {"angle_deg": 20.0, "distance_m": 5.0, "rcs_dbsm": 10.0},
    ],
    "measurement": {"kind": "dft"},
}

SWEEP = {
    "axis": "tx_power_dbm",
    "points": [10.0, 20.0],
    "trials": 2,
    "master_seed": 3,
    "estimators": ["ANM", "MUSIC"],
    "base_scene": SCENE,
    "anm_cfg": {"max_iters": 1000, "grid_step_deg": 0.1},
    "music_cfg": {"grid_step_deg": 0.1},
}


@pytest.fixture
def scene_file(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(SCENE), encoding="utf-8")
    return str(path)


@pytest.fixture
def sweep_file(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(SWEEP), encoding="utf-8")
    return str(path)


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestSimulate:
    def test_writes_echo_csv(self, scene_file, tmp_path):
        out = str(tmp_path / "echo.csv")
        assert main(["simulate", "--scene", scene_file, "--out", out]) == 0
        rows = read_rows(out)
        assert rows[0] == ["se_index", "slot", "re", "im"]
        assert len(rows) == 1 + 4 * 16

    def test_seed_reproducible(self, scene_file, tmp_path):
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        main(["simulate", "--scene", scene_file, "--out", a, "--seed", "9"])
        main(["simulate", "--scene", scene_file, "--out", b, "--seed", "9"])
        assert open(a, "rb").read() == open(b, "rb").read()


class TestEstimate:
    def test_anm(self, scene_file, tmp_path):
        out = str(tmp_path / "est.csv")
        code = main(["estimate", "--scene", scene_file, "--method", "anm",
                     "--k", "2", "--grid-step-deg", "0.05", "--out", out])
        assert code == 0
        rows = read_rows(out)
        assert rows[0] == ["method", "index", "angle_deg", "peak_value", "degraded"]
        assert len(rows) == 3
        angles = sorted(float(r[2]) for r in rows[1:])
        assert abs(angles[0] + 10.0) < 0.5 and abs(angles[1] - 20.0) < 0.5

    def test_music(self, scene_file, tmp_path):
        out = str(tmp_path / "est.csv")
        code = main(["estimate", "--scene", scene_file, "--method", "music",
                     "--k", "2", "--out", out])
        assert code == 0
        assert read_rows(out)[1][0] == "MUSIC"

    def test_music_k_too_large_is_numerical_failure(self, scene_file, tmp_path):
        out = str(tmp_path / "est.csv")
        code = main(["estimate", "--scene", scene_file, "--method", "music",
                     "--k", "4", "--out", out])
        assert code == 3


class TestCrb:
    def test_report(self, scene_file, tmp_path):
        out = str(tmp_path / "crb.csv")
        assert main(["crb", "--scene", scene_file, "--out", out]) == 0
        rows = read_rows(out)
        assert rows[0] == ["target", "angle_deg", "crb_rad2", "crb_deg2", "rcrb_deg"]
        assert len(rows) == 3

    def test_closed_form_single_target(self, tmp_path):
        scene = dict(SCENE, targets=[SCENE["targets"][0]])
        path = tmp_path / "scene1.json"
        path.write_text(json.dumps(scene), encoding="utf-8")
        out = str(tmp_path / "crb.csv")
        code = main(["crb", "--scene", str(path), "--closed-form", "--out", out])
        assert code == 0
        rows = read_rows(out)
        assert rows[0][-1] == "closed_form_crb_deg2"
        assert abs(float(rows[1][3]) - float(rows[1][5])) <= 1e-8 * float(rows[1][5])

    def test_closed_form_multi_target_config_error(self, scene_file, tmp_path):
        code = main(["crb", "--scene", scene_file, "--closed-form",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_endfire_numerical_failure(self, tmp_path):
        scene = dict(SCENE, targets=[
            {"angle_deg": 90.0, "distance_m": 5.0, "rcs_dbsm": 10.0}])
        path = tmp_path / "endfire.json"
        path.write_text(json.dumps(scene), encoding="utf-8")
        code = main(["crb", "--scene", str(path), "--out", str(tmp_path / "x.csv")])
        assert code == 3


class TestSweep:
    def test_summary_and_detail(self, sweep_file, tmp_path):
        out, detail = str(tmp_path / "s.csv"), str(tmp_path / "d.csv")
        code = main(["sweep", "--spec", sweep_file, "--out", out,
                     "--detail", detail])
        assert code == 0
        srows = read_rows(out)
        assert srows[0] == ["axis", "axis_value", "estimator", "rmse_deg",
                            "rcrb_deg", "trials", "failures"]
        assert len(srows) == 1 + 2 * 2
        drows = read_rows(detail)
        assert len(drows) == 1 + 2 * 2 * 2

    def test_seed_override_and_reproducibility(self, sweep_file, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = str(tmp_path / f"{name}.csv")
            detail = str(tmp_path / f"{name}_d.csv")
            assert main(["sweep", "--spec", sweep_file, "--out", out,
                         "--detail", detail, "--seed", "123"]) == 0
            outs.append((open(out, "rb").read(), open(detail, "rb").read()))
        assert outs[0] == outs[1]


class TestErrorPaths:
    def test_missing_scene_file(self, tmp_path):
        code = main(["simulate", "--scene", str(tmp_path / "none.json"),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 2

    def test_malformed_scene(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        code = main(["simulate", "--scene", str(path),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 2

    def test_missing_required_key(self, tmp_path):
        bad = {k: v for k, v in SCENE.items() if k != "n_res"}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad), encoding="utf-8")
        code = main(["estimate", "--scene", str(path), "--method", "anm",
                     "--k", "1", "--out", str(tmp_path / "o.csv")])
        assert code == 2

    def test_unwritable_out(self, scene_file, tmp_path):
        code = main(["simulate", "--scene", scene_file,
                     "--out", str(tmp_path / "missing_dir" / "o.csv")])
        assert code == 3
