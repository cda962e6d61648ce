import json
import os

import numpy as np
import pandas as pd
import pytest

from pltvsar.cli import main


def _read_csv(path):
    return pd.read_csv(path, comment="#", dtype={"cell_id": str})


def _read_json(path):
    with open(path) as f:
        return json.load(f)


@pytest.fixture(scope="module")
def simulated_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    argv = ["simulate", "--m", "4", "--t_len", "3", "--seed", "3"]
    assert main(argv + ["--out_dir", str(out), "--quiet"]) == 0
    return out


def _data_flags(sim_dir):
    return [
        "--panel_csv",
        str(sim_dir / "panel.csv"),
        "--weights_csv",
        str(sim_dir / "weights.csv"),
        "--quiet",
    ]


def test_weights_command(tmp_path):
    path = tmp_path / "w.csv"
    assert main(["weights", "--m", "2", "--out_path", str(path), "--quiet"]) == 0
    values = np.loadtxt(path, delimiter=",", comments="#")
    expected = np.array(
        [[0, 0.5, 0.5, 0], [0.5, 0, 0, 0.5], [0.5, 0, 0, 0.5], [0, 0.5, 0.5, 0]]
    )
    np.testing.assert_array_equal(values, expected)

    first = path.read_bytes()
    assert main(["weights", "--m", "2", "--out_path", str(path), "--quiet"]) == 0
    assert path.read_bytes() == first


def test_weights_rejects_small_lattice(tmp_path):
    argv = ["weights", "--m", "1", "--out_path", str(tmp_path / "w.csv"), "--quiet"]
    assert main(argv) == 2


def test_simulate_outputs(simulated_dir):
    panel = _read_csv(simulated_dir / "panel.csv")
    assert list(panel.columns) == ["location", "period", "y", "x2", "x3", "x4"]
    assert len(panel) == 48
    truth = _read_csv(simulated_dir / "truth.csv")
    assert list(truth.columns) == ["tau", "rho", "beta1", "beta2", "beta3", "beta4"]
    np.testing.assert_allclose(truth["tau"], [1 / 3, 2 / 3, 1.0], rtol=1e-9)
    weights = np.loadtxt(simulated_dir / "weights.csv", delimiter=",", comments="#")
    assert weights.shape == (16, 16)
    np.testing.assert_allclose(weights.sum(axis=1), 1.0)


def test_fit_command(simulated_dir, tmp_path):
    out = tmp_path / "fit"
    argv = ["fit"] + _data_flags(simulated_dir) + ["--out_dir", str(out), "--emit_tv"]
    assert main(argv) == 0

    beta_c = _read_json(out / "beta_c.json")
    assert set(beta_c["beta_c"]) == {"x3", "x4"}
    assert beta_c["n"] == 16 and beta_c["t_len"] == 3
    assert beta_c["config"]["command"] == "fit"

    gamma_v = _read_csv(out / "gamma_v.csv")
    assert list(gamma_v.columns) == [
        "tau",
        "period",
        "rho_hat",
        "beta_intercept",
        "beta_x2",
    ]
    assert len(gamma_v) == 3
    alpha = _read_csv(out / "alpha.csv")
    assert len(alpha) == 16
    assert alpha["alpha"].sum() == pytest.approx(0.0, abs=1e-6)

    rss = _read_json(out / "rss.json")
    assert rss["rss_pl"] > 0
    assert rss["rss_tv"] > 0
    expected_w = 48 / 2 * (rss["rss_pl"] - rss["rss_tv"]) / rss["rss_tv"]
    assert rss["w_statistic"] == pytest.approx(expected_w, rel=1e-9)
    assert len(_read_csv(out / "gamma_tv.csv").columns) == 7
    assert os.path.exists(out / "alpha_tv.csv")

    first = (out / "beta_c.json").read_bytes()
    assert main(argv) == 0
    assert (out / "beta_c.json").read_bytes() == first


def test_fit_all_varying(simulated_dir, tmp_path):
    out = tmp_path / "fit"
    argv = ["fit"] + _data_flags(simulated_dir)
    argv += ["--out_dir", str(out), "--all_varying"]
    assert main(argv) == 0
    assert _read_json(out / "beta_c.json")["beta_c"] == {}
    assert len(_read_csv(out / "gamma_v.csv").columns) == 7


def test_fit_missing_weights_is_input_error(simulated_dir, tmp_path):
    argv = [
        "fit",
        "--panel_csv",
        str(simulated_dir / "panel.csv"),
        "--weights_csv",
        str(tmp_path / "absent.csv"),
        "--out_dir",
        str(tmp_path / "fit"),
        "--quiet",
    ]
    assert main(argv) == 2
    assert not os.path.exists(tmp_path / "fit")


def test_fit_weights_size_mismatch(simulated_dir, tmp_path):
    weights = tmp_path / "w.csv"
    assert main(["weights", "--m", "2", "--out_path", str(weights), "--quiet"]) == 0
    argv = [
        "fit",
        "--panel_csv",
        str(simulated_dir / "panel.csv"),
        "--weights_csv",
        str(weights),
        "--out_dir",
        str(tmp_path / "fit"),
        "--quiet",
    ]
    assert main(argv) == 2


def test_test_command(simulated_dir, tmp_path):
    out = tmp_path / "test.json"
    argv = ["test"] + _data_flags(simulated_dir)
    argv += ["--n_bootstrap", "4", "--seed", "8", "--out_path", str(out)]
    assert main(argv + ["--num_workers", "1", "--save_bootstrap"]) == 0
    payload = _read_json(out)
    assert payload["k"] == 4
    assert len(payload["w_bootstrap"]) == 4
    hits = sum(w >= payload["w_observed"] for w in payload["w_bootstrap"])
    assert payload["p_value"] == pytest.approx(hits / 4)
    expected = "reject" if payload["p_value"] < 0.05 else "fail_to_reject"
    assert payload["decision"] == expected

    first = out.read_bytes()
    assert main(argv + ["--num_workers", "1", "--save_bootstrap"]) == 0
    assert out.read_bytes() == first


def test_test_single_replicate(simulated_dir, tmp_path):
    out = tmp_path / "test.json"
    argv = ["test"] + _data_flags(simulated_dir)
    argv += ["--n_bootstrap", "1", "--out_path", str(out)]
    assert main(argv) == 0
    assert _read_json(out)["p_value"] in (0.0, 1.0)


def test_test_reads_config_file(simulated_dir, tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"n_bootstrap": 2, "seed": 4, "constant": ["x4"]}))
    out = tmp_path / "test.json"
    argv = ["test"] + _data_flags(simulated_dir)
    argv += ["--config_path", str(config), "--out_path", str(out)]
    assert main(argv) == 0
    payload = _read_json(out)
    assert payload["k"] == 2
    assert payload["seed"] == 4
    assert payload["config"]["constant"] == ["x4"]


def test_bad_config_is_input_error(simulated_dir, tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text("{not json")
    argv = ["test"] + _data_flags(simulated_dir)
    argv += ["--config_path", str(config), "--out_path", str(tmp_path / "t.json")]
    assert main(argv) == 2


def test_mc_empty_grid_writes_header(tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"cartesian_hyperparams": {"m": []}}))
    out = tmp_path / "table.csv"
    argv = ["mc", "size", "--config_path", str(grid), "--out_path", str(out)]
    assert main(argv + ["--quiet"]) == 0
    table = _read_csv(out)
    assert len(table) == 0
    assert list(table.columns)[-4:] == ["k", "size_0.01", "size_0.05", "size_0.1"]


def test_mc_estimate_cell(tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(
        json.dumps(
            {"cartesian_hyperparams": {"m": [4]}, "t_len": 3, "n_sim": 2, "seed": 1}
        )
    )
    out = tmp_path / "table.csv"
    argv = ["mc", "estimate", "--config_path", str(grid), "--out_path", str(out)]
    assert main(argv + ["--num_workers", "1", "--quiet"]) == 0
    table = _read_csv(out)
    assert len(table) == 1
    row = table.iloc[0]
    assert row["n"] == 16 and row["n_sim"] == 2
    assert row["amse_rho"] >= 0
    curves = _read_csv(tmp_path / "curves_{}.csv".format(row["cell_id"]))
    assert list(curves.columns)[:3] == ["tau", "rho_true", "rho_mean"]


def test_mc_power_needs_deviation(tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"m": 4, "t_len": 3, "n_sim": 1, "n_bootstrap": 1}))
    argv = ["mc", "power", "--config_path", str(grid)]
    argv += ["--out_path", str(tmp_path / "t.csv"), "--quiet"]
    assert main(argv) == 2
