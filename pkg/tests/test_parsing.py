import json
from abc import ABCMeta

import pytest

from pltvsar.utils.classes import Nox
from pltvsar.utils.errors import ConfigError, MissingInput
from pltvsar.utils.parsing import (
    expand_config_flags,
    load_grid_config,
    parse_args,
    parse_cell_args,
    parse_dispatcher_config,
)
from pltvsar.utils.registry import get_object

CARBON = {
    "response": "PC",
    "covariates": ["PG", "PR", "IR", "ER"],
    "constant": ["PG", "IR"],
    "kernel_name": "gaussian",
    "n_bootstrap": 500,
    "seed": 555,
    "alpha": 0.05,
}


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


def test_cartesian_grid():
    config = {"cartesian_hyperparams": {"m": [4, 8], "t_len": [3]}, "n_sim": 5}
    experiments, flags, axies = parse_dispatcher_config(config)
    assert experiments == ["--m 4 --t_len 3 --n_sim 5 ", "--m 8 --t_len 3 --n_sim 5 "]
    assert flags == ["m", "t_len"]
    assert axies == ["m"]


def test_paired_grid_is_zipped():
    config = {
        "cartesian_hyperparams": {"error_law": ["normal", "chisq"]},
        "paired_hyperparams": {"t_len": [5, 10], "m": [10, 12]},
    }
    experiments, _, axies = parse_dispatcher_config(config)
    assert experiments == [
        "--error_law normal --t_len 5 --m 10 ",
        "--error_law normal --t_len 10 --m 12 ",
        "--error_law chisq --t_len 5 --m 10 ",
        "--error_law chisq --t_len 10 --m 12 ",
    ]
    assert axies == ["t_len", "m", "error_law"]


def test_fixed_flags_render_switches_and_lists():
    config = {"strict": True, "quiet": False, "alphas": [0.01, 0.05]}
    experiments, flags, _ = parse_dispatcher_config(config)
    assert experiments == ["--strict --alphas 0.01 0.05 "]
    assert flags == []


def test_empty_axis_gives_no_cells():
    experiments, _, _ = parse_dispatcher_config({"cartesian_hyperparams": {"m": []}})
    assert experiments == []


def test_grid_values_must_be_lists():
    with pytest.raises(ConfigError):
        parse_dispatcher_config({"cartesian_hyperparams": {"m": 4}})


def test_load_grid_config_errors(tmp_path):
    with pytest.raises(MissingInput):
        load_grid_config(str(tmp_path / "absent.json"))
    bad = _write(tmp_path, "bad.json", '{\n  "m": [4,\n}')
    with pytest.raises(ConfigError) as err:
        load_grid_config(bad)
    assert "line 3" in str(err.value)
    with pytest.raises(ConfigError):
        load_grid_config(_write(tmp_path, "list.json", "[1, 2]"))


def test_cell_overrides_win():
    args = parse_cell_args("--m 4 --t_len 3 --n_sim 7", ["--m", "6"])
    assert args.m == 6
    assert args.t_len == 3
    assert args.n_sim == 7
    assert args.alphas == [0.01, 0.05, 0.10]


def test_cell_registry_flags():
    args = parse_cell_args("--rho_shape rho2 --kernel_name epanechnikov")
    assert args.rho_amplitude == 0.6
    assert args.bandwidth is None
    overrides = ["--rho_amplitude", "0.3", "--bandwidth", "0.2"]
    args = parse_cell_args("--rho_shape rho2", overrides)
    assert args.rho_amplitude == 0.3
    assert args.bandwidth == 0.2


def test_cell_rejects_unknown_registry_names():
    with pytest.raises(SystemExit):
        parse_cell_args("--error_law cauchy")


def test_registered_objects_share_abstract_base():
    assert type(Nox) is ABCMeta
    pairs = [("amse", "metric"), ("gaussian", "kernel"), ("rho1", "rho_shape")]
    for name, kind in pairs:
        assert isinstance(get_object(name, kind)(), Nox)



def test_fit_reads_single_cell_config(tmp_path):
    path = _write(tmp_path, "carbon.json", CARBON)
    argv = ["fit", "--panel_csv", "p.csv", "--weights_csv", "w.csv", "--out_dir", "o"]
    args = parse_args(argv + ["--config_path", path])
    assert args.response == "PC"
    assert args.covariates == ["PG", "PR", "IR", "ER"]
    assert args.constant == ["PG", "IR"]
    assert not hasattr(args, "n_bootstrap")

    args = parse_args(argv + ["--config_path", path, "--response", "PC_log"])
    assert args.response == "PC_log"


def test_test_reads_bootstrap_keys(tmp_path):
    path = _write(tmp_path, "carbon.json", CARBON)
    argv = ["test", "--panel_csv", "p.csv", "--weights_csv", "w.csv", "--out_path", "o"]
    args = parse_args(argv + ["--config_path", path])
    assert args.n_bootstrap == 500
    assert args.seed == 555
    assert args.bandwidth is None


def test_fit_config_must_be_one_cell(tmp_path):
    grid = {"cartesian_hyperparams": {"response": ["a", "b"]}}
    path = _write(tmp_path, "grid.json", grid)
    with pytest.raises(ConfigError):
        expand_config_flags(["fit", "--config_path", path])


def test_expand_leaves_other_commands_alone():
    tokens = ["weights", "--m", "3", "--out_path", "w.csv"]
    assert expand_config_flags(tokens) == tokens


def test_mc_collects_overrides(tmp_path):
    path = _write(tmp_path, "size.json", {"cartesian_hyperparams": {"m": [4]}})
    args = parse_args(
        ["mc", "size", "--config_path", path, "--out_path", "t.csv", "--m", "6"]
    )
    assert args.mc_mode == "size"
    assert args.overrides == ["--m", "6"]
