import json
import os
import sys

import numpy as np
import pandas as pd
from rich import print

from pltvsar.datasets.panel import ModelSpec, PanelLayout, load_panel_csv
from pltvsar.datasets.weights import (
    build_lattice_weights,
    load_weights_csv,
    row_standardize,
)
from pltvsar.inference.gof import TestConfig, bootstrap_test, decide, w_statistic
from pltvsar.loggers.console import log, setup_logging
from pltvsar.models.estimator import fit, fit_full_tv
from pltvsar.simulation.dgp import DgpConfig, generate
from pltvsar.simulation.monte_carlo import mc_estimation, mc_power, mc_size
from pltvsar.utils.errors import (
    ConfigError,
    DimensionError,
    InvalidGrid,
    InvalidSpec,
    IsolatedLocation,
    MissingInput,
    PanelParseError,
    PltvsarError,
    PreconditionViolation,
)
from pltvsar.utils.messages import DIMENSION_ERR, FILE_NOT_FOUND_ERR, INVALID_SPEC_ERR
from pltvsar.utils.parsing import (
    load_grid_config,
    parse_args,
    parse_cell_args,
    parse_dispatcher_config,
)
from pltvsar.utils.registry import md5
from pltvsar.utils.writers import write_csv, write_json, write_matrix_csv

INPUT_ERRORS = (
    ConfigError,
    DimensionError,
    InvalidGrid,
    InvalidSpec,
    IsolatedLocation,
    MissingInput,
    PanelParseError,
    PreconditionViolation,
)
QUIET_KEYS = ("log_level", "quiet", "num_workers")
CELL_COLUMNS = [
    "cell_id",
    "rho_shape",
    "scheme",
    "error_law",
    "beta4_shape",
    "t_len",
    "n",
    "c",
    "n_sim",
    "seed",
    "kernel",
]
ESTIMATE_COLUMNS = [
    "amse_rho",
    "amse_beta1",
    "amse_beta2",
    "bias_beta3",
    "sd_beta3",
    "bias_beta4",
    "sd_beta4",
]


def run_config(args) -> dict:
    """Effective arguments that determine the output."""
    return {k: v for k, v in sorted(vars(args).items()) if k not in QUIET_KEYS}


def dgp_config(args) -> DgpConfig:
    return DgpConfig(
        m=args.m,
        t_len=args.t_len,
        scheme=args.scheme,
        rho_shape=args.rho_shape,
        error_law=args.error_law,
        c=args.c,
        seed=args.seed,
        beta4_shape=args.beta4_shape,
        rho_amplitude=getattr(args, "rho_amplitude", 0.6),
    )


def cmd_weights(args):
    w = row_standardize(build_lattice_weights(args.m, args.scheme))
    write_matrix_csv(args.out_path, w.values, run_config(args))
    log.info("wrote %dx%d weights to %s", w.n_locations, w.n_locations, args.out_path)


def cmd_simulate(args):
    cfg = dgp_config(args)
    sim = generate(cfg, args.replicate)
    data = sim.data
    config = run_config(args)
    os.makedirs(args.out_dir, exist_ok=True)

    panel = pd.DataFrame(
        {
            "location": np.tile(np.arange(1, data.n + 1), data.t_len),
            "period": np.repeat(np.arange(1, data.t_len + 1), data.n),
            "y": data.y,
        }
    )
    for j, name in enumerate(data.column_names[1:], start=1):
        panel[name] = data.x[:, j]
    write_csv(os.path.join(args.out_dir, "panel.csv"), panel, config)
    write_matrix_csv(
        os.path.join(args.out_dir, "weights.csv"), sim.weights.values, config
    )
    truth = sim.truth
    write_csv(
        os.path.join(args.out_dir, "truth.csv"),
        pd.DataFrame(
            {
                "tau": truth.tau,
                "rho": truth.rho,
                "beta1": truth.beta1,
                "beta2": truth.beta2,
                "beta3": truth.beta3,
                "beta4": truth.beta4,
            }
        ),
        config,
    )
    log.info("simulated N=%d, T=%d panel into %s", data.n, data.t_len, args.out_dir)


def load_inputs(args):
    """Panel, model spec and spatial weights from the data flags."""
    for path in (args.panel_csv, args.weights_csv):
        if not os.path.exists(path):
            raise MissingInput(FILE_NOT_FOUND_ERR.format(path))
    layout = PanelLayout(
        response=args.response,
        covariates=list(args.covariates),
        location_col=args.location_col,
        period_col=args.period_col,
    )
    data = load_panel_csv(args.panel_csv, layout)
    w = load_weights_csv(args.weights_csv)
    if not args.raw_weights:
        w = row_standardize(w)
    if w.n_locations != data.n:
        raise DimensionError(DIMENSION_ERR.format(data.n, w.n_locations))

    if args.all_varying:
        spec = ModelSpec.all_varying(data.p)
    else:
        constant = (
            list(args.constant) if args.constant is not None else args.covariates[-2:]
        )
        varying = [c for c in args.covariates if c not in constant]
        spec = ModelSpec.from_names(data.column_names, varying, constant)
    return data, spec, w


def _period_labels(args, data):
    labels = getattr(args, "period_labels", None)
    if not labels:
        return list(data.period_labels)
    if len(labels) != data.t_len:
        raise InvalidSpec(
            INVALID_SPEC_ERR.format(
                "{} period labels for T={}".format(len(labels), data.t_len)
            )
        )
    return list(labels)


def _curve_frame(tau, labels, names, curves) -> pd.DataFrame:
    frame = pd.DataFrame({"tau": tau, "period": labels})
    for j, name in enumerate(names):
        frame[name] = curves[:, j]
    return frame


def cmd_fit(args):
    data, spec, w = load_inputs(args)
    result = fit(data, spec, w, args.kernel_name, args.bandwidth)
    config = run_config(args)
    labels = _period_labels(args, data)
    out = args.out_dir

    write_json(
        os.path.join(out, "beta_c.json"),
        {
            "beta_c": result.beta_c_named(),
            "bandwidth": result.bandwidth.h,
            "kernel": result.kernel,
            "n": data.n,
            "t_len": data.t_len,
            "nonstationary": result.nonstationary,
        },
        config,
    )
    write_csv(
        os.path.join(out, "gamma_v.csv"),
        _curve_frame(data.tau, labels, result.curve_names(), result.gamma_v),
        config,
    )
    write_csv(
        os.path.join(out, "alpha.csv"),
        pd.DataFrame({"location": list(data.location_labels), "alpha": result.alpha}),
        config,
    )
    rss = {"rss_pl": result.rss}
    if args.emit_tv:
        tv = fit_full_tv(data, result.stage1, result.bandwidth, args.kernel_name)
        rss["rss_tv"] = tv.rss
        rss["w_statistic"] = w_statistic(result.rss, tv.rss, data.n, data.t_len)
        names = ["rho_hat"] + ["beta_{}".format(c) for c in data.column_names]
        write_csv(
            os.path.join(out, "gamma_tv.csv"),
            _curve_frame(data.tau, labels, names, tv.gamma_full),
            config,
        )
        write_csv(
            os.path.join(out, "alpha_tv.csv"),
            pd.DataFrame({"location": list(data.location_labels), "alpha": tv.alpha}),
            config,
        )
    write_json(os.path.join(out, "rss.json"), rss, config)
    log.info("fit written to %s (RSS_PL=%.6g)", out, result.rss)


def cmd_test(args):
    data, spec, w = load_inputs(args)
    result = fit(data, spec, w, args.kernel_name, args.bandwidth)
    tv = fit_full_tv(data, result.stage1, result.bandwidth, args.kernel_name)
    cfg = TestConfig(
        n_bootstrap=args.n_bootstrap,
        seed=args.seed,
        parallel=args.num_workers,
        strict=args.strict,
        progress=not args.quiet,
    )
    test = bootstrap_test(data, spec, w, args.kernel_name, result, tv, cfg)
    decision = decide(test, args.alpha)
    payload = test.to_dict(include_bootstrap=args.save_bootstrap)
    payload.update(
        {
            "alpha": args.alpha,
            "decision": decision.value,
            "rss_pl": result.rss,
            "rss_tv": tv.rss,
            "bandwidth": result.bandwidth.h,
        }
    )
    write_json(args.out_path, payload, run_config(args))
    log.info("W=%.6g, p=%.4f: %s", test.w_observed, test.p_value, decision.value)


def _mc_columns(mode, rows, default_cell):
    if mode == "estimate":
        return CELL_COLUMNS + ESTIMATE_COLUMNS
    if mode == "power":
        return CELL_COLUMNS + ["k", "alpha", "power"]
    sizes = ["size_{:g}".format(a) for a in default_cell.alphas]
    for row in rows:
        sizes += [k for k in row if k.startswith("size_") and k not in sizes]
    return CELL_COLUMNS + ["k"] + sizes


def cmd_mc(args):
    grid = load_grid_config(args.config_path)
    experiments, _, axes = parse_dispatcher_config(grid)
    overrides = list(args.overrides)
    out_dir = args.out_dir or os.path.dirname(os.path.abspath(args.out_path))
    progress = not args.quiet
    log.info("%d cells over axes %s", len(experiments), axes)

    rows = []
    for exp in experiments:
        cell = parse_cell_args(exp, overrides)
        cell_id = md5(exp + " ".join(overrides))
        cfg = dgp_config(cell)
        row = {
            "cell_id": cell_id,
            "rho_shape": cfg.rho_shape,
            "scheme": cfg.scheme,
            "error_law": cfg.error_law,
            "beta4_shape": cfg.beta4_shape,
            "t_len": cfg.t_len,
            "n": cfg.n,
            "c": cfg.c,
            "n_sim": cell.n_sim,
            "seed": cfg.seed,
            "kernel": cell.kernel_name,
        }
        if args.mc_mode == "estimate":
            summary = mc_estimation(
                cfg,
                cell.n_sim,
                args.num_workers,
                cell.kernel_name,
                progress,
                cell.bandwidth,
            )
            row.update(summary.metrics())
            write_csv(
                os.path.join(out_dir, "curves_{}.csv".format(cell_id)),
                summary.curve_frame(),
                dict(run_config(cell), cell_id=cell_id),
            )
        elif args.mc_mode == "size":
            summary = mc_size(
                cfg,
                cell.n_sim,
                cell.n_bootstrap,
                cell.alphas,
                args.num_workers,
                cell.kernel_name,
                cell.strict,
                progress,
                cell.bandwidth,
            )
            row["k"] = cell.n_bootstrap
            for alpha, rate in summary.rates.items():
                row["size_{:g}".format(alpha)] = rate
        else:
            summary = mc_power(
                cfg,
                cell.n_sim,
                cell.n_bootstrap,
                cell.alpha,
                args.num_workers,
                cell.kernel_name,
                cell.strict,
                progress,
                cell.bandwidth,
            )
            row["k"] = cell.n_bootstrap
            row["alpha"] = cell.alpha
            row["power"] = summary.rates[cell.alpha]
        rows.append(row)

    config = {
        "command": "mc",
        "mc_mode": args.mc_mode,
        "config_path": args.config_path,
        "grid": json.dumps(grid, sort_keys=True),
        "overrides": " ".join(overrides),
    }
    columns = _mc_columns(args.mc_mode, rows, parse_cell_args("", overrides))
    frame = pd.DataFrame(rows, columns=columns)
    write_csv(args.out_path, frame, config)
    log.info("wrote %d rows to %s", len(rows), args.out_path)


COMMANDS = {
    "weights": cmd_weights,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "test": cmd_test,
    "mc": cmd_mc,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except INPUT_ERRORS as e:
        setup_logging("ERROR")
        log.error(str(e))
        return 2
    setup_logging(args.log_level)

    # print args
    if not args.quiet:
        for key, value in sorted(vars(args).items()):
            print("{} -- {}".format(key.upper(), value))

    try:
        COMMANDS[args.command](args)
    except INPUT_ERRORS as e:
        log.error(str(e))
        return 2
    except PltvsarError as e:
        log.error(str(e))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
