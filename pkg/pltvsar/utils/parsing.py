import argparse
import itertools
import json
import os
import shlex
import sys

from pltvsar.utils.classes import set_nox_type
from pltvsar.utils.errors import ConfigError, MissingInput
from pltvsar.utils.messages import CONFIG_NOT_FOUND_MSG, CONFIG_PARSE_ERR
from pltvsar.utils.parallel import default_num_workers
from pltvsar.utils.registry import list_objects

GRID_KEYS = ["cartesian_hyperparams", "paired_hyperparams"]
POSS_VAL_NOT_LIST = "Flag {} has an invalid list of values: {}. Value must be a list"
MC_MODES = ["estimate", "size", "power"]


class GlobalNamespace(argparse.Namespace):
    pass


def _flag(key, value):
    """Render one flag; booleans become switches and lists become nargs values."""
    if type(value) is bool:
        return "--{} ".format(key) if value else ""
    if isinstance(value, (list, tuple)):
        return "--{} {} ".format(key, " ".join(str(v) for v in value))
    return "--{} {} ".format(key, value)


def parse_dispatcher_config(config):
    """
    Expands an experiment grid into one flag string per cell. Lists under
    cartesian_hyperparams are crossed, lists under paired_hyperparams are zipped,
    and any other top-level key is a fixed flag shared by every cell.

    returns: experiments - a list of flag strings, each of which encapsulates one cell.
         *Example: --m 10 --t_len 5 --rho_shape rho1 ...
    returns: flags - every flag that varies in the grid
    returns: experiment_axies - axies that the grid search is searching over
    """
    cartesian_hyperparams = config.get("cartesian_hyperparams", {})
    paired_hyperparams = config.get("paired_hyperparams", {})
    for key, value in itertools.chain(
        cartesian_hyperparams.items(), paired_hyperparams.items()
    ):
        if not isinstance(value, list):
            raise ConfigError(POSS_VAL_NOT_LIST.format(key, value))

    flags = []
    arguments = []
    experiment_axies = []

    # add anything outside search space as fixed
    fixed_args = ""
    for arg in config:
        if arg not in GRID_KEYS:
            fixed_args += _flag(arg, config[arg])

    # add paired combo of search space
    paired_args_list = [""]
    if len(paired_hyperparams) > 0:
        paired_args_list = []
        paired_keys = list(paired_hyperparams.keys())
        flags.extend(paired_keys)
        experiment_axies.extend(paired_keys)
        for paired_combo in zip(*paired_hyperparams.values()):
            paired_args_list.append(
                "".join(_flag(k, v) for k, v in zip(paired_keys, paired_combo))
            )

    # add every combo of search space
    product_flags = []
    for key, value in cartesian_hyperparams.items():
        flags.append(key)
        product_flags.append(key)
        arguments.append(value)
        if len(value) > 1:
            experiment_axies.append(key)

    experiments = []
    for tpl in itertools.product(*arguments):
        exp = "".join(_flag(flg, val) for flg, val in zip(product_flags, tpl))
        for paired_args in paired_args_list:
            experiments.append(exp + paired_args + fixed_args)

    return experiments, flags, experiment_axies


def load_grid_config(path):
    """Read a JSON experiment grid, reporting decode errors with the offending line."""
    if not os.path.exists(path):
        raise MissingInput(CONFIG_NOT_FOUND_MSG.format("grid", path))
    with open(path, "r") as f:
        text = f.read()
    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        lines = text.splitlines()
        context = lines[e.lineno - 1] if 0 < e.lineno <= len(lines) else ""
        raise ConfigError(CONFIG_PARSE_ERR.format(path, e.lineno, e.colno, e.msg, context))
    if not isinstance(config, dict):
        raise ConfigError(
            CONFIG_PARSE_ERR.format(path, 1, 1, "top level must be an object", text[:80])
        )
    return config


# -------------------------------------
# Argument sections
# -------------------------------------


def add_run_args(parser):
    parser.add_argument(
        "--log_level",
        type=str,
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Console logging level [default: INFO]",
    )
    parser.add_argument(
        "--quiet",
        action="store_true",
        default=False,
        help="Suppress progress bars and the argument echo",
    )


def add_workers_arg(parser):
    parser.add_argument(
        "--num_workers",
        type=int,
        default=default_num_workers(),
        help="Parallel worker processes for replicate loops "
        "[default: $PLTVSAR_NUM_WORKERS or 1]",
    )


def add_dgp_args(parser):
    parser.add_argument("--m", type=int, default=10, help="Lattice side length, N = m^2")
    parser.add_argument("--t_len", type=int, default=5, help="Number of periods T")
    parser.add_argument(
        "--scheme",
        type=str,
        action=set_nox_type("lattice"),
        choices=list_objects("lattice"),
        default="rook",
        help="Lattice contiguity scheme",
    )
    parser.add_argument(
        "--rho_shape",
        type=str,
        action=set_nox_type("rho_shape"),
        choices=list_objects("rho_shape"),
        default="rho1",
        help="Spatial lag coefficient curve",
    )
    parser.add_argument(
        "--error_law",
        type=str,
        action=set_nox_type("error_law"),
        choices=list_objects("error_law"),
        default="normal",
        help="Error distribution (mean 0, variance 1)",
    )
    parser.add_argument(
        "--c",
        type=float,
        default=0.0,
        help="Deviation of beta3, beta4 from constancy; 0 is the null",
    )
    parser.add_argument(
        "--beta4_shape",
        type=str,
        action=set_nox_type("beta4_shape"),
        choices=list_objects("beta4_shape"),
        default="sin2pi",
        help="Shape g(tau) of the beta4 deviation",
    )
    parser.add_argument("--seed", type=int, default=0, help="Master random seed")


def add_kernel_args(parser):
    parser.add_argument(
        "--kernel_name",
        type=str,
        action=set_nox_type("kernel"),
        choices=list_objects("kernel"),
        default="gaussian",
        help="Kernel for local-linear smoothing",
    )


def add_data_args(parser):
    parser.add_argument(
        "--panel_csv", type=str, required=True, help="Long-format panel CSV"
    )
    parser.add_argument(
        "--weights_csv", type=str, required=True, help="N x N spatial weights CSV"
    )
    parser.add_argument("--response", type=str, default="y", help="Response column")
    parser.add_argument(
        "--covariates",
        nargs="+",
        default=["x2", "x3", "x4"],
        help="Covariate columns, in design order (intercept is prepended)",
    )
    parser.add_argument(
        "--constant",
        nargs="*",
        default=None,
        help="Covariates with constant coefficients; the rest vary over time "
        "[default: last two covariates]",
    )
    parser.add_argument(
        "--all_varying",
        action="store_true",
        default=False,
        help="Fit every coefficient as time-varying (empty constant block)",
    )
    parser.add_argument("--location_col", type=str, default="location")
    parser.add_argument("--period_col", type=str, default="period")
    parser.add_argument(
        "--raw_weights",
        action="store_true",
        default=False,
        help="Use the weights as read instead of row-standardizing them",
    )


def add_config_arg(parser):
    parser.add_argument(
        "--config_path",
        type=str,
        default=None,
        help="JSON file of fixed flags; command-line flags override it",
    )


def add_test_args(parser):
    parser.add_argument(
        "--n_bootstrap", type=int, default=500, help="Bootstrap replicates k"
    )
    parser.add_argument("--seed", type=int, default=0, help="Bootstrap master seed")
    parser.add_argument(
        "--alpha", type=float, default=0.05, help="Significance level for the decision"
    )
    parser.add_argument(
        "--strict",
        action="store_true",
        default=False,
        help="Count W* > w instead of W* >= w in the p-value",
    )


def add_cell_args(parser):
    add_dgp_args(parser)
    add_kernel_args(parser)
    parser.add_argument("--n_sim", type=int, default=100, help="Monte-Carlo replicates")
    parser.add_argument(
        "--n_bootstrap", type=int, default=200, help="Bootstrap replicates per run"
    )
    parser.add_argument(
        "--alphas",
        nargs="+",
        type=float,
        default=[0.01, 0.05, 0.10],
        help="Significance levels for size tables",
    )
    parser.add_argument(
        "--alpha", type=float, default=0.05, help="Significance level for power"
    )
    parser.add_argument(
        "--strict",
        action="store_true",
        default=False,
        help="Count W* > w instead of W* >= w in the p-value",
    )


def get_parser():
    parser = argparse.ArgumentParser(
        description="Partially linear time-varying SAR panel estimation and testing.",
        allow_abbrev=False,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # -------------------------------------
    # Weights
    # -------------------------------------
    weights = subparsers.add_parser("weights", allow_abbrev=False)
    add_run_args(weights)
    weights.add_argument("--m", type=int, required=True, help="Lattice side length")
    weights.add_argument(
        "--scheme",
        type=str,
        action=set_nox_type("lattice"),
        choices=list_objects("lattice"),
        default="rook",
    )
    weights.add_argument("--out_path", type=str, required=True)

    # -------------------------------------
    # Simulate
    # -------------------------------------
    simulate = subparsers.add_parser("simulate", allow_abbrev=False)
    add_run_args(simulate)
    add_dgp_args(simulate)
    simulate.add_argument(
        "--replicate", type=int, default=0, help="Replicate index under --seed"
    )
    simulate.add_argument("--out_dir", type=str, required=True)

    # -------------------------------------
    # Fit
    # -------------------------------------
    fit = subparsers.add_parser("fit", allow_abbrev=False)
    add_run_args(fit)
    add_data_args(fit)
    add_kernel_args(fit)
    add_config_arg(fit)
    fit.add_argument("--out_dir", type=str, required=True)
    fit.add_argument(
        "--emit_tv",
        action="store_true",
        default=False,
        help="Also write the fully time-varying curves and fixed effects",
    )
    fit.add_argument(
        "--period_labels",
        nargs="*",
        default=None,
        help="Labels for the periods (e.g. years) added to curve CSVs",
    )

    # -------------------------------------
    # Test
    # -------------------------------------
    test = subparsers.add_parser("test", allow_abbrev=False)
    add_run_args(test)
    add_data_args(test)
    add_kernel_args(test)
    add_test_args(test)
    add_workers_arg(test)
    add_config_arg(test)
    test.add_argument("--out_path", type=str, required=True)
    test.add_argument(
        "--save_bootstrap",
        action="store_true",
        default=False,
        help="Include every bootstrap statistic in the JSON",
    )

    # -------------------------------------
    # Monte Carlo; cell flags are read from the grid, extra flags override it
    # -------------------------------------
    mc = subparsers.add_parser("mc", allow_abbrev=False)
    add_run_args(mc)
    add_workers_arg(mc)
    mc.add_argument("mc_mode", choices=MC_MODES)
    mc.add_argument("--config_path", type=str, required=True, help="JSON grid")
    mc.add_argument("--out_path", type=str, required=True, help="Table CSV")
    mc.add_argument(
        "--out_dir",
        type=str,
        default=None,
        help="Directory for per-cell curve CSVs [default: next to --out_path]",
    )

    return parser, subparsers


def add_class_args(args_as_dict, parser):
    """Let registry objects chosen on the command line add their own flags."""
    args_for_noxs = {a.dest: a for a in parser._actions if hasattr(a, "is_nox_action")}
    for argname, argval in args_as_dict.items():
        if argname in args_for_noxs:
            args_for_noxs[argname].add_args(parser, argval)


def set_class_args(args, parser):
    args_for_noxs = {a.dest: a for a in parser._actions if hasattr(a, "is_nox_action")}
    for argname, argval in vars(args).items():
        if argname in args_for_noxs:
            args_for_noxs[argname].set_args(args, argval)


def expand_config_flags(tokens, accepted=None):
    """
    Splice the flags of a single-cell JSON config in front of the command line.
    Keys outside ``accepted`` are dropped so one file can serve both fit and test.
    """
    if "--config_path" not in tokens or not tokens or tokens[0] not in ("fit", "test"):
        return tokens
    idx = tokens.index("--config_path")
    if idx + 1 >= len(tokens):
        return tokens
    path = tokens[idx + 1]
    config = load_grid_config(path)
    if accepted is not None:
        config = {k: v for k, v in config.items() if k in accepted or k in GRID_KEYS}
    experiments, _, _ = parse_dispatcher_config(config)
    if len(experiments) != 1:
        raise ConfigError(
            CONFIG_PARSE_ERR.format(path, 1, 1, "expected exactly one cell", "")
        )
    return tokens[:1] + shlex.split(experiments[0]) + tokens[1:]


def parse_args(args_strings=None):
    if args_strings is None:
        args_strings = sys.argv[1:]
    parser, subparsers = get_parser()
    args_strings = list(args_strings)
    if args_strings and args_strings[0] in subparsers.choices:
        accepted = {a.dest for a in subparsers.choices[args_strings[0]]._actions}
        args_strings = expand_config_flags(args_strings, accepted)
    global_namespace = GlobalNamespace()
    parser.parse_known_args(args_strings, namespace=global_namespace)
    command_parser = subparsers.choices[global_namespace.command]
    add_class_args(vars(global_namespace), command_parser)

    if global_namespace.command == "mc":
        args, overrides = parser.parse_known_args(args_strings)
        args.overrides = overrides
    else:
        args = parser.parse_args(args_strings)
    set_class_args(args, command_parser)
    return args


def get_cell_parser():
    parser = argparse.ArgumentParser(description="Monte-Carlo cell", allow_abbrev=False)
    add_cell_args(parser)
    return parser


def parse_cell_args(flag_string, overrides=()):
    """Parse one grid cell; ``overrides`` come after the cell flags and win."""
    tokens = shlex.split(flag_string) + list(overrides)
    parser = get_cell_parser()
    global_namespace = GlobalNamespace()
    parser.parse_known_args(tokens, namespace=global_namespace)
    add_class_args(vars(global_namespace), parser)
    args = parser.parse_args(tokens)
    set_class_args(args, parser)
    return args
