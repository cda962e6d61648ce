import json
import os
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

FLOAT_FORMAT = "%.10g"


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (tuple, set)):
        return list(value)
    return value


def config_header(config: Mapping) -> Iterable[str]:
    """``# key=value`` lines, sorted by key."""
    return ["# {}={}".format(k, _jsonable(config[k])) for k in sorted(config)]


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_csv(path: str, frame: pd.DataFrame, config: Mapping, header=True) -> None:
    _ensure_parent(path)
    with open(path, "w", newline="") as f:
        for line in config_header(config):
            f.write(line + "\n")
        frame.to_csv(
            f,
            index=False,
            header=header,
            float_format=FLOAT_FORMAT,
            lineterminator="\n",
        )


def write_matrix_csv(path: str, values: np.ndarray, config: Mapping) -> None:
    """Bare matrix below the config comments; full precision so it reloads exactly."""
    _ensure_parent(path)
    with open(path, "w", newline="") as f:
        for line in config_header(config):
            f.write(line + "\n")
        pd.DataFrame(values).to_csv(
            f, index=False, header=False, float_format="%.17g", lineterminator="\n"
        )


def write_json(path: str, payload: Mapping, config: Mapping) -> None:
    _ensure_parent(path)
    out = {k: _jsonable(v) for k, v in payload.items()}
    out["config"] = {k: _jsonable(v) for k, v in config.items()}
    with open(path, "w") as f:
        json.dump(out, f, indent=2, sort_keys=True, default=_jsonable)
        f.write("\n")
