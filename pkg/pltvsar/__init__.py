# type: ignore

from importlib.metadata import PackageNotFoundError, version  # pragma: no cover

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = __name__
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

# lattices
import pltvsar.datasets.weights

# kernels
import pltvsar.models.kernels

# dgp shapes and error laws
import pltvsar.simulation.dgp

# metrics
import pltvsar.learning.metrics

from pltvsar.datasets.panel import ModelSpec, PanelData, load_panel_csv
from pltvsar.datasets.weights import (
    SpatialWeights,
    build_lattice_weights,
    load_weights_csv,
    row_standardize,
)
from pltvsar.inference.gof import TestConfig, bootstrap_test, decide
from pltvsar.models.estimator import fit, fit_full_tv
from pltvsar.utils.registry import get_object

__all__ = [
    "ModelSpec",
    "PanelData",
    "SpatialWeights",
    "TestConfig",
    "bootstrap_test",
    "build_lattice_weights",
    "decide",
    "fit",
    "fit_full_tv",
    "get_object",
    "load_panel_csv",
    "load_weights_csv",
    "row_standardize",
]
